#include "ewire/algebra.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>

namespace ewire {

FdAlgebra::FdAlgebra(std::vector<int> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw EvalError("the zero algebra is not supported");
  offsets_.reserve(blocks_.size());
  std::int64_t off = 0;
  for (int n : blocks_) {
    if (n < 1) throw EvalError("matrix blocks must have size >= 1");
    offsets_.push_back(off);
    off += static_cast<std::int64_t>(n) * n;
  }
  element_dim_ = off;
}

FdAlgebra FdAlgebra::classical(int k) {
  if (k < 1) throw EvalError("copower of the empty set (ZeroCopower)");
  return FdAlgebra(std::vector<int>(static_cast<size_t>(k), 1));
}

bool FdAlgebra::is_commutative() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](int n) { return n == 1; });
}

Vector FdAlgebra::unit() const {
  Vector v = Vector::Zero(element_dim_);
  for (int i = 0; i < num_blocks(); ++i)
    for (int r = 0; r < blocks_[i]; ++r) v(offsets_[i] + r * blocks_[i] + r) = 1.0;
  return v;
}

FdAlgebra alg_tensor(const FdAlgebra& a, const FdAlgebra& b) {
  std::vector<int> out;
  out.reserve(a.blocks().size() * b.blocks().size());
  for (int n : a.blocks())
    for (int m : b.blocks()) out.push_back(n * m);
  return FdAlgebra(std::move(out));
}

FdAlgebra alg_direct_sum(const FdAlgebra& a, const FdAlgebra& b) {
  std::vector<int> out = a.blocks();
  out.insert(out.end(), b.blocks().begin(), b.blocks().end());
  return FdAlgebra(std::move(out));
}

FdAlgebra alg_copower(int n, const FdAlgebra& a) {
  if (n < 1) throw EvalError("copower of the empty set (ZeroCopower)");
  std::vector<int> out;
  for (int c = 0; c < n; ++c) out.insert(out.end(), a.blocks().begin(), a.blocks().end());
  return FdAlgebra(std::move(out));
}

std::vector<std::int64_t> tensor_permutation(const FdAlgebra& a, const FdAlgebra& b) {
  const std::int64_t db = b.element_dim();
  std::vector<std::int64_t> perm(static_cast<size_t>(a.element_dim() * db));
  std::int64_t off = 0;
  for (int i = 0; i < a.num_blocks(); ++i) {
    const std::int64_t n = a.blocks()[i];
    for (int j = 0; j < b.num_blocks(); ++j) {
      const std::int64_t m = b.blocks()[j];
      const std::int64_t nm = n * m;
      for (std::int64_t r1 = 0; r1 < n; ++r1)
        for (std::int64_t c1 = 0; c1 < n; ++c1) {
          const std::int64_t ia = a.offset(i) + r1 * n + c1;
          for (std::int64_t r2 = 0; r2 < m; ++r2)
            for (std::int64_t c2 = 0; c2 < m; ++c2) {
              const std::int64_t ib = b.offset(j) + r2 * m + c2;
              perm[ia * db + ib] = off + (r1 * m + r2) * nm + (c1 * m + c2);
            }
        }
      off += nm * nm;
    }
  }
  return perm;
}

// ---------------------------------------------------------------------------

namespace {
void require_same(const FdAlgebra& a, const FdAlgebra& b, const char* what) {
  if (a != b) throw EvalError(std::string("DimensionMismatch in ") + what);
}
}  // namespace

SuperOp op_identity(const FdAlgebra& a) {
  return {a, a, Matrix::Identity(a.element_dim(), a.element_dim())};
}

SuperOp op_zero(const FdAlgebra& source, const FdAlgebra& target) {
  return {source, target, Matrix::Zero(target.element_dim(), source.element_dim())};
}

SuperOp op_compose(const SuperOp& f, const SuperOp& g) {
  require_same(f.target, g.source, "op_compose");
  return {f.source, g.target, g.matrix * f.matrix};
}

SuperOp op_tensor(const SuperOp& f, const SuperOp& g) {
  const FdAlgebra source = alg_tensor(f.source, g.source);
  const FdAlgebra target = alg_tensor(f.target, g.target);
  check_dim(source.element_dim(), "op_tensor");
  check_dim(target.element_dim(), "op_tensor");
  const auto ps = tensor_permutation(f.source, g.source);
  const auto pt = tensor_permutation(f.target, g.target);
  const std::int64_t gs = g.source.element_dim(), gt = g.target.element_dim();
  Matrix m = Matrix::Zero(target.element_dim(), source.element_dim());
  for (std::int64_t rf = 0; rf < f.matrix.rows(); ++rf)
    for (std::int64_t cf = 0; cf < f.matrix.cols(); ++cf) {
      const Complex x = f.matrix(rf, cf);
      if (x == Complex(0.0)) continue;
      for (std::int64_t rg = 0; rg < gt; ++rg)
        for (std::int64_t cg = 0; cg < gs; ++cg)
          m(pt[rf * gt + rg], ps[cf * gs + cg]) = x * g.matrix(rg, cg);
    }
  return {source, target, std::move(m)};
}

SuperOp op_direct_sum(const SuperOp& f, const SuperOp& g) {
  SuperOp out{alg_direct_sum(f.source, g.source), alg_direct_sum(f.target, g.target), {}};
  out.matrix = Matrix::Zero(out.target.element_dim(), out.source.element_dim());
  out.matrix.topLeftCorner(f.matrix.rows(), f.matrix.cols()) = f.matrix;
  out.matrix.bottomRightCorner(g.matrix.rows(), g.matrix.cols()) = g.matrix;
  return out;
}

SuperOp op_copower(int n, const SuperOp& f) {
  if (n < 1) throw EvalError("copower of the empty set (ZeroCopower)");
  SuperOp out = f;
  for (int c = 1; c < n; ++c) out = op_direct_sum(out, f);
  return out;
}

SuperOp op_scale(const SuperOp& f, Complex s) { return {f.source, f.target, f.matrix * s}; }

SuperOp op_add(const SuperOp& f, const SuperOp& g) {
  require_same(f.source, g.source, "op_add");
  require_same(f.target, g.target, "op_add");
  return {f.source, f.target, f.matrix + g.matrix};
}

SuperOp op_sub(const SuperOp& f, const SuperOp& g) {
  require_same(f.source, g.source, "op_sub");
  require_same(f.target, g.target, "op_sub");
  return {f.source, f.target, f.matrix - g.matrix};
}

SuperOp op_unitary(const Matrix& u) {
  const int n = static_cast<int>(u.rows());
  const Matrix ud = u.adjoint();
  const Matrix ut = u.transpose();
  Matrix m(n * n, n * n);
  for (int r1 = 0; r1 < n; ++r1)
    for (int r2 = 0; r2 < n; ++r2)
      for (int c1 = 0; c1 < n; ++c1)
        for (int c2 = 0; c2 < n; ++c2) m(r1 * n + r2, c1 * n + c2) = ud(r1, c1) * ut(r2, c2);
  return {FdAlgebra::matrix(n), FdAlgebra::matrix(n), std::move(m)};
}

SuperOp op_block_permutation(const FdAlgebra& a, const std::vector<int>& sigma) {
  if (static_cast<int>(sigma.size()) != a.num_blocks())
    throw EvalError("block permutation has the wrong length");
  std::vector<int> blocks;
  std::vector<bool> seen(sigma.size(), false);
  for (int s : sigma) {
    if (s < 0 || s >= a.num_blocks() || seen[s]) throw EvalError("not a block permutation");
    seen[s] = true;
    blocks.push_back(a.blocks()[s]);
  }
  FdAlgebra target(std::move(blocks));
  Matrix m = Matrix::Zero(target.element_dim(), a.element_dim());
  for (int k = 0; k < target.num_blocks(); ++k) {
    const std::int64_t sz = static_cast<std::int64_t>(target.blocks()[k]) * target.blocks()[k];
    for (std::int64_t e = 0; e < sz; ++e) m(target.offset(k) + e, a.offset(sigma[k]) + e) = 1.0;
  }
  return {a, target, std::move(m)};
}

SuperOp op_swap(const FdAlgebra& a, const FdAlgebra& b) {
  const FdAlgebra ab = alg_tensor(a, b), ba = alg_tensor(b, a);
  const auto pab = tensor_permutation(a, b);
  const auto pba = tensor_permutation(b, a);
  const std::int64_t da = a.element_dim(), db = b.element_dim();
  Matrix m = Matrix::Zero(ab.element_dim(), ba.element_dim());
  for (std::int64_t ia = 0; ia < da; ++ia)
    for (std::int64_t ib = 0; ib < db; ++ib) m(pab[ia * db + ib], pba[ib * da + ia]) = 1.0;
  return {ba, ab, std::move(m)};
}

std::vector<int> copower_sum_blocks(int n, const FdAlgebra& a, const FdAlgebra& b) {
  const int ka = a.num_blocks(), kb = b.num_blocks();
  std::vector<int> sigma;
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < ka; ++i) sigma.push_back(c * (ka + kb) + i);
  for (int c = 0; c < n; ++c)
    for (int j = 0; j < kb; ++j) sigma.push_back(c * (ka + kb) + ka + j);
  return sigma;
}

std::vector<int> tensor_copower_blocks(int n, const FdAlgebra& a, const FdAlgebra& b) {
  const int ka = a.num_blocks(), kb = b.num_blocks();
  std::vector<int> sigma;
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < ka; ++i)
      for (int j = 0; j < kb; ++j) sigma.push_back(i * (n * kb) + c * kb + j);
  return sigma;
}

// ---------------------------------------------------------------------------
// Positivity

namespace {

Matrix choi_block(const SuperOp& f, int i, int j) {
  const int n = f.source.blocks()[i];
  const int m = f.target.blocks()[j];
  const std::int64_t os = f.source.offset(i), ot = f.target.offset(j);
  Matrix c(n * m, n * m);
  for (int r = 0; r < n; ++r)
    for (int cc = 0; cc < n; ++cc) {
      const std::int64_t col = os + r * n + cc;
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) c(r * m + p, cc * m + q) = f.matrix(ot + p * m + q, col);
    }
  return c;
}

double hermitian_min_eigenvalue(const Matrix& c) {
  if (c.size() == 0) return 0.0;
  const Eigen::MatrixXcd h = (c + c.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXcd min_eigenvector(const Eigen::MatrixXcd& k, double* value) {
  const Eigen::MatrixXcd h = (k + k.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  *value = es.eigenvalues()(0);
  return es.eigenvectors().col(0);
}

}  // namespace

Matrix choi_matrix(const SuperOp& f) {
  std::int64_t total = 0;
  for (int n : f.source.blocks())
    for (int m : f.target.blocks()) total += static_cast<std::int64_t>(n) * m;
  Matrix out = Matrix::Zero(total, total);
  std::int64_t off = 0;
  for (int i = 0; i < f.source.num_blocks(); ++i)
    for (int j = 0; j < f.target.num_blocks(); ++j) {
      Matrix c = choi_block(f, i, j);
      out.block(off, off, c.rows(), c.cols()) = c;
      off += c.rows();
    }
  return out;
}

double choi_min_eigenvalue(const SuperOp& f) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.source.num_blocks(); ++i)
    for (int j = 0; j < f.target.num_blocks(); ++j)
      best = std::min(best, hermitian_min_eigenvalue(choi_block(f, i, j)));
  return best;
}

bool is_cp(const SuperOp& f, double tol) { return choi_min_eigenvalue(f) >= -tol; }

bool is_unital(const SuperOp& f, double tol) {
  return (f.apply(f.source.unit()) - f.target.unit()).norm() <= tol;
}

double element_min_eigenvalue(const FdAlgebra& a, const Vector& x) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.num_blocks(); ++i) {
    const int n = a.blocks()[i];
    Matrix b(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) b(r, c) = x(a.offset(i) + r * n + c);
    best = std::min(best, hermitian_min_eigenvalue(b));
  }
  return best;
}

bool is_subunital(const SuperOp& f, double tol) {
  const Vector rest = f.target.unit() - f.apply(f.source.unit());
  // The defect must be self-adjoint as well as positive.
  for (int i = 0; i < f.target.num_blocks(); ++i) {
    const int n = f.target.blocks()[i];
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const std::int64_t o = f.target.offset(i);
        if (std::abs(rest(o + r * n + c) - std::conj(rest(o + c * n + r))) > tol) return false;
      }
  }
  return element_min_eigenvalue(f.target, rest) >= -tol;
}

double positivity_witness(const SuperOp& h, int restarts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < h.source.num_blocks(); ++i)
    for (int j = 0; j < h.target.num_blocks(); ++j) {
      const Matrix c = choi_block(h, i, j);
      const int n = h.source.blocks()[i];
      const int m = h.target.blocks()[j];
      for (int rs = 0; rs < restarts; ++rs) {
        Eigen::VectorXcd psi(m);
        for (int p = 0; p < m; ++p) psi(p) = Complex(gauss(rng), gauss(rng));
        psi.normalize();
        Eigen::VectorXcd x(n);
        double value = 0.0;
        for (int it = 0; it < 60; ++it) {
          Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
          for (int r = 0; r < n; ++r)
            for (int cc = 0; cc < n; ++cc) {
              Complex s = 0.0;
              for (int p = 0; p < m; ++p)
                for (int q = 0; q < m; ++q)
                  s += std::conj(psi(p)) * c(r * m + p, cc * m + q) * psi(q);
              k(r, cc) = s;
            }
          x = min_eigenvector(k, &value);
          Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(m, m);
          for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q) {
              Complex s = 0.0;
              for (int r = 0; r < n; ++r)
                for (int cc = 0; cc < n; ++cc)
                  s += std::conj(x(r)) * c(r * m + p, cc * m + q) * x(cc);
              l(p, q) = s;
            }
          psi = min_eigenvector(l, &value);
        }
        best = std::min(best, value);
      }
    }
  return best;
}

bool loewner_leq(const SuperOp& f, const SuperOp& g, double tol, LoewnerOrder order) {
  const SuperOp d = op_sub(g, f);
  if (order == LoewnerOrder::CompletelyPositive) return choi_min_eigenvalue(d) >= -tol;
  return positivity_witness(d) >= -tol;
}

std::vector<double> state_to_distribution(const SuperOp& f) {
  if (!f.source.is_commutative())
    throw EvalError("NonClassicalSource: the source algebra has a matrix block");
  if (f.target != FdAlgebra::scalar()) throw EvalError("NonClassicalSource: target is not C");
  std::vector<double> out(static_cast<size_t>(f.source.element_dim()));
  for (std::int64_t i = 0; i < f.source.element_dim(); ++i) out[i] = f.matrix(0, i).real();
  return out;
}

double frobenius_distance(const SuperOp& f, const SuperOp& g) {
  require_same(f.source, g.source, "frobenius_distance");
  require_same(f.target, g.target, "frobenius_distance");
  return (f.matrix - g.matrix).norm();
}

// ---------------------------------------------------------------------------

namespace {
std::int64_t initial_cap() {
  if (const char* env = std::getenv("EWIREC_MAX_DIM")) {
    try {
      const long long v = std::stoll(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 4096;
}
std::atomic<std::int64_t>& cap_ref() {
  static std::atomic<std::int64_t> cap{initial_cap()};
  return cap;
}
}  // namespace

std::int64_t max_element_dim() { return cap_ref().load(); }
void set_max_element_dim(std::int64_t cap) { cap_ref().store(cap); }

void check_dim(std::int64_t dim, const char* what) {
  if (dim > max_element_dim())
    throw ResourceError(std::string(what) + ": element dimension " + std::to_string(dim) +
                        " exceeds the cap " + std::to_string(max_element_dim()) +
                        " (set EWIREC_MAX_DIM to raise it)");
}

}  // namespace ewire
