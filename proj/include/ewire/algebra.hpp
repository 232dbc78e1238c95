#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ewire/error.hpp"

namespace ewire {

using Complex = std::complex<double>;
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

/// A finite-dimensional C*-algebra M_{n1} (+) ... (+) M_{nk}, k >= 1.
class FdAlgebra {
 public:
  FdAlgebra() : blocks_{1}, offsets_{0}, element_dim_(1) {}
  explicit FdAlgebra(std::vector<int> blocks);

  static FdAlgebra scalar() { return FdAlgebra(); }
  static FdAlgebra matrix(int n) { return FdAlgebra({n}); }
  /// C^k, the commutative algebra of a classical base of cardinality k.
  static FdAlgebra classical(int k);

  const std::vector<int>& blocks() const { return blocks_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  /// Length of the vectorized element space, sum of n_i^2.
  std::int64_t element_dim() const { return element_dim_; }
  /// Start of block i inside the element vector.
  std::int64_t offset(int i) const { return offsets_[i]; }
  bool is_commutative() const;
  /// The unit element 1 as a vector.
  Vector unit() const;

  friend bool operator==(const FdAlgebra& a, const FdAlgebra& b) { return a.blocks_ == b.blocks_; }
  friend bool operator!=(const FdAlgebra& a, const FdAlgebra& b) { return !(a == b); }

 private:
  std::vector<int> blocks_;
  std::vector<std::int64_t> offsets_;
  std::int64_t element_dim_ = 1;
};

FdAlgebra alg_tensor(const FdAlgebra& a, const FdAlgebra& b);
FdAlgebra alg_direct_sum(const FdAlgebra& a, const FdAlgebra& b);
/// n (.) A, the n-fold direct sum; n >= 1.
FdAlgebra alg_copower(int n, const FdAlgebra& a);

/// perm[ia * dim(b) + ib] is the index in vec(a (x) b) of the product of
/// element-basis vectors ia of a and ib of b.
std::vector<std::int64_t> tensor_permutation(const FdAlgebra& a, const FdAlgebra& b);

/// Linear map between algebras in the Heisenberg direction:
/// matrix is element_dim(target) x element_dim(source).
struct SuperOp {
  FdAlgebra source;
  FdAlgebra target;
  Matrix matrix;

  Vector apply(const Vector& x) const { return matrix * x; }
};

SuperOp op_identity(const FdAlgebra& a);
SuperOp op_zero(const FdAlgebra& source, const FdAlgebra& target);
/// x |-> g(f(x)); requires f.target == g.source.
SuperOp op_compose(const SuperOp& f, const SuperOp& g);
SuperOp op_tensor(const SuperOp& f, const SuperOp& g);
SuperOp op_direct_sum(const SuperOp& f, const SuperOp& g);
/// n (.) f = f (+) ... (+) f.
SuperOp op_copower(int n, const SuperOp& f);
SuperOp op_scale(const SuperOp& f, Complex s);
SuperOp op_add(const SuperOp& f, const SuperOp& g);
SuperOp op_sub(const SuperOp& f, const SuperOp& g);
/// u^dagger (-) u on M_n.
SuperOp op_unitary(const Matrix& u);

/// Isomorphism with source `a` and target the algebra whose k-th block is
/// block sigma[k] of `a`; the k-th target block receives source block sigma[k].
SuperOp op_block_permutation(const FdAlgebra& a, const std::vector<int>& sigma);
/// Symmetry a (x) b -> b (x) a, as a map with source b (x) a and target a (x) b.
SuperOp op_swap(const FdAlgebra& a, const FdAlgebra& b);

/// Block orderings of the standard isomorphisms, as arguments for
/// op_block_permutation.
/// n (.) (a (+) b) ~ (n (.) a) (+) (n (.) b): source n(.)(a(+)b).
std::vector<int> copower_sum_blocks(int n, const FdAlgebra& a, const FdAlgebra& b);
/// a (x) (n (.) b) ~ n (.) (a (x) b): source a (x) (n(.)b).
std::vector<int> tensor_copower_blocks(int n, const FdAlgebra& a, const FdAlgebra& b);

/// Block-diagonal Choi matrix: one block sum_rc E_rc (x) f_ji(E_rc) per
/// (source block i, target block j), ordered lexicographically in (i, j).
Matrix choi_matrix(const SuperOp& f);
/// Smallest eigenvalue over all Choi blocks.
double choi_min_eigenvalue(const SuperOp& f);

bool is_cp(const SuperOp& f, double tol = 1e-9);
bool is_unital(const SuperOp& f, double tol = 1e-9);
bool is_subunital(const SuperOp& f, double tol = 1e-9);
/// Minimum eigenvalue of the Hermitian part of an element, over all blocks.
double element_min_eigenvalue(const FdAlgebra& a, const Vector& x);

enum class LoewnerOrder {
  CompletelyPositive,  // g - f completely positive
  Positive,            // g - f positive (numerical search, may accept false positives)
};

bool loewner_leq(const SuperOp& f, const SuperOp& g, double tol = 1e-9,
                 LoewnerOrder order = LoewnerOrder::CompletelyPositive);
/// Best value found for min <psi| h(|phi><phi|) |psi> over unit vectors; a
/// negative value certifies that h is not positive.
double positivity_witness(const SuperOp& h, int restarts = 8, std::uint64_t seed = 7);

/// x_i = f(e_i) for a state on C^n.
std::vector<double> state_to_distribution(const SuperOp& f);

double frobenius_distance(const SuperOp& f, const SuperOp& g);

/// Rejects algebras whose element space exceeds the configured cap.
std::int64_t max_element_dim();
void set_max_element_dim(std::int64_t cap);
void check_dim(std::int64_t dim, const char* what);

}  // namespace ewire
