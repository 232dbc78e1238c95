#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "common.hpp"
#include "ewire/gates.hpp"

using namespace ewire;

namespace {

const FdAlgebra M2 = FdAlgebra::matrix(2);
const FdAlgebra C1 = FdAlgebra::scalar();
const FdAlgebra C2 = FdAlgebra::classical(2);

SuperOp from(const FdAlgebra& source, const FdAlgebra& target, const oracle::Mat& m) {
  return SuperOp{source, target, m};
}

// Random CP map M_d -> M_d in the Heisenberg direction from random Kraus
// operators, built by the oracle.
SuperOp random_cp(std::mt19937_64& rng, int d, int kraus = 2, double scale = 1.0) {
  std::normal_distribution<double> n(0, 1);
  std::vector<oracle::Mat> ks;
  for (int k = 0; k < kraus; ++k) {
    oracle::Mat m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = oracle::C(n(rng), n(rng)) * scale;
    ks.push_back(m);
  }
  oracle::Register r({oracle::Leaf{"x", false, d}});
  r.apply(ks, {"x"}, {oracle::Leaf{"x", false, d}});
  return from(FdAlgebra::matrix(d), FdAlgebra::matrix(d), r.heisenberg({"x"}));
}

Vector random_vector(std::mt19937_64& rng, std::int64_t n) {
  std::normal_distribution<double> d(0, 1);
  Vector v(n);
  for (std::int64_t i = 0; i < n; ++i) v(i) = Complex(d(rng), d(rng));
  return v;
}

// Block k of an element vector as a matrix.
Matrix block_of(const FdAlgebra& a, const Vector& x, int k) {
  const int n = a.blocks()[k];
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = x(a.offset(k) + r * n + c);
  return m;
}

std::vector<SuperOp> all_gates() {
  std::vector<SuperOp> gs;
  for (const char* g : {"H", "X", "Y", "Z", "S", "T", "SWAP", "CNOT", "CZ", "meas", "new", "init0", "init1",
                        "discard", "bit-control X", "bit-control H", "control Z", "control H"})
    gs.push_back(gate_denotation(g, std::nullopt));
  for (int k = 0; k <= 4; ++k) {
    gs.push_back(gate_denotation("R", k));
    gs.push_back(gate_denotation("CR", k));
  }
  return gs;
}

}  // namespace

TEST_CASE("tensor of algebras") {
  CHECK(alg_tensor(M2, M2).blocks() == std::vector<int>{4});
  CHECK(alg_tensor(C2, M2).blocks() == std::vector<int>{2, 2});
  CHECK(alg_tensor(C1, alg_direct_sum(M2, C2)) == alg_direct_sum(M2, C2));
  CHECK(alg_tensor(alg_direct_sum(M2, C1), C2).blocks() == std::vector<int>{2, 2, 1, 1});
}

TEST_CASE("copowers and direct sums") {
  CHECK(alg_copower(2, C1).blocks() == std::vector<int>{1, 1});
  CHECK(alg_copower(2, alg_direct_sum(M2, C1)).blocks() == std::vector<int>{2, 1, 2, 1});
  CHECK(alg_copower(3, alg_copower(2, M2)) == alg_copower(6, M2));
  CHECK_THROWS_AS(alg_copower(0, M2), EvalError);
  CHECK_THROWS_AS(FdAlgebra::classical(0), EvalError);
}

TEST_CASE("copower distributes over direct sums as a literal block permutation") {
  std::mt19937_64 rng(1);
  const FdAlgebra a = alg_direct_sum(M2, C1), b = FdAlgebra::matrix(3);
  for (int n : {1, 2, 3}) {
    const FdAlgebra src = alg_copower(n, alg_direct_sum(a, b));
    const FdAlgebra tgt = alg_direct_sum(alg_copower(n, a), alg_copower(n, b));
    SuperOp p = op_block_permutation(src, copower_sum_blocks(n, a, b));
    CHECK(p.target == tgt);
    // Block j of the copy i of a lands at position i of the first summand.
    const Vector x = random_vector(rng, src.element_dim());
    const Vector y = p.apply(x);
    const int ka = a.num_blocks(), kb = b.num_blocks();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < ka; ++j)
        CHECK((block_of(src, x, i * (ka + kb) + j) - block_of(tgt, y, i * ka + j)).norm() == 0.0);
      for (int j = 0; j < kb; ++j)
        CHECK((block_of(src, x, i * (ka + kb) + ka + j) - block_of(tgt, y, n * ka + i * kb + j)).norm() == 0.0);
    }
  }
}

TEST_CASE("tensor preserves copowers, naturally in both arguments") {
  std::mt19937_64 rng(2);
  const int n = 3;
  SuperOp f = random_cp(rng, 2), g = random_cp(rng, 2);
  const SuperOp p_src = op_block_permutation(alg_tensor(M2, alg_copower(n, M2)), tensor_copower_blocks(n, M2, M2));
  const SuperOp p_tgt = p_src;
  CHECK(p_src.target == alg_copower(n, alg_tensor(M2, M2)));
  SuperOp lhs = op_compose(op_tensor(f, op_copower(n, g)), p_tgt);
  SuperOp rhs = op_compose(p_src, op_copower(n, op_tensor(f, g)));
  CHECK(frobenius_distance(lhs, rhs) < 1e-12);

  const FdAlgebra mixed = alg_direct_sum(M2, C1);
  SuperOp q = op_block_permutation(alg_tensor(mixed, alg_copower(2, C2)), tensor_copower_blocks(2, mixed, C2));
  CHECK(q.target == alg_copower(2, alg_tensor(mixed, C2)));
  CHECK(is_cp(q));
  CHECK(is_unital(q));
}

TEST_CASE("composition") {
  std::mt19937_64 rng(3);
  SuperOp f = random_cp(rng, 2);
  CHECK(frobenius_distance(op_compose(op_identity(M2), f), f) == 0.0);
  CHECK(frobenius_distance(op_compose(f, op_identity(M2)), f) == 0.0);

  SuperOp meas = gate_denotation("meas", std::nullopt), fresh = gate_denotation("new", std::nullopt);
  // Preparing from a bit and measuring again gives the bit back.
  SuperOp round = op_compose(meas, fresh);
  CHECK(round.source == C2);
  CHECK(frobenius_distance(round, op_identity(C2)) < 1e-15);

  SuperOp h = gate_denotation("H", std::nullopt);
  CHECK(frobenius_distance(op_compose(h, h), op_identity(M2)) < 1e-12);

  CHECK_THROWS_AS(op_compose(meas, meas), EvalError);
}

TEST_CASE("tensor of maps") {
  CHECK(frobenius_distance(op_tensor(op_identity(M2), op_identity(M2)), op_identity(FdAlgebra::matrix(4))) == 0.0);

  // (H (x) id) against the two-qubit Kraus oracle.
  oracle::Register r({{"a", false, 2}, {"b", false, 2}});
  r.unitary(oracle::hadamard(), {"a"});
  SuperOp hi = op_tensor(gate_denotation("H", std::nullopt), op_identity(M2));
  CHECK(testing::diff(hi.matrix, r.heisenberg({"a", "b"})) < 1e-12);

  // Interchange law on random maps.
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    SuperOp f = random_cp(rng, 2), f2 = random_cp(rng, 2), g = random_cp(rng, 2), g2 = random_cp(rng, 2);
    SuperOp lhs = op_compose(op_tensor(f, g), op_tensor(f2, g2));
    SuperOp rhs = op_tensor(op_compose(f, f2), op_compose(g, g2));
    CHECK(frobenius_distance(lhs, rhs) < 1e-10 * (1 + lhs.matrix.norm()));
  }
}

TEST_CASE("tensor of maps on mixed classical and quantum blocks") {
  // bit (x) qubit: meas (x) H against the oracle.
  oracle::Register r({{"a", false, 2}, {"b", false, 2}});
  r.measure("a", "a");
  r.unitary(oracle::hadamard(), {"b"});
  SuperOp m = op_tensor(gate_denotation("meas", std::nullopt), gate_denotation("H", std::nullopt));
  CHECK(m.source == alg_tensor(C2, M2));
  CHECK(testing::diff(m.matrix, r.heisenberg({"a", "b"})) < 1e-12);
}

TEST_CASE("gate denotations") {
  SuperOp meas = gate_denotation("meas", std::nullopt);
  CHECK(meas.source == C2);
  CHECK(meas.target == M2);
  Vector ab(2);
  ab << 3.0, 5.0;
  Vector want(4);
  want << 3.0, 0.0, 0.0, 5.0;
  CHECK((meas.apply(ab) - want).norm() == 0.0);

  SuperOp h = gate_denotation("H", std::nullopt);
  CHECK(testing::diff(h.matrix, oracle::unitary_channel(oracle::hadamard())) < 1e-12);

  SuperOp fresh = gate_denotation("new", std::nullopt);
  Vector abcd(4);
  abcd << 1.0, 2.0, 3.0, 4.0;
  Vector ad(2);
  ad << 1.0, 4.0;
  CHECK((fresh.apply(abcd) - ad).norm() == 0.0);

  for (const char* u : {"X", "Y", "Z", "S", "T", "CNOT", "CZ", "SWAP"})
    CHECK(testing::diff(gate_denotation(u, std::nullopt).matrix, oracle::unitary_channel(oracle::unitary(u))) < 1e-12);
  for (int k = 0; k <= 3; ++k) {
    CHECK(testing::diff(gate_denotation("R", k).matrix, oracle::unitary_channel(oracle::unitary("R", k))) < 1e-12);
    CHECK(testing::diff(gate_denotation("CR", k).matrix, oracle::unitary_channel(oracle::unitary("CR", k))) < 1e-12);
  }
  CHECK_THROWS_AS(gate_denotation("FOO", std::nullopt), EvalError);
  CHECK_THROWS(gate_denotation("CR", -1));
}

TEST_CASE("every built-in gate is completely positive and unital") {
  for (const SuperOp& g : all_gates()) {
    CHECK(is_cp(g, 1e-9));
    CHECK(is_unital(g, 1e-9));
  }
}

TEST_CASE("Choi matrices") {
  Matrix id = choi_matrix(op_identity(M2));
  Eigen::SelfAdjointEigenSolver<Matrix> es(id);
  auto ev = es.eigenvalues();
  CHECK(ev(3) == doctest::Approx(2.0));
  CHECK(std::abs(ev(0)) < 1e-12);
  CHECK(std::abs(ev(1)) < 1e-12);
  CHECK(std::abs(ev(2)) < 1e-12);

  Eigen::SelfAdjointEigenSolver<Matrix> hs(choi_matrix(gate_denotation("H", std::nullopt)));
  int rank = 0;
  for (Eigen::Index i = 0; i < hs.eigenvalues().size(); ++i) {
    CHECK(hs.eigenvalues()(i) > -1e-12);
    rank += hs.eigenvalues()(i) > 1e-9;
  }
  CHECK(rank == 1);

  CHECK(choi_matrix(op_zero(M2, M2)).norm() == 0.0);
}

TEST_CASE("positivity predicates") {
  SuperOp zero = op_zero(M2, M2);
  CHECK(is_cp(zero));
  CHECK(is_subunital(zero));
  CHECK_FALSE(is_unital(zero));

  // Transpose on M_2.
  Matrix t = Matrix::Zero(4, 4);
  t(0, 0) = t(1, 2) = t(2, 1) = t(3, 3) = 1.0;
  SuperOp transpose{M2, M2, t};
  CHECK_FALSE(is_cp(transpose));
  CHECK(choi_min_eigenvalue(transpose) == doctest::Approx(-1.0));
  CHECK(is_unital(transpose));

  CHECK_FALSE(is_subunital(op_scale(op_identity(M2), 2.0)));
  CHECK(is_subunital(op_scale(op_identity(M2), 0.5)));
}

TEST_CASE("Loewner order") {
  std::mt19937_64 rng(5);
  SuperOp h = gate_denotation("H", std::nullopt);
  CHECK(loewner_leq(op_zero(M2, M2), h));
  CHECK(loewner_leq(h, h));
  CHECK(loewner_leq(op_scale(h, 0.5), h));
  CHECK_FALSE(loewner_leq(h, op_scale(h, 0.5)));

  for (int t = 0; t < 20; ++t) {
    SuperOp f = random_cp(rng, 2);
    SuperOp g = op_add(f, random_cp(rng, 2, 1, 0.5));
    SuperOp k = op_add(g, random_cp(rng, 2, 1, 0.5));
    CHECK(loewner_leq(f, g));
    CHECK(loewner_leq(g, k));
    CHECK(loewner_leq(f, k));
    CHECK_FALSE(loewner_leq(g, f));  // antisymmetry for f != g
  }

  // The transpose map is positive but not completely positive.
  Matrix t = Matrix::Zero(4, 4);
  t(0, 0) = t(1, 2) = t(2, 1) = t(3, 3) = 1.0;
  SuperOp transpose{M2, M2, t};
  CHECK_FALSE(loewner_leq(op_zero(M2, M2), transpose));
  CHECK(loewner_leq(op_zero(M2, M2), transpose, 1e-9, LoewnerOrder::Positive));
  CHECK(positivity_witness(op_scale(op_identity(M2), -1.0)) < 0);
}

TEST_CASE("states on C^n as distributions") {
  Matrix u(1, 3);
  u << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  auto d = state_to_distribution(SuperOp{FdAlgebra::classical(3), C1, u});
  REQUIRE(d.size() == 3);
  for (double x : d) CHECK(x == doctest::Approx(1.0 / 3));

  // init0; H; meas as a composite of gate maps.
  SuperOp flip = op_compose(op_compose(gate_denotation("meas", std::nullopt), gate_denotation("H", std::nullopt)),
                            gate_denotation("init0", std::nullopt));
  auto fd = state_to_distribution(flip);
  CHECK(std::abs(fd[0] - 0.5) < 1e-12);
  CHECK(std::abs(fd[1] - 0.5) < 1e-12);
  CHECK(std::abs(fd[0] + fd[1] - 1.0) < 1e-12);

  auto z = state_to_distribution(op_zero(C2, C1));
  CHECK(z[0] + z[1] == 0.0);
  CHECK_THROWS_AS(state_to_distribution(op_zero(M2, C1)), EvalError);
}

TEST_CASE("dimension cap") {
  const auto saved = max_element_dim();
  set_max_element_dim(16);
  CHECK_NOTHROW(denote_wire(WireType::tensor(WireType::qubit(), WireType::qubit())));
  CHECK_THROWS_AS(denote_wire(WireType::qlist_of_length(3)), ResourceError);
  set_max_element_dim(saved);
  CHECK_NOTHROW(denote_wire(WireType::qlist_of_length(3)));
}
