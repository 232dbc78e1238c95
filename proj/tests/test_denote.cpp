#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "common.hpp"
#include "gen.hpp"
#include "interp.hpp"

using namespace ewire;

namespace {

double prob(const Distribution& d, const std::string& v) {
  double p = 0;
  for (const auto& [x, w] : d.outcomes)
    if (format_value(x) == v) p += w;
  return p;
}

Distribution run(const std::string& text, const std::string& entry, EvalOptions o = {}) {
  return run_entry(testing::check_text(text), entry, o);
}

}  // namespace

TEST_CASE("wire types denote algebras") {
  CHECK(denote_wire(WireType::unit()) == FdAlgebra::scalar());
  CHECK(denote_wire(WireType::qubit()) == FdAlgebra::matrix(2));
  CHECK(denote_wire(WireType::bit()) == FdAlgebra::classical(2));
  CHECK(denote_wire(WireType::tensor(WireType::qubit(), WireType::qubit())) == FdAlgebra::matrix(4));
  CHECK(denote_wire(WireType::tensor(WireType::bit(), WireType::qubit())).blocks() == std::vector<int>{2, 2});
}

TEST_CASE("flip is a fair coin") {
  Typechecker tc = testing::check_file("programs/flip.ew");
  SuperOp f = testing::denote(tc, "flip");
  oracle::Register r({});
  r.init("a", 0);
  r.unitary(oracle::hadamard(), {"a"});
  r.measure("a", "b");
  CHECK(testing::diff(f.matrix, r.heisenberg({"b"})) < 1e-12);

  Distribution d = run_entry(tc, "coin", {});
  CHECK(std::abs(prob(d, "0") - 0.5) < 1e-12);
  CHECK(std::abs(prob(d, "1") - 0.5) < 1e-12);
  CHECK(d.diverge_mass() < 1e-12);
}

TEST_CASE("classical control matches the oracle") {
  Typechecker tc = testing::check_file("programs/classical_control.ew");
  SuperOp c = testing::denote(tc, "cc");
  oracle::Register r({{"a", false, 2}, {"b", false, 2}});
  r.measure("a", "x");
  r.bit_control("x", "b", oracle::pauli_x());
  r.discard("x");
  CHECK(testing::diff(c.matrix, r.heisenberg({"b"})) < 1e-12);
  CHECK(is_cp(c));
  CHECK(is_unital(c));
}

TEST_CASE("random closed circuits agree with the Kraus oracle") {
  Typechecker tc = testing::check_text(gen::kPrelude);
  gen::CircuitGen g(7, {3, 10, false});
  for (int i = 0; i < 120; ++i) {
    gen::Generated x = g.next();
    INFO(pretty_print(x.term));
    CheckedCircuit cc = tc.check_circuit({}, x.omega, x.term);
    Evaluator ev(tc.elaborated());
    SuperOp s = ev.denote_circuit(x.omega, cc.term, nullptr);
    oracle::Mat want = interp::Interp().heisenberg(x.omega, x.term);
    CHECK(testing::diff(s.matrix, want) < 1e-9);
    CHECK(is_cp(s, 1e-9));
    CHECK(is_unital(s, 1e-9));
  }
}

TEST_CASE("random circuits with divergence are subunital in CPSU") {
  Typechecker tc = testing::check_text(gen::kPrelude);
  gen::CircuitGen g(8, {3, 10, true});
  int strict = 0;
  for (int i = 0; i < 80; ++i) {
    gen::Generated x = g.next();
    INFO(pretty_print(x.term));
    CheckedCircuit cc = tc.check_circuit({}, x.omega, x.term);
    Evaluator ev(tc.elaborated(), testing::cpsu(200));
    SuperOp s = ev.denote_circuit(x.omega, cc.term, nullptr);
    CHECK(testing::diff(s.matrix, interp::Interp().heisenberg(x.omega, x.term)) < 1e-9);
    CHECK(is_cp(s, 1e-9));
    CHECK(is_subunital(s, 1e-9));
    strict += !is_unital(s, 1e-9);
  }
  CHECK(strict > 0);
}

TEST_CASE("Hs n is n Hadamards") {
  Typechecker tc = testing::check_file("programs/hs.ew");
  const EvalOptions o = testing::cpsu();
  CHECK(testing::diff(testing::denote(tc, "hs2", o).matrix, oracle::Mat::Identity(4, 4)) < 1e-12);
  CHECK(testing::diff(testing::denote(tc, "hs3", o).matrix, oracle::unitary_channel(oracle::hadamard())) < 1e-12);
  CHECK(frobenius_distance(testing::denote(tc, "hs3", o), testing::denote(tc, "h")) < 1e-12);

  // Recursion is only available in the subunital model.
  CHECK_THROWS_AS(testing::denote(tc, "hs3"), EvalError);
  // A negative count never reaches the base case.
  SuperOp bottom = testing::denote(tc, "hsneg", testing::cpsu(500));
  CHECK(bottom.matrix.norm() == 0.0);

  Distribution d = run_entry(tc, "stuck", testing::cpsu(500));
  CHECK(std::abs(d.diverge_mass() - 1.0) < 1e-12);
  Distribution c2 = run_entry(tc, "coin2", testing::cpsu(500));
  CHECK(std::abs(prob(c2, "0") - 1.0) < 1e-12);
}

TEST_CASE("more fuel only adds output weight") {
  Typechecker tc = testing::check_file("programs/hs.ew");
  SuperOp prev = op_zero(FdAlgebra::matrix(2), FdAlgebra::matrix(2));
  for (int fuel : {0, 1, 2, 3, 4, 8}) {
    SuperOp s = testing::denote(tc, "hs3", testing::cpsu(fuel));
    INFO(fuel);
    CHECK(loewner_leq(prev, s));
    CHECK(is_subunital(s));
    prev = s;
  }
  CHECK(is_unital(prev));
}

TEST_CASE("Fourier transform over qubit lists") {
  Typechecker tc = testing::check_file("programs/qft.ew");
  for (int n = 0; n <= 3; ++n) {
    INFO(n);
    SuperOp f = testing::denote(tc, "fourier", testing::cpsu(), n);
    const oracle::Mat u = oracle::dft(n) * oracle::reversal(n);
    CHECK(testing::diff(f.matrix, oracle::unitary_channel(u)) < 1e-9);
  }
}

TEST_CASE("lift then init is the identity on bits") {
  const char* text = R"(
def li : Circ(bit, bit) = box b => x <= lift b; init x
def li2 : Circ(bit * bit, bit * bit) = box p => x <= lift p; init x
)";
  Typechecker tc = testing::check_text(text);
  CHECK(frobenius_distance(testing::denote(tc, "li"), op_identity(FdAlgebra::classical(2))) < 1e-12);
  CHECK(frobenius_distance(testing::denote(tc, "li2"), op_identity(FdAlgebra::classical(4))) < 1e-12);
}

TEST_CASE("measure then prepare then measure equals measure") {
  Typechecker tc = testing::check_file("programs/dynamic.ew");
  CHECK(frobenius_distance(testing::denote(tc, "roundtrip"), testing::denote(tc, "measonly")) < 1e-12);
  Distribution d = run_entry(tc, "flipthen", {});
  CHECK(std::abs(prob(d, "0") - 0.5) < 1e-12);
  CHECK(std::abs(prob(d, "1") - 0.5) < 1e-12);
}

TEST_CASE("composition of boxed circuits") {
  Typechecker tc = testing::check_file("programs/comp.ew");
  CHECK(testing::diff(testing::denote(tc, "hxh").matrix, oracle::unitary_channel(oracle::pauli_z())) < 1e-12);
  CHECK(testing::diff(testing::denote(tc, "hx").matrix,
                      oracle::unitary_channel(oracle::pauli_x() * oracle::hadamard())) < 1e-12);
}

TEST_CASE("host monad laws on distributions") {
  const char* text = R"(
circuit flip : bit = a <- gate init0 (); a' <- gate H a; b <- gate meas a'; output b
def m : T(bit) = run flip
def f : bit -> T(bit * bit) = lambda x. let y <- run flip in return (x, y)
def left : T(bit * bit) = let x <- return bit#1 in f x
def left' : T(bit * bit) = f bit#1
def right : T(bit) = let x <- m in return x
def assoc1 : T(bit * bit) = let y <- (let x <- m in f x) in return y
def assoc2 : T(bit * bit) = let x <- m in (let y <- f x in return y)
)";
  auto same = [&](const std::string& a, const std::string& b) {
    Distribution da = run(text, a), db = run(text, b);
    for (const auto& [x, w] : da.outcomes) CHECK(std::abs(w - prob(db, format_value(x))) < 1e-12);
    for (const auto& [x, w] : db.outcomes) CHECK(std::abs(w - prob(da, format_value(x))) < 1e-12);
  };
  same("left", "left'");
  same("right", "m");
  same("assoc1", "assoc2");
}

TEST_CASE("classical values enumerate in block order") {
  const WireType bb = WireType::tensor(WireType::bit(), WireType::bit());
  auto vs = enumerate_classical(bb);
  REQUIRE(vs.size() == 4);
  CHECK(format_value(vs[0]) == "(0, 0)");
  CHECK(format_value(vs[1]) == "(0, 1)");
  CHECK(format_value(vs[2]) == "(1, 0)");
  for (std::int64_t i = 0; i < 4; ++i) CHECK(encode_classical(bb, decode_classical(bb, i)) == i);
  CHECK(enumerate_classical(WireType::unit()).size() == 1);
}

TEST_CASE("sampling") {
  Typechecker tc = testing::check_file("programs/flip.ew");
  Distribution d = run_entry(tc, "coin", {});
  auto counts = sample(d, 42, 10000);
  std::int64_t zeros = 0, total = 0;
  for (const auto& [k, n] : counts) {
    total += n;
    if (k == "0") zeros = n;
  }
  CHECK(total == 10000);
  // Within three standard deviations of 5000.
  CHECK(std::abs(zeros - 5000) < 150);
  CHECK(sample(d, 42, 10000) == counts);

  Distribution none;
  auto bottom = sample(none, 1, 10);
  REQUIRE(bottom.size() == 1);
  CHECK(bottom[0].first == "⊥");
  CHECK(bottom[0].second == 10);
}
