#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "common.hpp"
#include "gen.hpp"
#include "interp.hpp"

using namespace ewire;

namespace {

const Rule kCore[] = {Rule::UnboxBox,    Rule::OutputSubst, Rule::GateCommute, Rule::LiftCommute, Rule::UnitEta,
                      Rule::PairEta,     Rule::UnitCommute, Rule::PairCommute, Rule::Inline,      Rule::Beta,
                      Rule::Proj};

WireContext qubits(std::initializer_list<const char*> names) {
  WireContext o;
  for (const char* n : names) o.emplace_back(n, WireType::qubit());
  return o;
}

bool is_normal(const CircuitTerm& c, const Program* p) {
  for (Rule r : kCore)
    if (apply_rule(r, c, p)) return false;
  return true;
}

// Gate names along the spine of a normal form.
std::vector<std::string> spine(CircuitTerm c) {
  std::vector<std::string> out;
  while (c->kind == CircuitKind::Gate) {
    out.push_back(c->gate.display());
    c = c->rest;
  }
  return out;
}

}  // namespace

TEST_CASE("unbox of a literal box substitutes the argument") {
  CircuitTerm c = parse_circuit("unbox (box a => b <- gate H a; output b) q");
  auto r = apply_rule(Rule::UnboxBox, c);
  REQUIRE(r);
  CHECK(alpha_equal(*r, parse_circuit("b <- gate H q; output b")));
  CHECK_FALSE(apply_rule(Rule::UnboxBox, *r));
}

TEST_CASE("output substitution and gate commutation") {
  auto r = apply_rule(Rule::OutputSubst, parse_circuit("p <- output q; r <- gate X p; output r"));
  REQUIRE(r);
  CHECK(alpha_equal(*r, parse_circuit("r <- gate X q; output r")));

  auto g = apply_rule(Rule::GateCommute, parse_circuit("p <- (a <- gate H q; output a); output p"));
  REQUIRE(g);
  CHECK(alpha_equal(*g, parse_circuit("a <- gate H q; p <- output a; output p")));
}

TEST_CASE("unit and pair eliminations commute out of compositions") {
  auto u = apply_rule(Rule::UnitCommute, parse_circuit("p <- (() <- v; output q); output p"));
  REQUIRE(u);
  CHECK(alpha_equal(*u, parse_circuit("() <- v; p <- output q; output p")));

  auto p = apply_rule(Rule::PairCommute, parse_circuit("r <- ((a, b) <- w; output (b, a)); output r"));
  REQUIRE(p);
  CHECK(alpha_equal(*p, parse_circuit("(a, b) <- w; r <- output (b, a); output r")));
}

TEST_CASE("lift then init collapses only with the copower rules") {
  CircuitTerm c = parse_circuit("x <= lift b; init x");
  auto r = apply_rule(Rule::LiftInit, c);
  REQUIRE(r);
  CHECK(alpha_equal(*r, parse_circuit("output b")));

  NormalizeResult off = normalize(c);
  CHECK(alpha_equal(off.term, c));
  NormalizeOptions on;
  on.copower_rules = true;
  CHECK(alpha_equal(normalize(c, on).term, parse_circuit("output b")));
}

TEST_CASE("a composed circuit normalizes to a gate spine") {
  Typechecker tc = testing::check_file("programs/comp.ew");
  EntryNormalization n = normalize_entry(tc, "hxh", {});
  CHECK_FALSE(n.step_limit);
  CHECK_FALSE(n.trace.empty());
  HostTerm t = parse_host_term(n.text);
  REQUIRE(t->kind == HostKind::Box);
  CHECK(spine(t->circ) == std::vector<std::string>{"H", "X", "H"});
  CHECK(is_normal(t->circ, &tc.elaborated()));
}

TEST_CASE("normalization preserves the denotation of random circuits") {
  Typechecker tc = testing::check_text(gen::kPrelude);
  const Program& prog = tc.elaborated();
  for (Mode mode : {Mode::CPU, Mode::CPSU}) {
    gen::CircuitGen g(mode == Mode::CPU ? 11 : 12, {3, 10, mode == Mode::CPSU});
    EvalOptions o;
    o.mode = mode;
    o.fuel = 200;
    for (int i = 0; i < 100; ++i) {
      gen::Generated x = g.next();
      INFO(pretty_print(x.term));
      CheckedCircuit before = tc.check_circuit({}, x.omega, x.term);
      NormalizeResult n = normalize(before.term, {}, &prog);
      CHECK_FALSE(n.step_limit);
      CHECK(is_normal(n.term, &prog));
      // Subject reduction.
      CheckedCircuit after = tc.check_circuit({}, x.omega, n.term);
      CHECK(after.type == before.type);
      EquivResult e = check_equiv(before.term, n.term, x.omega, prog, nullptr, 1e-9, o);
      CHECK(e.equal);
      // And against the oracle.
      Evaluator ev(prog, o);
      CHECK(testing::diff(ev.denote_circuit(x.omega, after.term, nullptr).matrix,
                          interp::Interp().heisenberg(x.omega, x.term)) < 1e-9);
    }
  }
}

TEST_CASE("every single rule step is sound, including the copower rules") {
  Typechecker tc = testing::check_text(gen::kPrelude);
  const Program& prog = tc.elaborated();
  gen::CircuitGen g(13, {3, 8, false});
  int fired = 0;
  for (int i = 0; i < 100; ++i) {
    gen::Generated x = g.next();
    CircuitTerm c = tc.check_circuit({}, x.omega, x.term).term;
    for (Rule r : {Rule::UnboxBox, Rule::OutputSubst, Rule::GateCommute, Rule::LiftCommute, Rule::UnitEta,
                   Rule::PairEta, Rule::UnitCommute, Rule::PairCommute, Rule::LiftInit, Rule::InitLift}) {
      auto s = apply_rule(r, c, &prog);
      if (!s) continue;
      ++fired;
      INFO(to_string(r), ": ", pretty_print(c));
      CHECK(check_equiv(c, *s, x.omega, prog).equal);
    }
  }
  CHECK(fired > 100);
}

TEST_CASE("circuit equivalences") {
  Typechecker tc = testing::check_text("");
  const WireContext q = qubits({"q"});
  auto equiv = [&](const char* a, const char* b) {
    return check_equiv(tc.check_circuit({}, q, parse_circuit(a)).term, tc.check_circuit({}, q, parse_circuit(b)).term,
                       q, tc.elaborated());
  };
  CHECK(equiv("a <- gate H q; b <- gate H a; output b", "output q").equal);
  CHECK(equiv("b <- gate meas q; n <- gate new b; c <- gate meas n; output c", "b <- gate meas q; output b").equal);
  EquivResult hx = equiv("a <- gate H q; output a", "a <- gate X q; output a");
  CHECK_FALSE(hx.equal);
  CHECK(hx.distance > 0.1);
  EquivResult types = equiv("a <- gate meas q; output a", "output q");
  CHECK_FALSE(types.equal);
  CHECK(std::isinf(types.distance));
}

TEST_CASE("step limit is reported") {
  CircuitTerm c = parse_circuit("p <- output q; r <- output p; s <- output r; output s");
  NormalizeOptions o;
  o.max_steps = 1;
  NormalizeResult n = normalize(c, o);
  CHECK(n.step_limit);
  CHECK(n.trace.size() == 1);
  CHECK(alpha_equal(normalize(c).term, parse_circuit("output q")));
}
