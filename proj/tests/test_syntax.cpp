#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "common.hpp"
#include "gen.hpp"

using namespace ewire;

TEST_CASE("output w parses to a single Output node") {
  CircuitTerm c = parse_circuit("output w");
  REQUIRE(c->kind == CircuitKind::Output);
  CHECK(c->pat == Pattern::wire("w"));
}

TEST_CASE("flip parses to the four-constructor spine") {
  CircuitTerm c = parse_circuit("a <- gate init0 (); a' <- gate H a; b <- gate meas a'; output b");
  REQUIRE(c->kind == CircuitKind::Gate);
  CHECK(c->gate.name == "init0");
  CHECK(c->pat == Pattern::wire("a"));
  CHECK(c->pat_in == Pattern::unit());
  const CircuitTerm& h = c->rest;
  REQUIRE(h->kind == CircuitKind::Gate);
  CHECK(h->gate.name == "H");
  const CircuitTerm& m = h->rest;
  REQUIRE(m->kind == CircuitKind::Gate);
  CHECK(m->gate.name == "meas");
  CHECK(m->rest->kind == CircuitKind::Output);
}

TEST_CASE("box over a pair pattern") {
  Program ctx = parse_program("circuit C (a : qubit, b : qubit) : qubit = x <- gate meas a; (x, y) <- gate bit-control X (x, b); () <- gate discard x; output y");
  HostTerm t = parse_host_term("box (a, b) => C (a, b)", &ctx);
  REQUIRE(t->kind == HostKind::Box);
  CHECK(t->pat == Pattern::pair(Pattern::wire("a"), Pattern::wire("b")));
  CHECK(t->circ->kind == CircuitKind::Call);
}

TEST_CASE("pretty printing of small nodes") {
  CHECK(pretty_print(make::output(Pattern::wire("w"))) == "output w");
  CHECK(pretty_print(Pattern::pair(Pattern::unit(), Pattern::wire("w"))) == "((), w)");
  CHECK(pretty_print(WireType::tensor(WireType::bit(), WireType::qubit())) == "bit * qubit");
}

TEST_CASE("printing re-parses to an alpha-equivalent term") {
  const std::string flip = "a <- gate init0 (); a' <- gate H a; b <- gate meas a'; output b";
  CircuitTerm c = parse_circuit(flip);
  CHECK(alpha_equal(parse_circuit(pretty_print(c)), c));

  gen::CircuitGen g(1234, {});
  for (int i = 0; i < 200; ++i) {
    gen::Generated x = g.next();
    const std::string text = pretty_print(x.term);
    CircuitTerm back = parse_circuit(text);
    INFO(text);
    CHECK(alpha_equal(back, x.term));
  }
}

TEST_CASE("whole programs round trip") {
  for (const char* f : {"programs/flip.ew", "programs/hs.ew", "programs/qft.ew", "programs/comp.ew",
                        "programs/classical_control.ew", "programs/dynamic.ew"}) {
    Program p = parse_program(testing::read_text(testing::source_path(f)));
    Program q = parse_program(pretty_print(p));
    INFO(f);
    CHECK(alpha_equal(p, q));
  }
}

TEST_CASE("lift_type") {
  CHECK(lift_type(WireType::unit()) == HostType::unit());
  CHECK(lift_type(WireType::tensor(WireType::bit(), WireType::bit())) ==
        HostType::product(HostType::bit(), HostType::bit()));
  try {
    lift_type(WireType::qubit());
    FAIL("qubit lifted");
  } catch (const TypeError& e) {
    CHECK(e.kind == TypeErrorKind::NotClassical);
  }
}

TEST_CASE("classicalize") {
  CHECK(classicalize(WireType::qubit()) == WireType::bit());
  CHECK(classicalize(WireType::unit()) == WireType::unit());
  const WireType qb = WireType::tensor(WireType::qubit(), WireType::bit());
  CHECK(classicalize(qb) == WireType::tensor(WireType::bit(), WireType::bit()));
  for (const WireType& w : {qb, WireType::qubit(), WireType::tensor(WireType::unit(), qb)}) {
    const WireType c = classicalize(w);
    CHECK(c.is_classical());
    CHECK(classicalize(c) == c);
    CHECK_NOTHROW(lift_type(c));
  }
}

TEST_CASE("pattern substitution") {
  CHECK(alpha_equal(subst_pattern(parse_circuit("output w"), Pattern::wire("w"), Pattern::wire("v")),
                    parse_circuit("output v")));
  CircuitTerm c = parse_circuit("x <- gate H a; y <- gate X b; output (x, y)");
  CircuitTerm s = subst_pattern(c, parse_pattern("(a, b)"), parse_pattern("(p1, p2)"));
  CHECK(alpha_equal(s, parse_circuit("x <- gate H p1; y <- gate X p2; output (x, y)")));

  // A binder equal to a substituted-in name is renamed.
  CircuitTerm cap = parse_circuit("v <- gate H w; output v");
  CircuitTerm r = subst_pattern(cap, Pattern::wire("w"), Pattern::wire("v"));
  CHECK(alpha_equal(r, parse_circuit("u <- gate H v; output u")));

  // Host terms under a lift binder keep the bound variable.
  CircuitTerm lifted = parse_circuit("x <= lift b; y <- init x; output (y, w)");
  CircuitTerm l2 = subst_pattern(lifted, Pattern::wire("w"), Pattern::wire("z"));
  CHECK(alpha_equal(l2, parse_circuit("x <= lift b; y <- init x; output (y, z)")));

  CHECK_THROWS_AS(subst_pattern(c, parse_pattern("(a, b)"), parse_pattern("r")), TypeError);
}

TEST_CASE("parse errors carry a position and expected tokens") {
  try {
    parse_program("circuit c : qubit = output");
    FAIL("accepted");
  } catch (const ParseError& e) {
    CHECK(e.span.line == 1);
    CHECK_FALSE(e.expected.empty());
  }
  CHECK_THROWS_AS(parse_program("classical int 0"), ParseError);
  CHECK_THROWS_AS(parse_program("def x = bit#2"), ParseError);
}
