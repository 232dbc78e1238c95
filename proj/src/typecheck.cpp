#include "ewire/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "ewire/gates.hpp"

namespace ewire {

namespace {

[[noreturn]] void fail(TypeErrorKind kind, Span span, const std::string& msg) {
  throw TypeError(kind, span, msg);
}

// Pattern p against type w; binds each wire to its component.
void destructure(const Pattern& p, const WireType& w, Span span,
                 std::vector<std::pair<std::string, WireType>>* out) {
  switch (p.kind()) {
    case Pattern::Kind::Wire: out->emplace_back(p.name(), w); return;
    case Pattern::Kind::Unit:
      if (!w.is_unit())
        fail(TypeErrorKind::PatternShape, span,
             "pattern () does not match wire type " + pretty_print(w));
      return;
    case Pattern::Kind::Pair:
      if (!w.is_tensor())
        fail(TypeErrorKind::PatternShape, span,
             "pattern " + pretty_print(p) + " does not match wire type " + pretty_print(w));
      destructure(p.first(), w.left(), span, out);
      destructure(p.second(), w.right(), span, out);
      return;
  }
}

Pattern params_pattern(const WireContext& params) {
  if (params.empty()) return Pattern::unit();
  Pattern p = Pattern::wire(params.back().first);
  for (size_t i = params.size() - 1; i-- > 0;) p = Pattern::pair(Pattern::wire(params[i].first), p);
  return p;
}

WireType params_type(const WireContext& params) {
  if (params.empty()) return WireType::unit();
  WireType w = params.back().second;
  for (size_t i = params.size() - 1; i-- > 0;) w = WireType::tensor(params[i].second, w);
  return w;
}

HostType fix_type(const HostType& a, const WireType& w1, const WireType& w2) {
  HostType f = HostType::arrow(a, HostType::circ(w1, w2));
  return HostType::arrow(HostType::arrow(f, f), f);
}

HostType family_type(const std::string& name) {
  const WireType q = WireType::qubit();
  const WireType w = name == "CR" ? WireType::tensor(q, q) : q;
  return HostType::circ(w, w);
}

// meas_W / new_W by induction on W; the leaf gate maps qubit to bit or back.
HostTerm measure_like(const WireType& w, bool meas, Span span) {
  const WireType hat = classicalize(w);
  const WireType& in = meas ? w : hat;
  const WireType& out = meas ? hat : w;
  if (w.mentions_qlist())
    fail(TypeErrorKind::NotClassical, span,
         std::string(meas ? "meas" : "new") + "[" + pretty_print(w) + "]: qlist has no fixed measurement");
  switch (w.kind()) {
    case WireType::Kind::Unit:
    case WireType::Kind::Classical:
      return make::box(Pattern::wire("w"), in, make::output(Pattern::wire("w"), span), span);
    case WireType::Kind::Quantum: {
      if (w != WireType::qubit())
        fail(TypeErrorKind::NotClassical, span, "no measurement for quantum base " + w.name());
      GateRef g;
      g.name = meas ? "meas" : "new";
      g.in = in;
      g.out = out;
      return make::box(Pattern::wire("w"), in,
                       make::gate(Pattern::wire("v"), g, Pattern::wire("w"),
                                  make::output(Pattern::wire("v"), span), span),
                       span);
    }
    case WireType::Kind::Tensor: {
      const Pattern w1 = Pattern::wire("w"), w2 = Pattern::wire("w'");
      const Pattern x1 = Pattern::wire("x"), x2 = Pattern::wire("x'");
      CircuitTerm body = make::compose(
          x1, make::unbox(measure_like(w.left(), meas, span), w1, span),
          make::compose(x2, make::unbox(measure_like(w.right(), meas, span), w2, span),
                        make::output(Pattern::pair(x1, x2), span), span),
          span);
      return make::box(Pattern::pair(w1, w2), in, body, span);
    }
  }
  return nullptr;
}

}  // namespace

HostTerm meas_circuit(const WireType& w) { return measure_like(w, true, {}); }
HostTerm new_circuit(const WireType& w) { return measure_like(w, false, {}); }

WireType match_pattern(const WireContext& omega, const Pattern& p) {
  std::map<std::string, WireType> avail;
  for (const auto& [name, type] : omega) {
    if (!avail.emplace(name, type).second)
      fail(TypeErrorKind::LinearityViolation, {}, "wire " + name + " appears twice in the context");
  }
  std::set<std::string> used;
  std::function<WireType(const Pattern&)> go = [&](const Pattern& q) -> WireType {
    switch (q.kind()) {
      case Pattern::Kind::Unit: return WireType::unit();
      case Pattern::Kind::Pair: {
        WireType l = go(q.first());
        return WireType::tensor(l, go(q.second()));
      }
      case Pattern::Kind::Wire: {
        auto it = avail.find(q.name());
        if (it == avail.end()) fail(TypeErrorKind::UnboundWire, {}, "wire " + q.name() + " is not bound");
        if (!used.insert(q.name()).second)
          fail(TypeErrorKind::LinearityViolation, {}, "wire " + q.name() + " is used twice");
        return it->second;
      }
    }
    return WireType::unit();
  };
  WireType w = go(p);
  for (const auto& [name, type] : omega)
    if (!used.count(name)) fail(TypeErrorKind::UnusedWire, {}, "wire " + name + " is never used");
  return w;
}

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

class CheckerImpl {
 public:
  explicit CheckerImpl(const Typechecker& tc) : tc_(tc) {}

  struct Hint {
    std::optional<HostType> type;
    std::optional<WireType> circ_in;  // the input a box will be unboxed at
  };

  // Linear wire context threaded through a circuit.
  struct Linear {
    std::vector<std::pair<std::string, WireType>> live;
    std::set<std::string> consumed;
  };

  CheckedHost host(HostContext& gamma, const HostTerm& t, const Hint& hint) const;
  CheckedCircuit circuit(HostContext& gamma, Linear& lin, const CircuitTerm& c) const;
  CheckedCircuit closed_circuit(HostContext& gamma, const WireContext& omega,
                                const CircuitTerm& c) const;

 private:
  std::optional<HostType> lookup(const HostContext& gamma, const std::string& x) const {
    for (auto it = gamma.rbegin(); it != gamma.rend(); ++it)
      if (it->first == x) return it->second;
    return tc_.global_type(x);
  }

  WireType take(Linear& lin, const Pattern& p, Span span) const;
  std::optional<WireType> peek(const Linear& lin, const Pattern& p) const;
  void bind(Linear& lin, const Pattern& p, const WireType& w, Span span) const;
  GateRef resolve_gate(const GateRef& g, Span span) const;
  std::optional<WireType> infer_box_input(const HostContext& gamma, const Pattern& p,
                                          const CircuitTerm& body) const;
  CircuitTerm expand_call(const CircuitNode& c) const;

  const Typechecker& tc_;
};

WireType CheckerImpl::take(Linear& lin, const Pattern& p, Span span) const {
  std::set<std::string> seen;
  std::function<WireType(const Pattern&)> go = [&](const Pattern& q) -> WireType {
    switch (q.kind()) {
      case Pattern::Kind::Unit: return WireType::unit();
      case Pattern::Kind::Pair: {
        WireType l = go(q.first());
        return WireType::tensor(l, go(q.second()));
      }
      case Pattern::Kind::Wire: {
        const std::string& w = q.name();
        if (!seen.insert(w).second)
          fail(TypeErrorKind::LinearityViolation, span, "wire " + w + " is used twice in one pattern");
        auto it = std::find_if(lin.live.begin(), lin.live.end(),
                               [&](const auto& e) { return e.first == w; });
        if (it == lin.live.end()) {
          if (lin.consumed.count(w))
            fail(TypeErrorKind::LinearityViolation, span, "wire " + w + " is used after it was consumed");
          fail(TypeErrorKind::UnboundWire, span, "wire " + w + " is not bound");
        }
        WireType type = it->second;
        lin.live.erase(it);
        lin.consumed.insert(w);
        return type;
      }
    }
    return WireType::unit();
  };
  return go(p);
}

std::optional<WireType> CheckerImpl::peek(const Linear& lin, const Pattern& p) const {
  switch (p.kind()) {
    case Pattern::Kind::Unit: return WireType::unit();
    case Pattern::Kind::Pair: {
      auto l = peek(lin, p.first());
      auto r = peek(lin, p.second());
      if (!l || !r) return std::nullopt;
      return WireType::tensor(*l, *r);
    }
    case Pattern::Kind::Wire:
      for (const auto& [name, type] : lin.live)
        if (name == p.name()) return type;
      return std::nullopt;
  }
  return std::nullopt;
}

void CheckerImpl::bind(Linear& lin, const Pattern& p, const WireType& w, Span span) const {
  std::vector<std::pair<std::string, WireType>> parts;
  destructure(p, w, span, &parts);
  std::set<std::string> seen;
  for (auto& [name, type] : parts) {
    if (!seen.insert(name).second)
      fail(TypeErrorKind::LinearityViolation, span, "wire " + name + " is bound twice in one pattern");
    for (const auto& e : lin.live)
      if (e.first == name)
        fail(TypeErrorKind::LinearityViolation, span, "binding " + name + " shadows a live wire");
    lin.consumed.erase(name);
    lin.live.emplace_back(name, type);
  }
}

GateRef CheckerImpl::resolve_gate(const GateRef& g, Span span) const {
  GateRef r = g;
  std::optional<GateSignature> sig;
  try {
    sig = builtin_gate_signature(g.name, g.index);
  } catch (const TypeError& e) {
    fail(e.kind, span, e.message);
  }
  if (!sig) {
    for (const auto& d : tc_.source_.gates)
      if (d.name == g.name) sig = GateSignature{d.in, d.out};
    if (sig && g.index) fail(TypeErrorKind::GateSignature, span, "gate " + g.name + " takes no index");
  }
  if (!sig) fail(TypeErrorKind::GateSignature, span, "unknown gate '" + g.name + "'");
  r.in = sig->in;
  r.out = sig->out;
  return r;
}

// Input type of an unannotated box: the types its pattern wires are first
// used at.
std::optional<WireType> CheckerImpl::infer_box_input(const HostContext& gamma, const Pattern& p,
                                                     const CircuitTerm& body) const {
  std::map<std::string, std::optional<WireType>> found;
  for (const auto& w : p.wires()) found[w] = std::nullopt;
  std::set<std::string> stopped;  // rebound before use

  std::function<void(const Pattern&, const WireType&)> assign = [&](const Pattern& q,
                                                                   const WireType& w) {
    switch (q.kind()) {
      case Pattern::Kind::Wire: {
        auto it = found.find(q.name());
        if (it != found.end() && !it->second && !stopped.count(q.name())) it->second = w;
        return;
      }
      case Pattern::Kind::Unit: return;
      case Pattern::Kind::Pair:
        if (!w.is_tensor()) return;
        assign(q.first(), w.left());
        assign(q.second(), w.right());
        return;
    }
  };
  auto rebind = [&](const Pattern& q) {
    for (const auto& w : q.wires()) stopped.insert(w);
  };
  HostContext g = gamma;
  std::function<void(const CircuitTerm&)> scan = [&](const CircuitTerm& c) {
    switch (c->kind) {
      case CircuitKind::Output:
      case CircuitKind::Init: return;
      case CircuitKind::Gate:
        try {
          GateRef r = resolve_gate(c->gate, c->span);
          assign(c->pat_in, *r.in);
        } catch (const TypeError&) {
        }
        rebind(c->pat);
        scan(c->rest);
        return;
      case CircuitKind::Call:
        if (c->has_arg) {
          auto it = tc_.circuits_.find(c->name);
          if (it != tc_.circuits_.end()) assign(c->pat, params_type(it->second.params));
        }
        return;
      case CircuitKind::Unbox:
        try {
          CheckedHost h = host(g, c->host, {});
          if (h.type.kind() == HostType::Kind::Circ) assign(c->pat, h.type.circ_in());
        } catch (const TypeError&) {
        }
        return;
      case CircuitKind::Compose:
        scan(c->first);
        rebind(c->pat);
        scan(c->rest);
        return;
      case CircuitKind::UnitElim: scan(c->rest); return;
      case CircuitKind::PairElim:
        stopped.insert(c->name);
        stopped.insert(c->name2);
        scan(c->rest);
        return;
      case CircuitKind::Lift:
      case CircuitKind::QLift: scan(c->rest); return;
    }
  };
  scan(body);

  std::function<std::optional<WireType>(const Pattern&)> build =
      [&](const Pattern& q) -> std::optional<WireType> {
    switch (q.kind()) {
      case Pattern::Kind::Unit: return WireType::unit();
      case Pattern::Kind::Wire: return found[q.name()];
      case Pattern::Kind::Pair: {
        auto l = build(q.first());
        auto r = build(q.second());
        if (!l || !r) return std::nullopt;
        return WireType::tensor(*l, *r);
      }
    }
    return std::nullopt;
  };
  return build(p);
}

CircuitTerm CheckerImpl::expand_call(const CircuitNode& c) const {
  auto it = tc_.circuits_.find(c.name);
  if (it == tc_.circuits_.end())
    fail(TypeErrorKind::Mismatch, c.span, "'" + c.name + "' is not a declared circuit");
  const Declaration& d = it->second;
  const Pattern formal = params_pattern(d.params);
  HostTerm box = make::box(formal, params_type(d.params), d.circuit, c.span);
  return make::unbox(box, c.has_arg ? c.pat : formal, c.span);
}

CheckedCircuit CheckerImpl::circuit(HostContext& gamma, Linear& lin, const CircuitTerm& c) const {
  const Span span = c->span;
  switch (c->kind) {
    case CircuitKind::Output: {
      WireType w = take(lin, c->pat, span);
      return {w, c};
    }
    case CircuitKind::Compose: {
      std::set<std::string> before;
      for (const auto& e : lin.live) before.insert(e.first);
      CheckedCircuit first = circuit(gamma, lin, c->first);
      for (const auto& e : lin.live)
        if (!before.count(e.first))
          fail(TypeErrorKind::LinearityViolation, span, "wire " + e.first + " is never used");
      bind(lin, c->pat, first.type, span);
      CheckedCircuit rest = circuit(gamma, lin, c->rest);
      return {rest.type, make::compose(c->pat, first.term, rest.term, span)};
    }
    case CircuitKind::UnitElim: {
      WireType w = take(lin, c->pat, span);
      if (!w.is_unit())
        fail(TypeErrorKind::Mismatch, span, "() <- expects a wire of type I, got " + pretty_print(w));
      CheckedCircuit rest = circuit(gamma, lin, c->rest);
      return {rest.type, make::unit_elim(c->pat, rest.term, span)};
    }
    case CircuitKind::PairElim: {
      WireType w = take(lin, c->pat, span);
      if (!w.is_tensor())
        fail(TypeErrorKind::PatternShape, span,
             "(" + c->name + ", " + c->name2 + ") <- expects a tensor, got " + pretty_print(w));
      bind(lin, Pattern::pair(Pattern::wire(c->name), Pattern::wire(c->name2)), w, span);
      CheckedCircuit rest = circuit(gamma, lin, c->rest);
      return {rest.type, make::pair_elim(c->name, c->name2, c->pat, rest.term, span)};
    }
    case CircuitKind::Gate: {
      GateRef g = resolve_gate(c->gate, span);
      WireType w = take(lin, c->pat_in, span);
      if (w != *g.in)
        fail(TypeErrorKind::GateSignature, span,
             "gate " + g.display() + " expects " + pretty_print(*g.in) + ", got " + pretty_print(w));
      bind(lin, c->pat, *g.out, span);
      CheckedCircuit rest = circuit(gamma, lin, c->rest);
      return {rest.type, make::gate(c->pat, g, c->pat_in, rest.term, span)};
    }
    case CircuitKind::Unbox: {
      WireType w = take(lin, c->pat, span);
      Hint hint;
      hint.circ_in = w;
      CheckedHost h = host(gamma, c->host, hint);
      if (h.type.kind() == HostType::Kind::Monadic && h.type.first().kind() == HostType::Kind::Circ)
        fail(TypeErrorKind::EffectfulUnbox, span,
             "unbox of an effectful term of type " + pretty_print(h.type) + "; bind it with let first");
      if (h.type.kind() != HostType::Kind::Circ)
        fail(TypeErrorKind::Mismatch, span, "unbox expects a circuit, got " + pretty_print(h.type));
      if (h.type.circ_in() != w)
        fail(TypeErrorKind::Mismatch, span,
             "circuit expects input " + pretty_print(h.type.circ_in()) + ", got " + pretty_print(w));
      return {h.type.circ_out(), make::unbox(h.term, c->pat, span)};
    }
    case CircuitKind::Lift: {
      WireType w = take(lin, c->pat, span);
      if (!w.is_classical())
        fail(TypeErrorKind::NotClassical, span, "lift of non-classical wire type " + pretty_print(w));
      gamma.emplace_back(c->name, lift_type(w));
      CheckedCircuit rest;
      try {
        rest = circuit(gamma, lin, c->rest);
      } catch (...) {
        gamma.pop_back();
        throw;
      }
      gamma.pop_back();
      return {rest.type, make::lift(c->name, c->pat, rest.term, span)};
    }
    case CircuitKind::Init: {
      CheckedHost h = host(gamma, c->host, {});
      auto v = unlift_type(h.type, tc_.source_.int_cardinality());
      if (!v)
        fail(TypeErrorKind::NotClassical, span,
             "init needs a first-order classical value, got " + pretty_print(h.type));
      return {*v, make::init(h.term, span)};
    }
    case CircuitKind::QLift: {
      auto w = peek(lin, c->pat);
      if (!w) {
        take(lin, c->pat, span);  // reports the missing wire
        fail(TypeErrorKind::UnboundWire, span, "wire pattern " + pretty_print(c->pat) + " is not bound");
      }
      std::vector<std::string> avoid = free_wires(c->rest);
      for (const auto& e : lin.live) avoid.push_back(e.first);
      const std::string y = fresh_name("m", avoid);
      CircuitTerm core = make::compose(Pattern::wire(y), make::unbox(measure_like(*w, true, span), c->pat, span),
                                       make::lift(c->name, Pattern::wire(y), c->rest, span), span);
      return circuit(gamma, lin, core);
    }
    case CircuitKind::Call: return circuit(gamma, lin, expand_call(*c));
  }
  fail(TypeErrorKind::Mismatch, span, "unknown circuit form");
}

CheckedCircuit CheckerImpl::closed_circuit(HostContext& gamma, const WireContext& omega,
                                           const CircuitTerm& c) const {
  Linear lin;
  for (const auto& [name, type] : omega) {
    for (const auto& e : lin.live)
      if (e.first == name)
        fail(TypeErrorKind::LinearityViolation, c->span, "wire " + name + " appears twice in the context");
    lin.live.emplace_back(name, type);
  }
  CheckedCircuit r = circuit(gamma, lin, c);
  if (!lin.live.empty())
    fail(TypeErrorKind::LinearityViolation, c->span, "wire " + lin.live.front().first + " is never used");
  return r;
}

CheckedHost CheckerImpl::host(HostContext& gamma, const HostTerm& t, const Hint& hint) const {
  const Span span = t->span;
  auto mismatch = [&](const std::string& msg) { fail(TypeErrorKind::Mismatch, span, msg); };
  switch (t->kind) {
    case HostKind::Var: {
      auto a = lookup(gamma, t->name);
      if (!a) mismatch("unbound variable '" + t->name + "'");
      return {*a, t};
    }
    case HostKind::Lambda: {
      std::optional<HostType> param = t->type;
      std::optional<HostType> result;
      if (hint.type && hint.type->kind() == HostType::Kind::Arrow) {
        if (!param) param = hint.type->first();
        if (*param == hint.type->first()) result = hint.type->second();
      }
      if (!param) mismatch("cannot infer the type of parameter '" + t->name + "'; annotate it");
      gamma.emplace_back(t->name, *param);
      CheckedHost body;
      try {
        body = host(gamma, t->a, {result, std::nullopt});
      } catch (...) {
        gamma.pop_back();
        throw;
      }
      gamma.pop_back();
      return {HostType::arrow(*param, body.type), make::lambda(t->name, *param, body.term, span)};
    }
    case HostKind::App: {
      std::optional<HostType> fhint;
      // An unannotated fix gets its type from the expected result.
      if (t->a->kind == HostKind::Fix && hint.type) fhint = HostType::arrow(HostType::arrow(*hint.type, *hint.type), *hint.type);
      CheckedHost f = host(gamma, t->a, {fhint, std::nullopt});
      if (f.type.kind() != HostType::Kind::Arrow)
        mismatch("applying a non-function of type " + pretty_print(f.type));
      CheckedHost a = host(gamma, t->b, {f.type.first(), std::nullopt});
      if (a.type != f.type.first())
        mismatch("argument has type " + pretty_print(a.type) + ", expected " + pretty_print(f.type.first()));
      return {f.type.second(), make::app(f.term, a.term, span)};
    }
    case HostKind::UnitVal: return {HostType::unit(), t};
    case HostKind::Pair: {
      Hint ha, hb;
      if (hint.type && hint.type->kind() == HostType::Kind::Product) {
        ha.type = hint.type->first();
        hb.type = hint.type->second();
      }
      CheckedHost a = host(gamma, t->a, ha);
      CheckedHost b = host(gamma, t->b, hb);
      return {HostType::product(a.type, b.type), make::pair(a.term, b.term, span)};
    }
    case HostKind::Proj1:
    case HostKind::Proj2: {
      CheckedHost a = host(gamma, t->a, {});
      if (a.type.kind() != HostType::Kind::Product)
        mismatch("projection from a non-product of type " + pretty_print(a.type));
      if (t->kind == HostKind::Proj1) return {a.type.first(), make::proj1(a.term, span)};
      return {a.type.second(), make::proj2(a.term, span)};
    }
    case HostKind::Return: {
      Hint h;
      if (hint.type && hint.type->kind() == HostType::Kind::Monadic) h.type = hint.type->first();
      CheckedHost a = host(gamma, t->a, h);
      return {HostType::monadic(a.type), make::ret(a.term, span)};
    }
    case HostKind::LetBind: {
      CheckedHost a = host(gamma, t->a, {});
      if (a.type.kind() != HostType::Kind::Monadic)
        mismatch("let <- expects an effectful term, got " + pretty_print(a.type));
      gamma.emplace_back(t->name, a.type.first());
      CheckedHost b;
      try {
        b = host(gamma, t->b, hint);
      } catch (...) {
        gamma.pop_back();
        throw;
      }
      gamma.pop_back();
      if (b.type.kind() != HostType::Kind::Monadic)
        mismatch("the body of let <- must be effectful, got " + pretty_print(b.type));
      return {b.type, make::let_bind(a.term, t->name, b.term, span)};
    }
    case HostKind::Box: {
      std::optional<WireType> in = t->wtype;
      if (!in && hint.type && hint.type->kind() == HostType::Kind::Circ) in = hint.type->circ_in();
      if (!in && hint.circ_in) in = hint.circ_in;
      if (!in) in = infer_box_input(gamma, t->pat, t->circ);
      if (!in)
        mismatch("cannot infer the input type of this box; write box (" + pretty_print(t->pat) +
                 " : W) => ...");
      WireContext omega;
      destructure(t->pat, *in, span, &omega);
      CheckedCircuit body = closed_circuit(gamma, omega, t->circ);
      return {HostType::circ(*in, body.type), make::box(t->pat, *in, body.term, span)};
    }
    case HostKind::Run: {
      CheckedCircuit c = closed_circuit(gamma, {}, t->circ);
      if (!c.type.is_classical())
        fail(TypeErrorKind::NotClassical, span,
             "run needs a classical output, got " + pretty_print(c.type) + "; use qrun to measure");
      return {HostType::monadic(lift_type(c.type)), make::run(c.term, span)};
    }
    case HostKind::QRun: {
      CheckedCircuit c = closed_circuit(gamma, {}, t->circ);
      const std::string x = fresh_name("q", free_wires(t->circ));
      CircuitTerm core = make::compose(Pattern::wire(x), c.term,
                                       make::unbox(measure_like(c.type, true, span), Pattern::wire(x), span),
                                       span);
      return host(gamma, make::run(core, span), hint);
    }
    case HostKind::ClassicalLit: {
      if (t->value < 0 || t->value >= t->cardinality)
        mismatch("literal " + t->name + "#" + std::to_string(t->value) + " is out of range");
      return {HostType::classical(t->name, t->cardinality), t};
    }
    case HostKind::If: {
      CheckedHost cond = host(gamma, t->a, {HostType::bit(), std::nullopt});
      if (cond.type != HostType::bit())
        mismatch("if condition must be a bit, got " + pretty_print(cond.type));
      CheckedHost a = host(gamma, t->b, hint);
      Hint hb = hint;
      if (!hb.type) hb.type = a.type;
      CheckedHost b = host(gamma, t->c, hb);
      if (a.type != b.type)
        mismatch("if branches differ: " + pretty_print(a.type) + " and " + pretty_print(b.type));
      return {a.type, make::if_(cond.term, a.term, b.term, span)};
    }
    case HostKind::IntLit: return {HostType::integer(), t};
    case HostKind::BinOp: {
      CheckedHost a = host(gamma, t->a, {});
      CheckedHost b = host(gamma, t->b, {a.type, std::nullopt});
      const bool arith = t->op == BinOpKind::Add || t->op == BinOpKind::Sub;
      if (arith || t->op == BinOpKind::Lt) {
        if (a.type != HostType::integer() || b.type != HostType::integer())
          mismatch(std::string("operator ") + to_string(t->op) + " needs int operands, got " +
                   pretty_print(a.type) + " and " + pretty_print(b.type));
      } else {
        if (a.type != b.type || (a.type != HostType::integer() && a.type.kind() != HostType::Kind::Classical))
          mismatch("= compares ints or classical values of one type, got " + pretty_print(a.type) +
                   " and " + pretty_print(b.type));
      }
      return {arith ? HostType::integer() : HostType::bit(), make::binop(t->op, a.term, b.term, span)};
    }
    case HostKind::Fix: {
      std::optional<HostType> a = t->type;
      std::optional<WireType> w1 = t->wtype, w2 = t->wtype2;
      if (!a && hint.type) {
        // ((A -> Circ) -> (A -> Circ)) -> (A -> Circ)
        const HostType& h = *hint.type;
        if (h.kind() == HostType::Kind::Arrow && h.second().kind() == HostType::Kind::Arrow &&
            h.second().second().kind() == HostType::Kind::Circ) {
          a = h.second().first();
          w1 = h.second().second().circ_in();
          w2 = h.second().second().circ_out();
        }
      }
      if (!a || !w1 || !w2) mismatch("cannot infer the type of fix; write fix[A, W1, W2]");
      return {fix_type(*a, *w1, *w2), make::fix(*a, *w1, *w2, span)};
    }
    case HostKind::GateFamily: {
      CheckedHost n = host(gamma, t->a, {HostType::integer(), std::nullopt});
      if (n.type != HostType::integer())
        mismatch(t->name + " needs an int index, got " + pretty_print(n.type));
      return {family_type(t->name), make::gate_family(t->name, n.term, span)};
    }
    case HostKind::MeasW:
    case HostKind::NewW: {
      HostTerm b = measure_like(*t->wtype, t->kind == HostKind::MeasW, span);
      return host(gamma, b, {});
    }
  }
  mismatch("unknown host form");
  return {};
}

// ---------------------------------------------------------------------------
// Typechecker
// ---------------------------------------------------------------------------

Typechecker::Typechecker(const Program& program) : source_(program) {
  elaborated_.classicals = program.classicals;
  elaborated_.gates = program.gates;
  elaborated_.entry = program.entry;
  for (const auto& g : program.gates) {
    if (is_builtin_gate(g.name))
      fail(TypeErrorKind::GateSignature, g.span, "gate " + g.name + " is built in and cannot be redeclared");
  }
  CheckerImpl impl(*this);
  for (const auto& d : source_.decls) {
    Declaration out;
    out.name = d.name;
    out.span = d.span;
    HostType type;
    switch (d.kind) {
      case Declaration::Kind::Def: {
        HostContext gamma;
        CheckedHost h = impl.host(gamma, d.body, {d.type, std::nullopt});
        if (d.type && h.type != *d.type)
          fail(TypeErrorKind::Mismatch, d.span,
               d.name + " is declared " + pretty_print(*d.type) + " but has type " + pretty_print(h.type));
        type = h.type;
        out.kind = Declaration::Kind::Def;
        out.body = h.term;
        break;
      }
      case Declaration::Kind::Rec: {
        if (!d.type) fail(TypeErrorKind::Mismatch, d.span, "rec " + d.name + " needs a type annotation");
        type = *d.type;
        const bool fn = type.kind() == HostType::Kind::Arrow && type.second().kind() == HostType::Kind::Circ;
        if (!fn && type.kind() != HostType::Kind::Circ)
          fail(TypeErrorKind::Mismatch, d.span,
               "rec " + d.name + " must have type A -> Circ(W1, W2) or Circ(W1, W2)");
        HostContext gamma{{d.name, type}};
        CheckedHost h = impl.host(gamma, d.body, {type, std::nullopt});
        if (h.type != type)
          fail(TypeErrorKind::Mismatch, d.span,
               d.name + " is declared " + pretty_print(type) + " but has type " + pretty_print(h.type));
        out.kind = Declaration::Kind::Def;
        if (fn) {
          const WireType& w1 = type.second().circ_in();
          const WireType& w2 = type.second().circ_out();
          out.body = make::app(make::fix(type.first(), w1, w2, d.span),
                               make::lambda(d.name, type, h.term, d.span), d.span);
        } else {
          std::vector<std::string> avoid = free_vars(h.term);
          avoid.push_back(d.name);
          const std::string f = fresh_name(d.name + "_fn", avoid);
          avoid.push_back(f);
          const std::string u = fresh_name("u", avoid);
          const HostType ftype = HostType::arrow(HostType::unit(), type);
          HostTerm body = subst_host(h.term, d.name, make::app(make::var(f), make::unit()));
          out.body = make::app(
              make::app(make::fix(HostType::unit(), type.circ_in(), type.circ_out(), d.span),
                        make::lambda(f, ftype, make::lambda(u, HostType::unit(), body), d.span), d.span),
              make::unit(), d.span);
        }
        break;
      }
      case Declaration::Kind::Circuit: {
        HostContext gamma;
        CheckedCircuit c = impl.closed_circuit(gamma, d.params, d.circuit);
        if (d.out && c.type != *d.out)
          fail(TypeErrorKind::Mismatch, d.span,
               "circuit " + d.name + " is declared to output " + pretty_print(*d.out) + " but outputs " +
                   pretty_print(c.type));
        const WireType in = params_type(d.params);
        type = HostType::circ(in, c.type);
        out.kind = Declaration::Kind::Circuit;
        out.params = d.params;
        out.out = c.type;
        out.circuit = c.term;
        out.body = make::box(params_pattern(d.params), in, c.term, d.span);
        break;
      }
    }
    out.type = type;
    if (out.kind == Declaration::Kind::Circuit) circuits_[d.name] = out;
    elaborated_.decls.push_back(out);
    types_.emplace_back(d.name, type);
    globals_[d.name] = type;
  }
}

std::optional<HostType> Typechecker::global_type(const std::string& name) const {
  auto it = globals_.find(name);
  if (it == globals_.end()) return std::nullopt;
  return it->second;
}

CheckedHost Typechecker::check_host(const HostContext& gamma, const HostTerm& t,
                                    const std::optional<HostType>& expected) const {
  HostContext g = gamma;
  CheckerImpl impl(*this);
  CheckedHost r = impl.host(g, t, {expected, std::nullopt});
  if (expected && r.type != *expected)
    fail(TypeErrorKind::Mismatch, t->span,
         "expected " + pretty_print(*expected) + ", got " + pretty_print(r.type));
  return r;
}

CheckedCircuit Typechecker::check_circuit(const HostContext& gamma, const WireContext& omega,
                                          const CircuitTerm& c) const {
  HostContext g = gamma;
  CheckerImpl impl(*this);
  return impl.closed_circuit(g, omega, c);
}

Program elaborate_sugar(const Program& p) { return Typechecker(p).elaborated(); }

}  // namespace ewire
