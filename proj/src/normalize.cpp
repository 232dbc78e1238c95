#include "ewire/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace ewire {

const char* to_string(Rule r) {
  switch (r) {
    case Rule::UnboxBox: return "UnboxBox";
    case Rule::OutputSubst: return "OutputSubst";
    case Rule::GateCommute: return "GateCommute";
    case Rule::LiftCommute: return "LiftCommute";
    case Rule::UnitEta: return "UnitEta";
    case Rule::PairEta: return "PairEta";
    case Rule::UnitCommute: return "UnitCommute";
    case Rule::PairCommute: return "PairCommute";
    case Rule::LiftInit: return "LiftInit";
    case Rule::InitLift: return "InitLift";
    case Rule::Inline: return "Inline";
    case Rule::Beta: return "Beta";
    case Rule::Proj: return "Proj";
  }
  return "?";
}

namespace {

constexpr Rule kCircuitRules[] = {Rule::UnboxBox,  Rule::OutputSubst, Rule::GateCommute, Rule::LiftCommute,
                                  Rule::UnitEta,   Rule::PairEta,     Rule::UnitCommute, Rule::PairCommute,
                                  Rule::LiftInit,  Rule::InitLift};

void collect_names(const CircuitTerm& c, std::set<std::string>& out);

void collect_names(const HostTerm& t, std::set<std::string>& out) {
  if (!t) return;
  if (!t->name.empty()) out.insert(t->name);
  for (const auto& w : t->pat.wires()) out.insert(w);
  collect_names(t->a, out);
  collect_names(t->b, out);
  collect_names(t->c, out);
  if (t->circ) collect_names(t->circ, out);
}

void collect_names(const CircuitTerm& c, std::set<std::string>& out) {
  if (!c) return;
  for (const auto& w : c->pat.wires()) out.insert(w);
  for (const auto& w : c->pat_in.wires()) out.insert(w);
  if (!c->name.empty()) out.insert(c->name);
  if (!c->name2.empty()) out.insert(c->name2);
  collect_names(c->first, out);
  collect_names(c->rest, out);
  collect_names(c->host, out);
}

bool shape_compatible(const Pattern& from, const Pattern& to) {
  if (from.kind() == Pattern::Kind::Wire) return true;
  if (from.kind() != to.kind()) return false;
  if (from.kind() == Pattern::Kind::Unit) return true;
  return shape_compatible(from.first(), to.first()) && shape_compatible(from.second(), to.second());
}

bool contains_fix(const HostTerm& t) {
  if (!t) return false;
  if (t->kind == HostKind::Fix) return true;
  return contains_fix(t->a) || contains_fix(t->b) || contains_fix(t->c);
}

bool is_value(const HostTerm& t) {
  switch (t->kind) {
    case HostKind::Var:
    case HostKind::Lambda:
    case HostKind::Box:
    case HostKind::UnitVal:
    case HostKind::IntLit:
    case HostKind::ClassicalLit:
    case HostKind::Fix: return true;
    case HostKind::Pair: return is_value(t->a) && is_value(t->b);
    default: return false;
  }
}

CircuitTerm with(const CircuitTerm& c, const std::function<void(CircuitNode&)>& edit) {
  auto n = std::make_shared<CircuitNode>(*c);
  edit(*n);
  return n;
}

HostTerm with(const HostTerm& t, const std::function<void(HostNode&)>& edit) {
  auto n = std::make_shared<HostNode>(*t);
  edit(*n);
  return n;
}

class Rewriter {
 public:
  Rewriter(const Program* program, std::set<std::string> avoid, std::vector<TraceEntry>* trace)
      : program_(program), avoid_(std::move(avoid)), trace_(trace) {}

  // Rules tried at a single node, in priority order.
  std::optional<CircuitTerm> at(const CircuitTerm& c, const std::vector<Rule>& rules) {
    for (Rule r : rules)
      if (auto out = try_rule(r, c)) return out;
    return std::nullopt;
  }

  // First position in pre-order where a rule fires.
  std::optional<CircuitTerm> step(const CircuitTerm& c, const std::vector<Rule>& rules) {
    if (auto here = at(c, rules)) return here;
    switch (c->kind) {
      case CircuitKind::Compose:
        if (auto f = step(c->first, rules))
          return with(c, [&](CircuitNode& n) { n.first = *f; });
        if (auto r = step(c->rest, rules))
          return with(c, [&](CircuitNode& n) { n.rest = *r; });
        return std::nullopt;
      case CircuitKind::Unbox:
      case CircuitKind::Init:
        if (auto h = step_host(c->host, rules))
          return with(c, [&](CircuitNode& n) { n.host = *h; });
        return std::nullopt;
      case CircuitKind::Output:
      case CircuitKind::Call: return std::nullopt;
      default:
        if (auto r = step(c->rest, rules))
          return with(c, [&](CircuitNode& n) { n.rest = *r; });
        return std::nullopt;
    }
  }

  std::optional<HostTerm> step_host(const HostTerm& t, const std::vector<Rule>& rules) {
    if (!t) return std::nullopt;
    if (t->circ) {
      if (auto c = step(t->circ, rules)) return with(t, [&](HostNode& n) { n.circ = *c; });
    }
    for (HostTerm HostNode::*field : {&HostNode::a, &HostNode::b, &HostNode::c}) {
      if (auto s = step_host(t.get()->*field, rules)) return with(t, [&](HostNode& n) { n.*field = *s; });
    }
    return std::nullopt;
  }

 private:
  std::string fresh(const std::string& base) {
    std::vector<std::string> av(avoid_.begin(), avoid_.end());
    std::string n = fresh_name(base, av);
    avoid_.insert(n);
    return n;
  }

  // Renames the wires of `binder` that occur in `clash`; returns the new
  // binder and `scope` with the renaming applied.
  std::pair<Pattern, CircuitTerm> rename_clashing(const Pattern& binder, const CircuitTerm& scope,
                                                  const std::vector<std::string>& clash) {
    std::function<Pattern(const Pattern&)> go = [&](const Pattern& p) -> Pattern {
      switch (p.kind()) {
        case Pattern::Kind::Unit: return p;
        case Pattern::Kind::Pair: return Pattern::pair(go(p.first()), go(p.second()));
        case Pattern::Kind::Wire:
          if (std::find(clash.begin(), clash.end(), p.name()) != clash.end()) return Pattern::wire(fresh(p.name()));
          return p;
      }
      return p;
    };
    Pattern renamed = go(binder);
    if (renamed == binder) return {binder, scope};
    return {renamed, subst_pattern(scope, binder, renamed)};
  }

  // Head reduction of the unboxed term towards a literal box.
  std::optional<HostTerm> head_step(const HostTerm& t, Rule* rule) {
    switch (t->kind) {
      case HostKind::Var: {
        if (!program_) return std::nullopt;
        const Declaration* d = program_->find(t->name);
        if (!d || !d->body || contains_fix(d->body)) return std::nullopt;
        *rule = Rule::Inline;
        return d->body;
      }
      case HostKind::App: {
        if (t->a->kind == HostKind::Lambda && is_value(t->b)) {
          *rule = Rule::Beta;
          return subst_host(t->a->a, t->a->name, t->b);
        }
        if (auto f = head_step(t->a, rule)) return with(t, [&](HostNode& n) { n.a = *f; });
        return std::nullopt;
      }
      case HostKind::Proj1:
      case HostKind::Proj2: {
        if (t->a->kind == HostKind::Pair && is_value(t->a)) {
          *rule = Rule::Proj;
          return t->kind == HostKind::Proj1 ? t->a->a : t->a->b;
        }
        if (auto s = head_step(t->a, rule)) return with(t, [&](HostNode& n) { n.a = *s; });
        return std::nullopt;
      }
      default: return std::nullopt;
    }
  }

  std::optional<CircuitTerm> try_rule(Rule r, const CircuitTerm& c) {
    auto fire = [&](CircuitTerm out) -> std::optional<CircuitTerm> {
      if (trace_) trace_->push_back({0, r, c->span});
      return out;
    };
    switch (r) {
      case Rule::UnboxBox: {
        if (c->kind != CircuitKind::Unbox) return std::nullopt;
        HostTerm h = c->host;
        std::vector<TraceEntry> host_steps;
        for (int i = 0; i < 64 && h->kind != HostKind::Box; ++i) {
          Rule hr = Rule::Inline;
          auto next = head_step(h, &hr);
          if (!next) break;
          host_steps.push_back({0, hr, c->span});
          h = *next;
        }
        if (h->kind != HostKind::Box) return std::nullopt;
        if (trace_) trace_->insert(trace_->end(), host_steps.begin(), host_steps.end());
        for (const auto& w : c->pat.wires()) avoid_.insert(w);
        std::vector<std::string> av(avoid_.begin(), avoid_.end());
        CircuitTerm body = freshen_wires(h->circ, av);
        collect_names(body, avoid_);
        if (shape_compatible(h->pat, c->pat)) return fire(subst_pattern(body, h->pat, c->pat));
        auto [w, scope] = rename_clashing(h->pat, body, h->pat.wires());
        return fire(make::compose(w, make::output(c->pat, c->span), scope, c->span));
      }
      case Rule::OutputSubst:
        if (c->kind != CircuitKind::Compose || c->first->kind != CircuitKind::Output) return std::nullopt;
        if (!shape_compatible(c->pat, c->first->pat)) return std::nullopt;
        return fire(subst_pattern(c->rest, c->pat, c->first->pat));
      case Rule::GateCommute: {
        if (c->kind != CircuitKind::Compose || c->first->kind != CircuitKind::Gate) return std::nullopt;
        const CircuitTerm& g = c->first;
        auto [p2, n] = rename_clashing(g->pat, g->rest, free_wires(c->rest));
        return fire(make::gate(p2, g->gate, g->pat_in, make::compose(c->pat, n, c->rest, c->span), g->span));
      }
      case Rule::LiftCommute: {
        if (c->kind != CircuitKind::Compose || c->first->kind != CircuitKind::Lift) return std::nullopt;
        const CircuitTerm& l = c->first;
        std::string x = l->name;
        CircuitTerm inner = l->rest;
        const auto fv = free_vars(c->rest);
        if (std::find(fv.begin(), fv.end(), x) != fv.end()) {
          x = fresh(x);
          inner = subst_host(inner, l->name, make::var(x));
        }
        return fire(make::lift(x, l->pat, make::compose(c->pat, inner, c->rest, c->span), l->span));
      }
      case Rule::UnitEta:
        if (c->kind != CircuitKind::UnitElim || c->pat.kind() != Pattern::Kind::Unit) return std::nullopt;
        return fire(c->rest);
      case Rule::PairEta:
        if (c->kind != CircuitKind::PairElim || c->pat.kind() != Pattern::Kind::Pair) return std::nullopt;
        return fire(subst_pattern(c->rest, Pattern::pair(Pattern::wire(c->name), Pattern::wire(c->name2)), c->pat));
      case Rule::UnitCommute: {
        if (c->kind != CircuitKind::Compose || c->first->kind != CircuitKind::UnitElim) return std::nullopt;
        const CircuitTerm& u = c->first;
        return fire(make::unit_elim(u->pat, make::compose(c->pat, u->rest, c->rest, c->span), u->span));
      }
      case Rule::PairCommute: {
        if (c->kind != CircuitKind::Compose || c->first->kind != CircuitKind::PairElim) return std::nullopt;
        const CircuitTerm& e = c->first;
        const Pattern binder = Pattern::pair(Pattern::wire(e->name), Pattern::wire(e->name2));
        auto [b, n] = rename_clashing(binder, e->rest, free_wires(c->rest));
        return fire(make::pair_elim(b.first().name(), b.second().name(), e->pat,
                                    make::compose(c->pat, n, c->rest, c->span), e->span));
      }
      case Rule::LiftInit:
        if (c->kind != CircuitKind::Lift || c->rest->kind != CircuitKind::Init) return std::nullopt;
        if (c->rest->host->kind != HostKind::Var || c->rest->host->name != c->name) return std::nullopt;
        return fire(make::output(c->pat, c->span));
      case Rule::InitLift:
        if (c->kind != CircuitKind::Compose || c->first->kind != CircuitKind::Init) return std::nullopt;
        if (c->rest->kind != CircuitKind::Lift || c->rest->pat != c->pat) return std::nullopt;
        return fire(subst_host(c->rest->rest, c->rest->name, c->first->host));
      default: return std::nullopt;
    }
  }

  const Program* program_;
  std::set<std::string> avoid_;
  std::vector<TraceEntry>* trace_;
};

std::vector<Rule> active_rules(const NormalizeOptions& o) {
  std::vector<Rule> rules;
  for (Rule r : kCircuitRules)
    if (o.copower_rules || (r != Rule::LiftInit && r != Rule::InitLift)) rules.push_back(r);
  return rules;
}

std::set<std::string> global_names(const Program* p) {
  std::set<std::string> out;
  if (p)
    for (const auto& d : p->decls) out.insert(d.name);
  return out;
}

}  // namespace

std::optional<CircuitTerm> apply_rule(Rule rule, const CircuitTerm& c, const Program* program) {
  std::set<std::string> avoid = global_names(program);
  collect_names(c, avoid);
  Rewriter rw(program, std::move(avoid), nullptr);
  return rw.step(c, {rule});
}

NormalizeResult normalize(const CircuitTerm& c, const NormalizeOptions& options, const Program* program) {
  NormalizeResult res;
  res.term = c;
  const auto rules = active_rules(options);
  for (int step = 0;; ++step) {
    std::set<std::string> avoid = global_names(program);
    collect_names(res.term, avoid);
    std::vector<TraceEntry> local;
    Rewriter rw(program, std::move(avoid), &local);
    auto next = rw.step(res.term, rules);
    if (!next) break;
    if (step >= options.max_steps) {
      res.step_limit = true;
      break;
    }
    for (auto& e : local) {
      e.step = static_cast<int>(res.trace.size()) + 1;
      res.trace.push_back(e);
    }
    res.term = *next;
  }
  return res;
}

HostNormalizeResult normalize_host(const HostTerm& t, const NormalizeOptions& options, const Program* program) {
  HostNormalizeResult res;
  res.term = t;
  const auto rules = active_rules(options);
  for (int step = 0;; ++step) {
    std::set<std::string> avoid = global_names(program);
    collect_names(res.term, avoid);
    std::vector<TraceEntry> local;
    Rewriter rw(program, std::move(avoid), &local);
    auto next = rw.step_host(res.term, rules);
    if (!next) break;
    if (step >= options.max_steps) {
      res.step_limit = true;
      break;
    }
    for (auto& e : local) {
      e.step = static_cast<int>(res.trace.size()) + 1;
      res.trace.push_back(e);
    }
    res.term = *next;
  }
  return res;
}

EquivResult check_equiv(const CircuitTerm& c1, const CircuitTerm& c2, const WireContext& omega,
                        const Program& elaborated, const Env& env, double tol, EvalOptions options) {
  Evaluator e1(elaborated, options), e2(elaborated, options);
  e1.reset_fuel();
  e2.reset_fuel();
  WireType o1, o2;
  SuperOp f = e1.denote_circuit(omega, c1, env, &o1);
  SuperOp g = e2.denote_circuit(omega, c2, env, &o2);
  EquivResult r;
  if (o1 != o2 || f.source != g.source || f.target != g.target) {
    r.distance = std::numeric_limits<double>::infinity();
    return r;
  }
  r.distance = frobenius_distance(f, g);
  r.equal = r.distance <= tol;
  return r;
}

}  // namespace ewire
