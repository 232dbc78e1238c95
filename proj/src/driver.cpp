#include "ewire/driver.hpp"

namespace ewire {

WireType concretize_qlist(const WireType& w, int length) {
  switch (w.kind()) {
    case WireType::Kind::Tensor:
      return WireType::tensor(concretize_qlist(w.left(), length), concretize_qlist(w.right(), length));
    case WireType::Kind::Quantum:
      if (w.is_qlist_base()) return WireType::qlist_of_length(length);
      return w;
    default: return w;
  }
}

std::string resolve_entry(const Program& p, const std::optional<std::string>& requested) {
  if (requested) {
    if (!p.find(*requested)) throw EvalError("no declaration named '" + *requested + "'");
    return *requested;
  }
  if (p.entry) return *p.entry;
  if (p.find("main")) return "main";
  if (p.decls.empty()) throw EvalError("the program has no declarations");
  return p.decls.back().name;
}

namespace {

HostType entry_type(const Typechecker& tc, const std::string& entry) {
  auto t = tc.global_type(entry);
  if (!t) throw EvalError("no declaration named '" + entry + "'");
  return *t;
}

}  // namespace

Distribution run_entry(const Typechecker& tc, const std::string& entry, const EvalOptions& options) {
  const HostType t = entry_type(tc, entry);
  HostTerm term;
  if (t.kind() == HostType::Kind::Monadic) {
    term = make::var(entry);
  } else if (t.kind() == HostType::Kind::Circ && t.circ_in().is_unit()) {
    CircuitTerm c = make::unbox(make::var(entry), Pattern::unit());
    term = t.circ_out().is_classical() ? make::run(c) : make::qrun(c);
  } else {
    throw TypeError(TypeErrorKind::Mismatch, tc.elaborated().find(entry)->span,
                    "run needs an entry of type T(A) or Circ(I, W), got " + pretty_print(t));
  }
  CheckedHost checked = tc.check_host({}, term);
  Evaluator ev(tc.elaborated(), options);
  Value v = ev.evaluate(checked.term);
  if (v->kind != ValueKind::Dist) throw EvalError("run did not produce a distribution");
  return *v->dist;
}

SuperOp denote_entry(const Typechecker& tc, const std::string& entry, const EvalOptions& options,
                     std::optional<int> qlist_size, WireType* out) {
  const HostType t = entry_type(tc, entry);
  if (t.kind() != HostType::Kind::Circ)
    throw TypeError(TypeErrorKind::Mismatch, {}, "denote needs a circuit entry, got " + pretty_print(t));
  WireType in = t.circ_in();
  if (in.mentions_qlist()) {
    if (!qlist_size) throw EvalError("the input of " + entry + " mentions qlist; pass --qlist-size");
    in = concretize_qlist(in, *qlist_size);
  }
  Evaluator ev(tc.elaborated(), options);
  std::shared_ptr<const CircInstance> inst;
  run_with_stack([&] {
    ev.reset_fuel();
    Value v = ev.global(entry);
    if (v->kind != ValueKind::Circ) throw EvalError(entry + " is not a circuit value");
    inst = ev.instantiate(*v->circ, in);
  });
  if (out) *out = inst->out;
  return inst->op;
}

EntryNormalization normalize_entry(const Typechecker& tc, const std::string& entry,
                                   const NormalizeOptions& options) {
  const Program& p = tc.elaborated();
  const Declaration* d = p.find(entry);
  if (!d) throw EvalError("no declaration named '" + entry + "'");
  EntryNormalization r;
  if (d->kind == Declaration::Kind::Circuit) {
    NormalizeResult n = normalize(d->circuit, options, &p);
    r.text = pretty_print(n.term);
    r.trace = std::move(n.trace);
    r.step_limit = n.step_limit;
  } else if (auto t = tc.global_type(entry);
             t && t->kind() == HostType::Kind::Circ && d->body->kind != HostKind::Box) {
    // Eta-expand so the body can be unfolded: box w => unbox entry w.
    const Pattern w = Pattern::wire(fresh_name("w", free_vars(d->body)));
    HostTerm boxed = make::box(w, t->circ_in(), make::unbox(make::var(entry, d->span), w, d->span), d->span);
    HostNormalizeResult n = normalize_host(boxed, options, &p);
    r.text = pretty_print(n.trace.empty() ? d->body : n.term);
    r.trace = std::move(n.trace);
    r.step_limit = n.step_limit;
  } else {
    HostNormalizeResult n = normalize_host(d->body, options, &p);
    r.text = pretty_print(n.term);
    r.trace = std::move(n.trace);
    r.step_limit = n.step_limit;
  }
  return r;
}

}  // namespace ewire
