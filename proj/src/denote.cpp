#include "ewire/denote.hpp"

#include <pthread.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "ewire/gates.hpp"

namespace ewire {

const char* to_string(Mode m) { return m == Mode::CPU ? "cpu" : "cpsu"; }

FdAlgebra denote_wire(const WireType& w) {
  FdAlgebra a;
  switch (w.kind()) {
    case WireType::Kind::Unit: return FdAlgebra::scalar();
    case WireType::Kind::Classical: a = FdAlgebra::classical(w.size()); break;
    case WireType::Kind::Quantum:
      if (w.is_qlist_base()) throw EvalError("qlist has no fixed-size algebra; give it a length");
      a = FdAlgebra::matrix(w.size());
      break;
    case WireType::Kind::Tensor: a = alg_tensor(denote_wire(w.left()), denote_wire(w.right())); break;
  }
  check_dim(a.element_dim(), "wire type");
  return a;
}

// ---------------------------------------------------------------------------
// Environments, supports, values
// ---------------------------------------------------------------------------

Env env_bind(const Env& env, std::string name, Value v) {
  return std::make_shared<const EnvNode>(EnvNode{std::move(name), std::move(v), env});
}

const Value* env_lookup(const Env& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n; n = n->next.get())
    if (n->name == name) return &n->value;
  return nullptr;
}

SupportPtr support_top() {
  static const SupportPtr top = std::make_shared<const Support>();
  return top;
}

SupportPtr support_values(std::set<std::int64_t> values) {
  auto s = std::make_shared<Support>();
  s->kind = Support::Kind::Values;
  s->values = std::move(values);
  return s;
}

SupportPtr support_pair(SupportPtr a, SupportPtr b) {
  if (a->kind == Support::Kind::Top && b->kind == Support::Kind::Top) return support_top();
  auto s = std::make_shared<Support>();
  s->kind = Support::Kind::Pair;
  s->first = std::move(a);
  s->second = std::move(b);
  return s;
}

SupportPtr support_union(const SupportPtr& a, const SupportPtr& b) {
  if (!a || !b || a->kind != b->kind || a->kind == Support::Kind::Top) return support_top();
  if (a->kind == Support::Kind::Values) {
    std::set<std::int64_t> u = a->values;
    u.insert(b->values.begin(), b->values.end());
    return support_values(std::move(u));
  }
  return support_pair(support_union(a->first, b->first), support_union(a->second, b->second));
}

namespace {

SupportPtr norm(const SupportPtr& s) { return s ? s : support_top(); }

std::pair<SupportPtr, SupportPtr> split(const SupportPtr& s) {
  if (s && s->kind == Support::Kind::Pair) return {s->first, s->second};
  return {support_top(), support_top()};
}

std::string support_key(const SupportPtr& s) {
  if (!s || s->kind == Support::Kind::Top) return "*";
  if (s->kind == Support::Kind::Pair) return "(" + support_key(s->first) + "," + support_key(s->second) + ")";
  std::string k = "{";
  for (auto v : s->values) k += std::to_string(v) + ";";
  return k + "}";
}

std::int64_t cardinality(const WireType& v) {
  switch (v.kind()) {
    case WireType::Kind::Unit: return 1;
    case WireType::Kind::Classical: return v.size();
    case WireType::Kind::Tensor: return cardinality(v.left()) * cardinality(v.right());
    case WireType::Kind::Quantum: break;
  }
  throw TypeError(TypeErrorKind::NotClassical, {}, "wire type " + pretty_print(v) + " is not classical");
}

// Is classical index `idx` of type v allowed by s?
bool admits(const SupportPtr& s, const WireType& v, std::int64_t idx) {
  if (!s || s->kind == Support::Kind::Top) return true;
  if (s->kind == Support::Kind::Values) return s->values.count(idx) > 0;
  if (!v.is_tensor()) return true;
  const std::int64_t r = cardinality(v.right());
  return admits(s->first, v.left(), idx / r) && admits(s->second, v.right(), idx % r);
}

SupportPtr support_of_value(const Value& v) {
  switch (v->kind) {
    case ValueKind::Int:
    case ValueKind::Classical: return support_values({v->num});
    case ValueKind::Pair: return support_pair(support_of_value(v->first), support_of_value(v->second));
    default: return support_top();
  }
}

}  // namespace

double Distribution::mass() const {
  double m = 0;
  for (const auto& o : outcomes) m += o.second;
  return m;
}

double Distribution::diverge_mass() const { return std::max(0.0, 1.0 - mass()); }

namespace value {
Value unit() {
  static const Value u = std::make_shared<const ValueNode>();
  return u;
}
Value integer(std::int64_t n) {
  auto v = std::make_shared<ValueNode>();
  v->kind = ValueKind::Int;
  v->num = n;
  return v;
}
Value classical(const std::string& base, int card, std::int64_t x) {
  auto v = std::make_shared<ValueNode>();
  v->kind = ValueKind::Classical;
  v->base = base;
  v->card = card;
  v->num = x;
  return v;
}
Value bit(bool b) { return classical("bit", 2, b ? 1 : 0); }
Value pair(Value a, Value b) {
  auto v = std::make_shared<ValueNode>();
  v->kind = ValueKind::Pair;
  v->first = std::move(a);
  v->second = std::move(b);
  return v;
}
Value closure(std::string param, HostTerm body, Env env) {
  auto v = std::make_shared<ValueNode>();
  v->kind = ValueKind::Closure;
  v->param = std::move(param);
  v->body = std::move(body);
  v->env = std::move(env);
  return v;
}
Value circ(std::shared_ptr<const CircValue> c) {
  auto v = std::make_shared<ValueNode>();
  v->kind = ValueKind::Circ;
  v->circ = std::move(c);
  return v;
}
Value dist(Distribution d) {
  auto v = std::make_shared<ValueNode>();
  v->kind = ValueKind::Dist;
  v->dist = std::make_shared<const Distribution>(std::move(d));
  return v;
}
}  // namespace value

bool values_equal(const Value& a, const Value& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ValueKind::Unit: return true;
    case ValueKind::Int: return a->num == b->num;
    case ValueKind::Classical: return a->num == b->num && a->base == b->base;
    case ValueKind::Pair: return values_equal(a->first, b->first) && values_equal(a->second, b->second);
    default: return false;
  }
}

std::string format_value(const Value& v) {
  switch (v->kind) {
    case ValueKind::Unit: return "()";
    case ValueKind::Int:
    case ValueKind::Classical: return std::to_string(v->num);
    case ValueKind::Pair: return "(" + format_value(v->first) + ", " + format_value(v->second) + ")";
    case ValueKind::Closure:
    case ValueKind::FixCombinator:
    case ValueKind::Fix: return "<function>";
    case ValueKind::Circ: return "<circuit>";
    case ValueKind::Dist: {
      std::string s = "{";
      for (size_t i = 0; i < v->dist->outcomes.size(); ++i)
        s += (i ? ", " : "") + format_value(v->dist->outcomes[i].first) + ": " +
             std::to_string(v->dist->outcomes[i].second);
      return s + "}";
    }
  }
  return "?";
}

std::int64_t encode_classical(const WireType& v, const Value& x) {
  switch (v.kind()) {
    case WireType::Kind::Unit: return 0;
    case WireType::Kind::Classical:
      if (x->kind != ValueKind::Int && x->kind != ValueKind::Classical)
        throw EvalError("expected a classical value of type " + pretty_print(v));
      if (x->num < 0 || x->num >= v.size())
        throw EvalError("value " + std::to_string(x->num) + " does not fit wire type " + v.name() +
                        " of cardinality " + std::to_string(v.size()));
      return x->num;
    case WireType::Kind::Tensor:
      if (x->kind != ValueKind::Pair) throw EvalError("expected a pair for type " + pretty_print(v));
      return encode_classical(v.left(), x->first) * cardinality(v.right()) +
             encode_classical(v.right(), x->second);
    case WireType::Kind::Quantum: break;
  }
  throw TypeError(TypeErrorKind::NotClassical, {}, "wire type " + pretty_print(v) + " is not classical");
}

Value decode_classical(const WireType& v, std::int64_t index) {
  switch (v.kind()) {
    case WireType::Kind::Unit: return value::unit();
    case WireType::Kind::Classical:
      if (v.name() == "int") return value::integer(index);
      return value::classical(v.name(), v.size(), index);
    case WireType::Kind::Tensor: {
      const std::int64_t r = cardinality(v.right());
      return value::pair(decode_classical(v.left(), index / r), decode_classical(v.right(), index % r));
    }
    case WireType::Kind::Quantum: break;
  }
  throw TypeError(TypeErrorKind::NotClassical, {}, "wire type " + pretty_print(v) + " is not classical");
}

std::vector<Value> enumerate_classical(const WireType& v) {
  const std::int64_t n = cardinality(v);
  std::vector<Value> out;
  out.reserve(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out.push_back(decode_classical(v, i));
  return out;
}

// ---------------------------------------------------------------------------
// Index bookkeeping
// ---------------------------------------------------------------------------

namespace {

using Perm = std::vector<std::int64_t>;

std::int64_t dim_of(const WireType& w) { return denote_wire(w).element_dim(); }

// Product over the pattern's leaves (each canonical) -> canonical index of t.
Perm canon_of(const Pattern& p, const WireType& t) {
  switch (p.kind()) {
    case Pattern::Kind::Unit: return Perm{0};
    case Pattern::Kind::Wire: {
      Perm id(static_cast<size_t>(dim_of(t)));
      std::iota(id.begin(), id.end(), 0);
      return id;
    }
    case Pattern::Kind::Pair: {
      if (!t.is_tensor()) throw EvalError("pattern " + pretty_print(p) + " does not match " + pretty_print(t));
      const Perm a = canon_of(p.first(), t.left());
      const Perm b = canon_of(p.second(), t.right());
      const Perm tp = tensor_permutation(denote_wire(t.left()), denote_wire(t.right()));
      const std::int64_t db = static_cast<std::int64_t>(b.size());
      Perm out(a.size() * b.size());
      for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = tp[a[i] * db + b[j]];
      return out;
    }
  }
  return {};
}

bool is_identity(const Perm& p) {
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] != static_cast<std::int64_t>(i)) return false;
  return true;
}

// Negative sources give zero rows.
Matrix gather_rows(const Matrix& m, const Perm& src) {
  if (static_cast<std::int64_t>(src.size()) == m.rows() && is_identity(src)) return m;
  Matrix out(static_cast<Eigen::Index>(src.size()), m.cols());
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i] < 0)
      out.row(static_cast<Eigen::Index>(i)).setZero();
    else
      out.row(static_cast<Eigen::Index>(i)) = m.row(src[i]);
  }
  return out;
}

}  // namespace


namespace detail {

// A wire of the context. A classical wire whose possible values are known
// is indexed by those values only (`indices`); other values carry no mass.
struct Slot {
  std::string name;
  WireType type;
  std::int64_t dim = 1;
  SupportPtr support;
  std::vector<std::int64_t> indices;
};

struct Den {
  Matrix m;  // rows: product over the context, columns: canonical ⟦out⟧
  WireType out;
  SupportPtr support;
};

}  // namespace detail

namespace {

using detail::Den;
using detail::Slot;
using Slots = std::vector<Slot>;

Slot make_slot(const std::string& name, const WireType& t, SupportPtr s) {
  Slot slot{name, t, dim_of(t), norm(s), {}};
  if (t.kind() == WireType::Kind::Classical && slot.support->kind == Support::Kind::Values) {
    for (auto v : slot.support->values)
      if (v >= 0 && v < t.size()) slot.indices.push_back(v);
    if (slot.indices.empty() || static_cast<std::int64_t>(slot.indices.size()) == slot.dim)
      slot.indices.clear();
    else
      slot.dim = static_cast<std::int64_t>(slot.indices.size());
  }
  return slot;
}

// Restricted leaf product of the pattern -> canonical index of t.
Perm leaf_canon(const Pattern& p, const WireType& t, const Slots& leaves) {
  Perm full = canon_of(p, t);
  if (std::all_of(leaves.begin(), leaves.end(), [](const Slot& s) { return s.indices.empty(); })) return full;
  const size_t n = leaves.size();
  std::vector<std::int64_t> stride(n);
  std::int64_t acc = 1;
  for (size_t k = n; k-- > 0;) {
    stride[k] = acc;
    acc *= dim_of(leaves[k].type);
  }
  std::int64_t total = 1;
  for (const auto& s : leaves) total *= s.dim;
  Perm out(static_cast<size_t>(total));
  std::vector<std::int64_t> digit(n, 0);
  for (std::int64_t r = 0; r < total; ++r) {
    std::int64_t f = 0;
    for (size_t k = 0; k < n; ++k)
      f += (leaves[k].indices.empty() ? digit[k] : leaves[k].indices[digit[k]]) * stride[k];
    out[static_cast<size_t>(r)] = full[static_cast<size_t>(f)];
    for (size_t k = n; k-- > 0;) {
      if (++digit[k] < leaves[k].dim) break;
      digit[k] = 0;
    }
  }
  return out;
}

// Canonical index -> restricted leaf product index, -1 when not represented.
Perm leaf_canon_inverse(const Pattern& p, const WireType& t, const Slots& leaves) {
  const Perm fwd = leaf_canon(p, t, leaves);
  Perm inv(static_cast<size_t>(dim_of(t)), -1);
  for (size_t i = 0; i < fwd.size(); ++i) inv[static_cast<size_t>(fwd[i])] = static_cast<std::int64_t>(i);
  return inv;
}

const Slot& find_slot(const Slots& ctx, const std::string& name) {
  for (const auto& s : ctx)
    if (s.name == name) return s;
  throw EvalError("wire " + name + " is not in the denotation context");
}

// Slots of the pattern's wires, in pattern order.
Slots pattern_slots(const Pattern& p, const Slots& ctx) {
  Slots out;
  for (const auto& w : p.wires()) out.push_back(find_slot(ctx, w));
  return out;
}

Slots without(const Slots& ctx, const Pattern& p) {
  const auto ws = p.wires();
  Slots out;
  for (const auto& s : ctx)
    if (std::find(ws.begin(), ws.end(), s.name) == ws.end()) out.push_back(s);
  return out;
}

WireType pattern_type(const Pattern& p, const Slots& ctx) {
  switch (p.kind()) {
    case Pattern::Kind::Unit: return WireType::unit();
    case Pattern::Kind::Wire: return find_slot(ctx, p.name()).type;
    case Pattern::Kind::Pair: return WireType::tensor(pattern_type(p.first(), ctx), pattern_type(p.second(), ctx));
  }
  return WireType::unit();
}

SupportPtr pattern_support(const Pattern& p, const Slots& ctx) {
  switch (p.kind()) {
    case Pattern::Kind::Unit: return support_top();
    case Pattern::Kind::Wire: return find_slot(ctx, p.name()).support;
    case Pattern::Kind::Pair:
      return support_pair(pattern_support(p.first(), ctx), pattern_support(p.second(), ctx));
  }
  return support_top();
}

void destructure(const Pattern& p, const WireType& t, const SupportPtr& s, Slots* out) {
  switch (p.kind()) {
    case Pattern::Kind::Unit:
      if (!t.is_unit()) throw EvalError("pattern () does not match " + pretty_print(t));
      return;
    case Pattern::Kind::Wire: out->push_back(make_slot(p.name(), t, s)); return;
    case Pattern::Kind::Pair: {
      if (!t.is_tensor()) throw EvalError("pattern " + pretty_print(p) + " does not match " + pretty_print(t));
      auto [a, b] = split(s);
      destructure(p.first(), t.left(), a, out);
      destructure(p.second(), t.right(), b, out);
      return;
    }
  }
}

std::int64_t total_dim(const Slots& ctx) {
  std::int64_t d = 1;
  for (const auto& s : ctx) d *= s.dim;
  return d;
}

// map[t] = index in the product over `src` of the index t of the product over
// `tgt`; both list the same wires.
Perm axis_map(const Slots& src, const Slots& tgt) {
  const size_t n = tgt.size();
  std::vector<std::int64_t> src_stride(src.size());
  std::int64_t acc = 1;
  for (size_t i = src.size(); i-- > 0;) {
    src_stride[i] = acc;
    acc *= src[i].dim;
  }
  std::vector<std::int64_t> stride(n), dims(n);
  bool identity = src.size() == n;
  for (size_t k = 0; k < n; ++k) {
    size_t j = 0;
    while (j < src.size() && src[j].name != tgt[k].name) ++j;
    if (j == src.size()) throw EvalError("wire " + tgt[k].name + " missing from a context permutation");
    stride[k] = src_stride[j];
    dims[k] = tgt[k].dim;
    if (j != k) identity = false;
  }
  Perm out(static_cast<size_t>(acc));
  if (identity) {
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  std::vector<std::int64_t> digit(n, 0);
  std::int64_t s = 0;
  for (std::int64_t t = 0; t < acc; ++t) {
    out[static_cast<size_t>(t)] = s;
    for (size_t k = n; k-- > 0;) {
      if (++digit[k] < dims[k]) {
        s += stride[k];
        break;
      }
      s -= stride[k] * (dims[k] - 1);
      digit[k] = 0;
    }
  }
  return out;
}

Slots concat(const Slots& a, const Slots& b) {
  Slots out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Wire type of a first-order value.
WireType value_wire_type(const Value& v, int int_card) {
  switch (v->kind) {
    case ValueKind::Unit: return WireType::unit();
    case ValueKind::Int: return WireType::classical("int", int_card);
    case ValueKind::Classical: return WireType::classical(v->base, v->card);
    case ValueKind::Pair:
      return WireType::tensor(value_wire_type(v->first, int_card), value_wire_type(v->second, int_card));
    default: throw EvalError("init needs a first-order classical value");
  }
}

// Length of a concrete list type qubit * (qubit * ... * I).
std::optional<int> list_length(const WireType& t) {
  int k = 0;
  const WireType* w = &t;
  while (w->is_tensor()) {
    if (w->left() != WireType::qubit()) return std::nullopt;
    ++k;
    w = &w->right();
  }
  if (!w->is_unit()) return std::nullopt;
  return k;
}

Value build_value(const Pattern& p, const Slots& leaves, const std::vector<std::int64_t>& digits,
                  size_t* next) {
  switch (p.kind()) {
    case Pattern::Kind::Unit: return value::unit();
    case Pattern::Kind::Wire: {
      const size_t i = (*next)++;
      return decode_classical(leaves[i].type, digits[i]);
    }
    case Pattern::Kind::Pair: {
      Value a = build_value(p.first(), leaves, digits, next);
      return value::pair(a, build_value(p.second(), leaves, digits, next));
    }
  }
  return value::unit();
}

SuperOp instance_op(Matrix m, const WireType& in, const WireType& out) {
  return SuperOp{denote_wire(out), denote_wire(in), std::move(m)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

Evaluator::Evaluator(Program elaborated, EvalOptions options)
    : program_(std::move(elaborated)), options_(options), fuel_(options.fuel) {}

Value Evaluator::evaluate(const HostTerm& t, const Env& env) {
  reset_fuel();
  Value out;
  run_with_stack([&] { out = eval(t, env); });
  return out;
}

Value Evaluator::global(const std::string& name) {
  auto it = globals_.find(name);
  if (it != globals_.end()) return it->second;
  const Declaration* d = program_.find(name);
  if (!d || !d->body) throw EvalError("unbound variable '" + name + "'");
  if (!evaluating_.insert(name).second) throw EvalError("cyclic definition of '" + name + "'");
  Value v;
  try {
    v = eval(d->body, nullptr);
  } catch (...) {
    evaluating_.erase(name);
    throw;
  }
  evaluating_.erase(name);
  globals_[name] = v;
  return v;
}

Value Evaluator::bottom_circ(const WireType& in, const WireType& out) {
  auto c = std::make_shared<CircValue>();
  c->in = in;
  c->out = out;
  c->bottom = true;
  if (in.mentions_qlist() || out.mentions_qlist()) {
    c->lazy = true;
  } else {
    const FdAlgebra src = denote_wire(out), tgt = denote_wire(in);
    c->eager = std::make_shared<const CircInstance>(CircInstance{op_zero(src, tgt), out, support_top()});
  }
  return value::circ(c);
}

Value Evaluator::apply(const Value& f, const Value& arg) {
  switch (f->kind) {
    case ValueKind::Closure: return eval(f->body, env_bind(f->env, f->param, arg));
    case ValueKind::FixCombinator: {
      auto v = std::make_shared<ValueNode>();
      v->kind = ValueKind::Fix;
      v->first = arg;
      v->fix_in = f->fix_in;
      v->fix_out = f->fix_out;
      return v;
    }
    case ValueKind::Fix: {
      if (options_.mode == Mode::CPU)
        throw EvalError("recursion through fix needs the subunital model; use --mode cpsu");
      if (fuel_ <= 0) return bottom_circ(f->fix_in, f->fix_out);
      --fuel_;
      return apply(apply(f->first, f), arg);
    }
    default: throw EvalError("applying a non-function value");
  }
}

Value Evaluator::make_box(const HostNode& t, const Env& env) {
  auto c = std::make_shared<CircValue>();
  c->in = *t.wtype;
  c->pat = t.pat;
  c->body = t.circ;
  c->env = env;
  if (t.wtype->mentions_qlist()) {
    c->lazy = true;
  } else {
    auto inst = std::make_shared<const CircInstance>(box_instance(t.pat, *t.wtype, t.circ, env, support_top()));
    c->out = inst->out;
    c->eager = inst;
  }
  return value::circ(c);
}

CircInstance Evaluator::box_instance(const Pattern& p, const WireType& in, const CircuitTerm& body,
                                     const Env& env, const SupportPtr& support) {
  Slots slots;
  destructure(p, in, norm(support), &slots);
  Den d = denote(body, slots, env);
  const Perm canon = leaf_canon(p, in, slots);
  Matrix m = Matrix::Zero(dim_of(in), d.m.cols());
  for (size_t l = 0; l < canon.size(); ++l) m.row(canon[l]) = d.m.row(static_cast<Eigen::Index>(l));
  return CircInstance{instance_op(std::move(m), in, d.out), d.out, d.support};
}

std::shared_ptr<const CircInstance> Evaluator::instantiate(const CircValue& c, const WireType& concrete_in,
                                                           const SupportPtr& support) {
  if (!c.lazy) {
    if (!c.eager) throw EvalError("circuit value without a denotation");
    if (c.in != concrete_in)
      throw EvalError("circuit expects " + pretty_print(c.in) + ", got " + pretty_print(concrete_in));
    return c.eager;
  }
  if (c.bottom)
    throw ResourceError("fuel exhausted while unfolding a circuit over qlist; its size is unknown (raise --fuel)");
  const std::string key = pretty_print(concrete_in) + "|" + support_key(support);
  auto it = c.memo.find(key);
  if (it != c.memo.end()) return it->second;
  auto inst = std::make_shared<const CircInstance>(box_instance(c.pat, concrete_in, c.body, c.env, support));
  c.memo[key] = inst;
  return inst;
}

SuperOp Evaluator::denote_circuit(const WireContext& omega, const CircuitTerm& c, const Env& env,
                                  WireType* out) {
  Slots slots;
  WireType in = WireType::unit();
  Pattern p;
  for (size_t i = omega.size(); i-- > 0;) {
    in = i + 1 == omega.size() ? omega[i].second : WireType::tensor(omega[i].second, in);
    p = i + 1 == omega.size() ? Pattern::wire(omega[i].first) : Pattern::pair(Pattern::wire(omega[i].first), p);
  }
  for (const auto& [name, type] : omega) slots.push_back(make_slot(name, type, support_top()));
  Den d;
  run_with_stack([&] { d = denote(c, slots, env); });
  if (out) *out = d.out;
  const Perm canon = canon_of(p, in);
  Matrix m = Matrix::Zero(d.m.rows(), d.m.cols());
  for (size_t l = 0; l < canon.size(); ++l) m.row(canon[l]) = d.m.row(static_cast<Eigen::Index>(l));
  return instance_op(std::move(m), in, d.out);
}

Distribution Evaluator::run_circuit(const CircuitTerm& c, const Env& env) {
  Den d = denote(c, {}, env);
  if (!d.out.is_classical()) throw EvalError("NonClassicalSource: run needs a classical output");
  Distribution dist;
  for (Eigen::Index v = 0; v < d.m.cols(); ++v) {
    const double w = d.m(0, v).real();
    if (std::abs(w) < 1e-13) continue;
    dist.outcomes.emplace_back(decode_classical(d.out, v), w);
  }
  return dist;
}

Value Evaluator::run_value(const CircuitTerm& c, const Env& env) { return value::dist(run_circuit(c, env)); }

Den Evaluator::gate_app(const GateRef& g, const Pattern& in, const Slots& ctx1) {
  const WireType t = pattern_type(in, ctx1);
  const Perm canon = leaf_canon(in, t, ctx1);
  if (g.name == "isempty") {
    auto k = list_length(t);
    if (!k) throw EvalError("isempty applied to a non-list wire of type " + pretty_print(t));
    const std::int64_t d = dim_of(t);
    const std::int64_t b = *k == 0 ? 1 : 0;
    Den r;
    r.out = WireType::tensor(WireType::bit(), t);
    r.m = Matrix::Zero(static_cast<Eigen::Index>(canon.size()), 2 * d);
    for (size_t l = 0; l < canon.size(); ++l) r.m(static_cast<Eigen::Index>(l), b * d + canon[l]) = 1.0;
    r.support = support_pair(support_values({b}), support_top());
    return r;
  }
  SuperOp op = gate_denotation(g.name, g.index);
  if (!g.in || *g.in != t || !g.out)
    throw EvalError("gate " + g.display() + " applied at type " + pretty_print(t));
  Den r;
  r.out = *g.out;
  r.m = gather_rows(op.matrix, canon);
  r.support = support_top();
  if (g.name.rfind("bit-control ", 0) == 0)
    r.support = support_pair(split(pattern_support(in, ctx1)).first, support_top());
  return r;
}

Den Evaluator::rebind(const Pattern& from, const Pattern& to, const CircuitTerm& rest, const Slots& ctx,
                      const Env& env) {
  const Slots from_slots = pattern_slots(from, ctx);
  const Slots ctx2 = without(ctx, from);
  const WireType t = pattern_type(from, ctx);
  Slots to_slots;
  destructure(to, t, pattern_support(from, ctx), &to_slots);
  Den d = denote(rest, concat(to_slots, ctx2), env);
  const Perm canon_from = leaf_canon(from, t, from_slots);
  const Perm inv_to = leaf_canon_inverse(to, t, to_slots);
  const Perm amap = axis_map(concat(from_slots, ctx2), ctx);
  const std::int64_t c2 = total_dim(ctx2);
  Perm src(amap.size());
  for (size_t r = 0; r < amap.size(); ++r) {
    const std::int64_t q = amap[r] / c2, rem = amap[r] % c2;
    const std::int64_t lt = inv_to[canon_from[q]];
    src[r] = lt < 0 ? -1 : lt * c2 + rem;
  }
  d.m = gather_rows(d.m, src);
  return d;
}

Den Evaluator::compose_with(Den first, const Slots& ctx1, const Pattern& p, const CircuitTerm& rest,
                            const Slots& ctx2, const Slots& ctx, const Env& env) {
  const WireType t1 = first.out;
  Slots leaves;
  destructure(p, t1, first.support, &leaves);
  const Perm canon = leaf_canon(p, t1, leaves);
  Matrix d1(first.m.rows(), static_cast<Eigen::Index>(canon.size()));
  for (size_t l = 0; l < canon.size(); ++l) d1.col(static_cast<Eigen::Index>(l)) = first.m.col(canon[l]);

  if (rest->kind == CircuitKind::Output && ctx2.empty()) {
    // p <- C1; output q: only a column permutation.
    const Pattern& q = rest->pat;
    const WireType t2 = pattern_type(q, leaves);
    const Slots qslots = pattern_slots(q, leaves);
    const Perm inv2 = leaf_canon_inverse(q, t2, qslots);
    const Perm amap = axis_map(leaves, qslots);
    Den r;
    r.out = t2;
    r.support = pattern_support(q, leaves);
    r.m.resize(d1.rows(), static_cast<Eigen::Index>(inv2.size()));
    for (size_t e = 0; e < inv2.size(); ++e) {
      if (inv2[e] < 0)
        r.m.col(static_cast<Eigen::Index>(e)).setZero();
      else
        r.m.col(static_cast<Eigen::Index>(e)) = d1.col(amap[inv2[e]]);
    }
    r.m = gather_rows(r.m, axis_map(ctx1, ctx));
    return r;
  }

  Den d2 = denote(rest, concat(leaves, ctx2), env);
  const Eigen::Index a = d1.rows(), b = d1.cols();
  const Eigen::Index c = total_dim(ctx2), e = d2.m.cols();
  if (d2.m.rows() != b * c) throw EvalError("internal: composite dimensions disagree");
  Eigen::Map<const Matrix> d2v(d2.m.data(), b, c * e);
  Matrix prod = d1 * d2v;
  Den r;
  r.out = d2.out;
  r.support = d2.support;
  r.m = Eigen::Map<const Matrix>(prod.data(), a * c, e);
  r.m = gather_rows(r.m, axis_map(concat(ctx1, ctx2), ctx));
  return r;
}

Den Evaluator::denote(const CircuitTerm& c, const Slots& ctx, const Env& env) {
  check_dim(total_dim(ctx), "wire context");
  switch (c->kind) {
    case CircuitKind::Output: {
      const Slots leaves = pattern_slots(c->pat, ctx);
      const WireType t = pattern_type(c->pat, ctx);
      const Perm canon = leaf_canon(c->pat, t, leaves);
      const Perm amap = axis_map(leaves, ctx);
      Den r;
      r.out = t;
      r.support = pattern_support(c->pat, ctx);
      r.m = Matrix::Zero(static_cast<Eigen::Index>(amap.size()), dim_of(t));
      for (size_t row = 0; row < amap.size(); ++row) r.m(static_cast<Eigen::Index>(row), canon[amap[row]]) = 1.0;
      return r;
    }
    case CircuitKind::Compose: {
      if (c->first->kind == CircuitKind::Output) return rebind(c->first->pat, c->pat, c->rest, ctx, env);
      const auto fw = free_wires(c->first);
      Slots ctx1, ctx2;
      for (const auto& s : ctx)
        (std::find(fw.begin(), fw.end(), s.name) != fw.end() ? ctx1 : ctx2).push_back(s);
      Den d1 = denote(c->first, ctx1, env);
      return compose_with(std::move(d1), ctx1, c->pat, c->rest, ctx2, ctx, env);
    }
    case CircuitKind::UnitElim: return rebind(c->pat, Pattern::unit(), c->rest, ctx, env);
    case CircuitKind::PairElim:
      return rebind(c->pat, Pattern::pair(Pattern::wire(c->name), Pattern::wire(c->name2)), c->rest, ctx, env);
    case CircuitKind::Gate: {
      const std::string& g = c->gate.name;
      if (g == "headtail" || g == "nil" || g == "cons") {
        // Structural on concrete lists: qubit * qlist(k) is qlist(k + 1).
        if (g == "headtail" && list_length(pattern_type(c->pat_in, ctx)) == 0)
          throw EvalError("headtail applied to an empty list");
        return rebind(c->pat_in, c->pat, c->rest, ctx, env);
      }
      const Slots ctx1 = pattern_slots(c->pat_in, ctx);
      const Slots ctx2 = without(ctx, c->pat_in);
      Den d1 = gate_app(c->gate, c->pat_in, ctx1);
      return compose_with(std::move(d1), ctx1, c->pat, c->rest, ctx2, ctx, env);
    }
    case CircuitKind::Unbox: {
      Value v = eval(c->host, env);
      if (v->kind != ValueKind::Circ) throw EvalError("unbox of a non-circuit value");
      const WireType t = pattern_type(c->pat, ctx);
      auto inst = instantiate(*v->circ, t, pattern_support(c->pat, ctx));
      const Slots leaves = pattern_slots(c->pat, ctx);
      const Perm canon = leaf_canon(c->pat, t, leaves);
      const Perm amap = axis_map(leaves, ctx);
      Perm src(amap.size());
      for (size_t r = 0; r < amap.size(); ++r) src[r] = canon[amap[r]];
      return Den{gather_rows(inst->op.matrix, src), inst->out, inst->support};
    }
    case CircuitKind::Lift: {
      const Slots leaves = pattern_slots(c->pat, ctx);
      const Slots ctx2 = without(ctx, c->pat);
      // Allowed indices per leaf.
      std::vector<std::vector<std::int64_t>> allowed;
      for (const auto& s : leaves) {
        std::vector<std::int64_t> vals;  // positions within the slot
        for (std::int64_t i = 0; i < s.dim; ++i) {
          const std::int64_t v = s.indices.empty() ? i : s.indices[i];
          if (admits(s.support, s.type, v)) vals.push_back(i);
        }
        allowed.push_back(std::move(vals));
      }
      const std::int64_t c2 = total_dim(ctx2);
      const std::int64_t nrows = total_dim(leaves) * c2;
      std::optional<Den> acc;
      Matrix m;
      std::vector<size_t> pos(leaves.size(), 0);
      bool done = std::any_of(allowed.begin(), allowed.end(), [](const auto& v) { return v.empty(); });
      while (!done) {
        std::vector<std::int64_t> digits(leaves.size());
        std::int64_t block = 0;
        for (size_t k = 0; k < leaves.size(); ++k) {
          digits[k] = allowed[k][pos[k]];
          block = block * leaves[k].dim + digits[k];
        }
        std::vector<std::int64_t> values(leaves.size());
        for (size_t k = 0; k < leaves.size(); ++k)
          values[k] = leaves[k].indices.empty() ? digits[k] : leaves[k].indices[digits[k]];
        size_t next = 0;
        Value x = build_value(c->pat, leaves, values, &next);
        Den d = denote(c->rest, ctx2, env_bind(env, c->name, x));
        if (!acc) {
          acc = Den{Matrix(), d.out, d.support};
          m = Matrix::Zero(nrows, d.m.cols());
        } else {
          if (d.out != acc->out)
            throw EvalError("lift branches produce different wire types: " + pretty_print(acc->out) + " and " +
                            pretty_print(d.out));
          acc->support = support_union(acc->support, d.support);
        }
        m.middleRows(block * c2, c2) = d.m;
        done = true;
        for (size_t k = leaves.size(); k-- > 0;) {
          if (++pos[k] < allowed[k].size()) {
            done = false;
            break;
          }
          pos[k] = 0;
        }
      }
      if (!acc) throw EvalError("lift over a wire with no possible values");
      acc->m = gather_rows(m, axis_map(concat(leaves, ctx2), ctx));
      return *acc;
    }
    case CircuitKind::Init: {
      if (!ctx.empty()) throw EvalError("init with live wires");
      Value v = eval(c->host, env);
      const WireType t = value_wire_type(v, program_.int_cardinality());
      const std::int64_t k = cardinality(t);
      Den r;
      r.out = t;
      r.m = Matrix::Zero(1, k);
      r.m(0, encode_classical(t, v)) = 1.0;
      r.support = support_of_value(v);
      return r;
    }
    case CircuitKind::QLift:
    case CircuitKind::Call: throw EvalError("circuit sugar reached the evaluator; elaborate first");
  }
  throw EvalError("unknown circuit form");
}

Value Evaluator::eval(const HostTerm& t, const Env& env) {
  switch (t->kind) {
    case HostKind::Var: {
      if (const Value* v = env_lookup(env, t->name)) return *v;
      return global(t->name);
    }
    case HostKind::Lambda: return value::closure(t->name, t->a, env);
    case HostKind::App: {
      Value f = eval(t->a, env);
      return apply(f, eval(t->b, env));
    }
    case HostKind::UnitVal: return value::unit();
    case HostKind::Pair: {
      Value a = eval(t->a, env);
      return value::pair(a, eval(t->b, env));
    }
    case HostKind::Proj1:
    case HostKind::Proj2: {
      Value p = eval(t->a, env);
      if (p->kind != ValueKind::Pair) throw EvalError("projection from a non-pair");
      return t->kind == HostKind::Proj1 ? p->first : p->second;
    }
    case HostKind::Return: {
      Distribution d;
      d.outcomes.emplace_back(eval(t->a, env), 1.0);
      return value::dist(std::move(d));
    }
    case HostKind::LetBind: {
      Value m = eval(t->a, env);
      if (m->kind != ValueKind::Dist) throw EvalError("let <- of a non-distribution");
      Distribution out;
      for (const auto& [x, w] : m->dist->outcomes) {
        Value k = eval(t->b, env_bind(env, t->name, x));
        if (k->kind != ValueKind::Dist) throw EvalError("let <- body is not a distribution");
        for (const auto& [y, w2] : k->dist->outcomes) {
          auto it = std::find_if(out.outcomes.begin(), out.outcomes.end(),
                                 [&](const auto& o) { return values_equal(o.first, y); });
          if (it == out.outcomes.end())
            out.outcomes.emplace_back(y, w * w2);
          else
            it->second += w * w2;
        }
      }
      return value::dist(std::move(out));
    }
    case HostKind::Box: return make_box(*t, env);
    case HostKind::Run: return run_value(t->circ, env);
    case HostKind::ClassicalLit: return value::classical(t->name, t->cardinality, t->value);
    case HostKind::If: {
      Value c = eval(t->a, env);
      if (c->kind != ValueKind::Classical) throw EvalError("if condition is not a bit");
      return eval(c->num != 0 ? t->b : t->c, env);
    }
    case HostKind::IntLit: return value::integer(t->value);
    case HostKind::BinOp: {
      Value a = eval(t->a, env);
      Value b = eval(t->b, env);
      switch (t->op) {
        case BinOpKind::Add: return value::integer(a->num + b->num);
        case BinOpKind::Sub: return value::integer(a->num - b->num);
        case BinOpKind::Eq: return value::bit(a->num == b->num);
        case BinOpKind::Lt: return value::bit(a->num < b->num);
      }
      break;
    }
    case HostKind::Fix: {
      if (!t->wtype || !t->wtype2) throw EvalError("fix without a resolved signature");
      auto v = std::make_shared<ValueNode>();
      v->kind = ValueKind::FixCombinator;
      v->fix_in = *t->wtype;
      v->fix_out = *t->wtype2;
      return v;
    }
    case HostKind::GateFamily: {
      Value n = eval(t->a, env);
      if (n->num < 0) throw EvalError(t->name + " " + std::to_string(n->num) + ": negative rotation index");
      const WireType q = WireType::qubit();
      const WireType w = t->name == "CR" ? WireType::tensor(q, q) : q;
      auto c = std::make_shared<CircValue>();
      c->in = w;
      c->out = w;
      c->eager = std::make_shared<const CircInstance>(
          CircInstance{gate_denotation(t->name, n->num), w, support_top()});
      return value::circ(c);
    }
    case HostKind::QRun:
    case HostKind::MeasW:
    case HostKind::NewW: throw EvalError("host sugar reached the evaluator; elaborate first");
  }
  throw EvalError("unknown host form");
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::int64_t>> sample(const Distribution& d, std::uint64_t seed,
                                                         std::int64_t shots) {
  std::uint64_t state = seed;
  auto next = [&state] {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  std::vector<std::pair<std::string, std::int64_t>> counts;
  for (const auto& o : d.outcomes) counts.emplace_back(format_value(o.first), 0);
  std::int64_t bottom = 0;
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    double acc = 0;
    size_t i = 0;
    for (; i < d.outcomes.size(); ++i) {
      acc += d.outcomes[i].second;
      if (u < acc) break;
    }
    if (i < d.outcomes.size())
      ++counts[i].second;
    else
      ++bottom;
  }
  if (bottom > 0 || d.diverge_mass() > 1e-12) counts.emplace_back("⊥", bottom);
  return counts;
}

namespace {
struct StackJob {
  const std::function<void()>* fn;
  std::exception_ptr error;
};

void* stack_entry(void* arg) {
  auto* job = static_cast<StackJob*>(arg);
  try {
    (*job->fn)();
  } catch (...) {
    job->error = std::current_exception();
  }
  return nullptr;
}

thread_local bool on_big_stack = false;
}  // namespace

void run_with_stack(const std::function<void()>& fn, std::size_t stack_bytes) {
  if (on_big_stack) {
    fn();
    return;
  }
  StackJob job{nullptr, nullptr};
  const std::function<void()> wrapped = [&] {
    on_big_stack = true;
    fn();
  };
  job.fn = &wrapped;
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, stack_bytes);
  pthread_t thread;
  const int rc = pthread_create(&thread, &attr, stack_entry, &job);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    fn();
    return;
  }
  pthread_join(thread, nullptr);
  if (job.error) std::rethrow_exception(job.error);
}

}  // namespace ewire
