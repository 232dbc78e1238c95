#include "ewire/syntax.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>
#include <sstream>

namespace ewire {

std::string to_string(const Span& span) {
  return std::to_string(span.line) + ":" + std::to_string(span.col);
}

namespace {
std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}
}  // namespace

ParseError::ParseError(Span span, std::string message, std::vector<std::string> expected)
    : Error(to_string(span) + ": parse error: " + message +
            (expected.empty() ? std::string() : " (expected " + join(expected, ", ") + ")")),
      span(span),
      message(std::move(message)),
      expected(std::move(expected)) {}

const char* to_string(TypeErrorKind kind) {
  switch (kind) {
    case TypeErrorKind::LinearityViolation: return "LinearityViolation";
    case TypeErrorKind::UnboundWire: return "UnboundWire";
    case TypeErrorKind::UnusedWire: return "UnusedWire";
    case TypeErrorKind::NotClassical: return "NotClassical";
    case TypeErrorKind::Mismatch: return "Mismatch";
    case TypeErrorKind::EffectfulUnbox: return "EffectfulUnbox";
    case TypeErrorKind::GateSignature: return "GateSignature";
    case TypeErrorKind::PatternShape: return "PatternShape";
  }
  return "?";
}

TypeError::TypeError(TypeErrorKind kind, Span span, std::string message)
    : Error(to_string(span) + ": " + to_string(kind) + ": " + message),
      kind(kind),
      span(span),
      message(std::move(message)) {}

const char* to_string(BinOpKind op) {
  switch (op) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Eq: return "=";
    case BinOpKind::Lt: return "<";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// WireType
// ---------------------------------------------------------------------------

struct WireType::Node {
  Kind kind = Kind::Unit;
  std::string name;
  int size = 0;
  WireType left, right;
  bool classical = true;
  bool qlist = false;
};

WireType::WireType() : node_(nullptr) {}

WireType WireType::unit() { return WireType(); }

WireType WireType::tensor(WireType left, WireType right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Tensor;
  n->classical = left.is_classical() && right.is_classical();
  n->qlist = left.mentions_qlist() || right.mentions_qlist();
  n->left = std::move(left);
  n->right = std::move(right);
  return WireType(std::move(n));
}

WireType WireType::classical(std::string name, int cardinality) {
  if (cardinality < 1) throw Error("classical base '" + name + "' needs cardinality >= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Classical;
  n->name = std::move(name);
  n->size = cardinality;
  return WireType(std::move(n));
}

WireType WireType::quantum(std::string name, int dimension) {
  const bool is_qlist = name == "qlist";
  if (!is_qlist && dimension < 2)
    throw Error("quantum base '" + name + "' needs dimension >= 2");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Quantum;
  n->name = std::move(name);
  n->size = is_qlist ? 0 : dimension;
  n->classical = false;
  n->qlist = is_qlist;
  return WireType(std::move(n));
}

WireType WireType::bit() {
  static const WireType b = classical("bit", 2);
  return b;
}

WireType WireType::qubit() {
  static const WireType q = quantum("qubit", 2);
  return q;
}

WireType WireType::qlist() {
  static const WireType q = quantum("qlist", 0);
  return q;
}

WireType WireType::qlist_of_length(int length) {
  WireType w = unit();
  for (int i = 0; i < length; ++i) w = tensor(qubit(), w);
  return w;
}

WireType::Kind WireType::kind() const { return node_ ? node_->kind : Kind::Unit; }

const WireType& WireType::left() const {
  assert(kind() == Kind::Tensor);
  return node_->left;
}

const WireType& WireType::right() const {
  assert(kind() == Kind::Tensor);
  return node_->right;
}

const std::string& WireType::name() const {
  static const std::string unit_name = "I";
  return node_ ? node_->name : unit_name;
}

int WireType::size() const { return node_ ? node_->size : 1; }

bool WireType::is_classical() const { return node_ ? node_->classical : true; }

bool WireType::mentions_qlist() const { return node_ ? node_->qlist : false; }

bool WireType::is_qlist_base() const { return kind() == Kind::Quantum && node_->qlist; }

bool operator==(const WireType& a, const WireType& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case WireType::Kind::Unit: return true;
    case WireType::Kind::Tensor: return a.left() == b.left() && a.right() == b.right();
    case WireType::Kind::Classical:
    case WireType::Kind::Quantum: return a.name() == b.name() && a.size() == b.size();
  }
  return false;
}

WireType classicalize(const WireType& w) {
  switch (w.kind()) {
    case WireType::Kind::Unit: return w;
    case WireType::Kind::Tensor:
      return WireType::tensor(classicalize(w.left()), classicalize(w.right()));
    case WireType::Kind::Classical: return w;
    case WireType::Kind::Quantum:
      if (w.is_qlist_base()) throw Error("qlist has no classicalization");
      return WireType::bit();
  }
  return w;
}

// ---------------------------------------------------------------------------
// HostType
// ---------------------------------------------------------------------------

struct HostType::Node {
  Kind kind = Kind::Unit;
  HostType first, second;
  WireType in, out;
  std::string name;
  int cardinality = 0;
};

HostType::HostType() : node_(nullptr) {}

HostType HostType::unit() { return HostType(); }

HostType HostType::product(HostType a, HostType b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Product;
  n->first = std::move(a);
  n->second = std::move(b);
  return HostType(std::move(n));
}

HostType HostType::arrow(HostType a, HostType b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Arrow;
  n->first = std::move(a);
  n->second = std::move(b);
  return HostType(std::move(n));
}

HostType HostType::monadic(HostType a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Monadic;
  n->first = std::move(a);
  return HostType(std::move(n));
}

HostType HostType::circ(WireType in, WireType out) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Circ;
  n->in = std::move(in);
  n->out = std::move(out);
  return HostType(std::move(n));
}

HostType HostType::classical(std::string name, int cardinality) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Classical;
  n->name = std::move(name);
  n->cardinality = cardinality;
  return HostType(std::move(n));
}

HostType HostType::bit() {
  static const HostType b = classical("bit", 2);
  return b;
}

HostType HostType::integer() {
  static const HostType i = [] {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Int;
    n->name = "int";
    return HostType(std::move(n));
  }();
  return i;
}

HostType::Kind HostType::kind() const { return node_ ? node_->kind : Kind::Unit; }
const HostType& HostType::first() const { return node_->first; }
const HostType& HostType::second() const { return node_->second; }
const WireType& HostType::circ_in() const { return node_->in; }
const WireType& HostType::circ_out() const { return node_->out; }
const std::string& HostType::name() const {
  static const std::string unit_name = "1";
  return node_ ? node_->name : unit_name;
}
int HostType::cardinality() const { return node_ ? node_->cardinality : 1; }

bool operator==(const HostType& a, const HostType& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case HostType::Kind::Unit:
    case HostType::Kind::Int: return true;
    case HostType::Kind::Product:
    case HostType::Kind::Arrow: return a.first() == b.first() && a.second() == b.second();
    case HostType::Kind::Monadic: return a.first() == b.first();
    case HostType::Kind::Circ: return a.circ_in() == b.circ_in() && a.circ_out() == b.circ_out();
    case HostType::Kind::Classical:
      return a.name() == b.name() && a.cardinality() == b.cardinality();
  }
  return false;
}

HostType lift_type(const WireType& v) {
  switch (v.kind()) {
    case WireType::Kind::Unit: return HostType::unit();
    case WireType::Kind::Tensor: return HostType::product(lift_type(v.left()), lift_type(v.right()));
    case WireType::Kind::Classical:
      if (v.name() == "int") return HostType::integer();
      return HostType::classical(v.name(), v.size());
    case WireType::Kind::Quantum: break;
  }
  throw TypeError(TypeErrorKind::NotClassical, {},
                  "wire type " + pretty_print(v) + " has a quantum leaf and cannot be lifted");
}

std::optional<WireType> unlift_type(const HostType& a, int int_cardinality) {
  switch (a.kind()) {
    case HostType::Kind::Unit: return WireType::unit();
    case HostType::Kind::Product: {
      auto l = unlift_type(a.first(), int_cardinality);
      auto r = unlift_type(a.second(), int_cardinality);
      if (!l || !r) return std::nullopt;
      return WireType::tensor(*l, *r);
    }
    case HostType::Kind::Classical: return WireType::classical(a.name(), a.cardinality());
    case HostType::Kind::Int: return WireType::classical("int", int_cardinality);
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Pattern
// ---------------------------------------------------------------------------

struct Pattern::Node {
  Kind kind = Kind::Unit;
  std::string name;
  Pattern first, second;
};

Pattern::Pattern() : node_(nullptr) {}

Pattern Pattern::wire(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Wire;
  n->name = std::move(name);
  return Pattern(std::move(n));
}

Pattern Pattern::unit() { return Pattern(); }

Pattern Pattern::pair(Pattern a, Pattern b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pair;
  n->first = std::move(a);
  n->second = std::move(b);
  return Pattern(std::move(n));
}

Pattern::Kind Pattern::kind() const { return node_ ? node_->kind : Kind::Unit; }
const std::string& Pattern::name() const {
  static const std::string none;
  return node_ ? node_->name : none;
}
const Pattern& Pattern::first() const { return node_->first; }
const Pattern& Pattern::second() const { return node_->second; }

std::vector<std::string> Pattern::wires() const {
  std::vector<std::string> out;
  std::function<void(const Pattern&)> walk = [&](const Pattern& p) {
    switch (p.kind()) {
      case Kind::Wire: out.push_back(p.name()); break;
      case Kind::Unit: break;
      case Kind::Pair:
        walk(p.first());
        walk(p.second());
        break;
    }
  };
  walk(*this);
  return out;
}

bool operator==(const Pattern& a, const Pattern& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Pattern::Kind::Wire: return a.name() == b.name();
    case Pattern::Kind::Unit: return true;
    case Pattern::Kind::Pair: return a.first() == b.first() && a.second() == b.second();
  }
  return false;
}

std::string GateRef::display() const {
  return index ? name + "[" + std::to_string(*index) + "]" : name;
}

// ---------------------------------------------------------------------------
// Node construction
// ---------------------------------------------------------------------------

namespace make {
namespace {
std::shared_ptr<CircuitNode> cnode(CircuitKind k, Span s) {
  auto n = std::make_shared<CircuitNode>();
  n->kind = k;
  n->span = s;
  return n;
}
std::shared_ptr<HostNode> hnode(HostKind k, Span s) {
  auto n = std::make_shared<HostNode>();
  n->kind = k;
  n->span = s;
  return n;
}
}  // namespace

CircuitTerm output(Pattern p, Span s) {
  auto n = cnode(CircuitKind::Output, s);
  n->pat = std::move(p);
  return n;
}
CircuitTerm compose(Pattern p, CircuitTerm first, CircuitTerm rest, Span s) {
  auto n = cnode(CircuitKind::Compose, s);
  n->pat = std::move(p);
  n->first = std::move(first);
  n->rest = std::move(rest);
  return n;
}
CircuitTerm unit_elim(Pattern p, CircuitTerm rest, Span s) {
  auto n = cnode(CircuitKind::UnitElim, s);
  n->pat = std::move(p);
  n->rest = std::move(rest);
  return n;
}
CircuitTerm pair_elim(std::string w1, std::string w2, Pattern p, CircuitTerm rest, Span s) {
  auto n = cnode(CircuitKind::PairElim, s);
  n->name = std::move(w1);
  n->name2 = std::move(w2);
  n->pat = std::move(p);
  n->rest = std::move(rest);
  return n;
}
CircuitTerm gate(Pattern out, GateRef g, Pattern in, CircuitTerm rest, Span s) {
  auto n = cnode(CircuitKind::Gate, s);
  n->pat = std::move(out);
  n->gate = std::move(g);
  n->pat_in = std::move(in);
  n->rest = std::move(rest);
  return n;
}
CircuitTerm unbox(HostTerm t, Pattern p, Span s) {
  auto n = cnode(CircuitKind::Unbox, s);
  n->host = std::move(t);
  n->pat = std::move(p);
  return n;
}
CircuitTerm lift(std::string x, Pattern p, CircuitTerm rest, Span s) {
  auto n = cnode(CircuitKind::Lift, s);
  n->name = std::move(x);
  n->pat = std::move(p);
  n->rest = std::move(rest);
  return n;
}
CircuitTerm init(HostTerm t, Span s) {
  auto n = cnode(CircuitKind::Init, s);
  n->host = std::move(t);
  return n;
}
CircuitTerm qlift(std::string x, Pattern p, CircuitTerm rest, Span s) {
  auto n = cnode(CircuitKind::QLift, s);
  n->name = std::move(x);
  n->pat = std::move(p);
  n->rest = std::move(rest);
  return n;
}
CircuitTerm call(std::string name, std::optional<Pattern> arg, Span s) {
  auto n = cnode(CircuitKind::Call, s);
  n->name = std::move(name);
  n->has_arg = arg.has_value();
  if (arg) n->pat = *arg;
  return n;
}

HostTerm var(std::string x, Span s) {
  auto n = hnode(HostKind::Var, s);
  n->name = std::move(x);
  return n;
}
HostTerm lambda(std::string x, std::optional<HostType> type, HostTerm body, Span s) {
  auto n = hnode(HostKind::Lambda, s);
  n->name = std::move(x);
  n->type = std::move(type);
  n->a = std::move(body);
  return n;
}
HostTerm app(HostTerm f, HostTerm a, Span s) {
  auto n = hnode(HostKind::App, s);
  n->a = std::move(f);
  n->b = std::move(a);
  return n;
}
HostTerm unit(Span s) { return hnode(HostKind::UnitVal, s); }
HostTerm pair(HostTerm a, HostTerm b, Span s) {
  auto n = hnode(HostKind::Pair, s);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
HostTerm proj1(HostTerm t, Span s) {
  auto n = hnode(HostKind::Proj1, s);
  n->a = std::move(t);
  return n;
}
HostTerm proj2(HostTerm t, Span s) {
  auto n = hnode(HostKind::Proj2, s);
  n->a = std::move(t);
  return n;
}
HostTerm ret(HostTerm t, Span s) {
  auto n = hnode(HostKind::Return, s);
  n->a = std::move(t);
  return n;
}
HostTerm let_bind(HostTerm t, std::string x, HostTerm u, Span s) {
  auto n = hnode(HostKind::LetBind, s);
  n->a = std::move(t);
  n->name = std::move(x);
  n->b = std::move(u);
  return n;
}
HostTerm box(Pattern p, std::optional<WireType> w, CircuitTerm body, Span s) {
  auto n = hnode(HostKind::Box, s);
  n->pat = std::move(p);
  n->wtype = std::move(w);
  n->circ = std::move(body);
  return n;
}
HostTerm run(CircuitTerm c, Span s) {
  auto n = hnode(HostKind::Run, s);
  n->circ = std::move(c);
  return n;
}
HostTerm classical_lit(std::string base, int cardinality, std::int64_t value, Span s) {
  auto n = hnode(HostKind::ClassicalLit, s);
  n->name = std::move(base);
  n->cardinality = cardinality;
  n->value = value;
  return n;
}
HostTerm if_(HostTerm cond, HostTerm then_, HostTerm else_, Span s) {
  auto n = hnode(HostKind::If, s);
  n->a = std::move(cond);
  n->b = std::move(then_);
  n->c = std::move(else_);
  return n;
}
HostTerm int_lit(std::int64_t v, Span s) {
  auto n = hnode(HostKind::IntLit, s);
  n->value = v;
  return n;
}
HostTerm binop(BinOpKind op, HostTerm a, HostTerm b, Span s) {
  auto n = hnode(HostKind::BinOp, s);
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
HostTerm fix(std::optional<HostType> arg, std::optional<WireType> w1, std::optional<WireType> w2,
             Span s) {
  auto n = hnode(HostKind::Fix, s);
  n->type = std::move(arg);
  n->wtype = std::move(w1);
  n->wtype2 = std::move(w2);
  return n;
}
HostTerm gate_family(std::string name, HostTerm index, Span s) {
  auto n = hnode(HostKind::GateFamily, s);
  n->name = std::move(name);
  n->a = std::move(index);
  return n;
}
HostTerm qrun(CircuitTerm c, Span s) {
  auto n = hnode(HostKind::QRun, s);
  n->circ = std::move(c);
  return n;
}
HostTerm meas_w(WireType w, Span s) {
  auto n = hnode(HostKind::MeasW, s);
  n->wtype = std::move(w);
  return n;
}
HostTerm new_w(WireType w, Span s) {
  auto n = hnode(HostKind::NewW, s);
  n->wtype = std::move(w);
  return n;
}
}  // namespace make

// ---------------------------------------------------------------------------
// Program
// ---------------------------------------------------------------------------

int Program::int_cardinality() const {
  for (const auto& c : classicals)
    if (c.name == "int") return c.cardinality;
  return kDefaultIntCardinality;
}

const Declaration* Program::find(const std::string& name) const {
  for (const auto& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Free names
// ---------------------------------------------------------------------------

namespace {

void add_unique(std::vector<std::string>& out, const std::string& x) {
  if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
}

bool contains(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

void free_wires_into(const CircuitTerm& c, std::vector<std::string>& bound,
                     std::vector<std::string>& out) {
  auto use = [&](const Pattern& p) {
    for (const auto& w : p.wires())
      if (!contains(bound, w)) add_unique(out, w);
  };
  // Binders are scoped to the continuation only.
  auto with_bound = [&](const std::vector<std::string>& names, const CircuitTerm& rest) {
    const size_t mark = bound.size();
    bound.insert(bound.end(), names.begin(), names.end());
    free_wires_into(rest, bound, out);
    bound.resize(mark);
  };
  switch (c->kind) {
    case CircuitKind::Output:
    case CircuitKind::Unbox: use(c->pat); break;
    case CircuitKind::Call:
      if (c->has_arg) use(c->pat);
      break;
    case CircuitKind::Init: break;
    case CircuitKind::Compose:
      free_wires_into(c->first, bound, out);
      with_bound(c->pat.wires(), c->rest);
      break;
    case CircuitKind::UnitElim:
      use(c->pat);
      free_wires_into(c->rest, bound, out);
      break;
    case CircuitKind::PairElim:
      use(c->pat);
      with_bound({c->name, c->name2}, c->rest);
      break;
    case CircuitKind::Gate:
      use(c->pat_in);
      with_bound(c->pat.wires(), c->rest);
      break;
    case CircuitKind::Lift:
    case CircuitKind::QLift:
      use(c->pat);
      free_wires_into(c->rest, bound, out);
      break;
  }
}

void free_vars_into(const HostTerm& t, std::vector<std::string>& bound,
                    std::vector<std::string>& out);

void free_vars_into(const CircuitTerm& c, std::vector<std::string>& bound,
                    std::vector<std::string>& out) {
  switch (c->kind) {
    case CircuitKind::Output:
    case CircuitKind::Call: break;
    case CircuitKind::Unbox:
    case CircuitKind::Init: free_vars_into(c->host, bound, out); break;
    case CircuitKind::Compose:
      free_vars_into(c->first, bound, out);
      free_vars_into(c->rest, bound, out);
      break;
    case CircuitKind::UnitElim:
    case CircuitKind::PairElim:
    case CircuitKind::Gate: free_vars_into(c->rest, bound, out); break;
    case CircuitKind::Lift:
    case CircuitKind::QLift:
      bound.push_back(c->name);
      free_vars_into(c->rest, bound, out);
      bound.pop_back();
      break;
  }
}

void free_vars_into(const HostTerm& t, std::vector<std::string>& bound,
                    std::vector<std::string>& out) {
  if (!t) return;
  switch (t->kind) {
    case HostKind::Var:
      if (!contains(bound, t->name)) add_unique(out, t->name);
      break;
    case HostKind::Lambda:
      bound.push_back(t->name);
      free_vars_into(t->a, bound, out);
      bound.pop_back();
      break;
    case HostKind::LetBind:
      free_vars_into(t->a, bound, out);
      bound.push_back(t->name);
      free_vars_into(t->b, bound, out);
      bound.pop_back();
      break;
    case HostKind::Box:
    case HostKind::Run:
    case HostKind::QRun: free_vars_into(t->circ, bound, out); break;
    default:
      free_vars_into(t->a, bound, out);
      free_vars_into(t->b, bound, out);
      free_vars_into(t->c, bound, out);
      break;
  }
}

}  // namespace

std::vector<std::string> free_wires(const CircuitTerm& c) {
  std::vector<std::string> bound, out;
  free_wires_into(c, bound, out);
  return out;
}

std::vector<std::string> free_vars(const HostTerm& t) {
  std::vector<std::string> bound, out;
  free_vars_into(t, bound, out);
  return out;
}

std::vector<std::string> free_vars(const CircuitTerm& c) {
  std::vector<std::string> bound, out;
  free_vars_into(c, bound, out);
  return out;
}

std::string fresh_name(const std::string& base, const std::vector<std::string>& avoid) {
  std::string stem = base;
  // Strip a previous "_N" suffix so repeated freshening does not grow names.
  auto us = stem.rfind('_');
  if (us != std::string::npos && us + 1 < stem.size() &&
      std::all_of(stem.begin() + us + 1, stem.end(), [](char ch) { return std::isdigit(ch); }))
    stem = stem.substr(0, us);
  if (stem.empty()) stem = "w";
  for (int i = 1;; ++i) {
    std::string candidate = stem + "_" + std::to_string(i);
    if (!contains(avoid, candidate)) return candidate;
  }
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

using WireSubst = std::map<std::string, Pattern>;

Pattern apply_to_pattern(const Pattern& p, const WireSubst& s) {
  switch (p.kind()) {
    case Pattern::Kind::Wire: {
      auto it = s.find(p.name());
      return it == s.end() ? p : it->second;
    }
    case Pattern::Kind::Unit: return p;
    case Pattern::Kind::Pair:
      return Pattern::pair(apply_to_pattern(p.first(), s), apply_to_pattern(p.second(), s));
  }
  return p;
}

Pattern rename_in_pattern(const Pattern& p, const std::map<std::string, std::string>& r) {
  switch (p.kind()) {
    case Pattern::Kind::Wire: {
      auto it = r.find(p.name());
      return it == r.end() ? p : Pattern::wire(it->second);
    }
    case Pattern::Kind::Unit: return p;
    case Pattern::Kind::Pair:
      return Pattern::pair(rename_in_pattern(p.first(), r), rename_in_pattern(p.second(), r));
  }
  return p;
}

std::vector<std::string> range_wires(const WireSubst& s) {
  std::vector<std::string> out;
  for (const auto& [k, v] : s)
    for (const auto& w : v.wires()) add_unique(out, w);
  return out;
}

CircuitTerm apply_wire_subst(const CircuitTerm& c, WireSubst s);

// Handles a binder list scoped over `rest`: drops shadowed entries and renames
// binders that would capture wires in the substitution's range.
std::pair<std::vector<std::string>, CircuitTerm> bind_under(
    const std::vector<std::string>& binders, const CircuitTerm& rest, WireSubst s) {
  for (const auto& b : binders) s.erase(b);
  if (s.empty()) return {binders, rest};
  const auto range = range_wires(s);
  std::vector<std::string> avoid = range;
  for (const auto& w : free_wires(rest)) add_unique(avoid, w);
  for (const auto& b : binders) add_unique(avoid, b);
  std::vector<std::string> out = binders;
  WireSubst renamed = s;
  for (auto& b : out) {
    if (contains(range, b)) {
      std::string nb = fresh_name(b, avoid);
      avoid.push_back(nb);
      renamed[b] = Pattern::wire(nb);
      b = nb;
    }
  }
  return {out, apply_wire_subst(rest, renamed)};
}

Pattern rebuild_binder_pattern(const Pattern& p, const std::vector<std::string>& old_names,
                               const std::vector<std::string>& new_names) {
  std::map<std::string, std::string> r;
  for (size_t i = 0; i < old_names.size(); ++i)
    if (old_names[i] != new_names[i]) r[old_names[i]] = new_names[i];
  return r.empty() ? p : rename_in_pattern(p, r);
}

CircuitTerm apply_wire_subst(const CircuitTerm& c, WireSubst s) {
  if (s.empty()) return c;
  auto n = std::make_shared<CircuitNode>(*c);
  switch (c->kind) {
    case CircuitKind::Output:
    case CircuitKind::Unbox: n->pat = apply_to_pattern(c->pat, s); break;
    case CircuitKind::Call:
      if (c->has_arg) n->pat = apply_to_pattern(c->pat, s);
      break;
    case CircuitKind::Init: break;
    case CircuitKind::Compose: {
      n->first = apply_wire_subst(c->first, s);
      auto names = c->pat.wires();
      auto [nb, rest] = bind_under(names, c->rest, s);
      n->pat = rebuild_binder_pattern(c->pat, names, nb);
      n->rest = rest;
      break;
    }
    case CircuitKind::UnitElim:
    case CircuitKind::Lift:
    case CircuitKind::QLift:
      n->pat = apply_to_pattern(c->pat, s);
      n->rest = apply_wire_subst(c->rest, s);
      break;
    case CircuitKind::PairElim: {
      n->pat = apply_to_pattern(c->pat, s);
      auto [nb, rest] = bind_under({c->name, c->name2}, c->rest, s);
      n->name = nb[0];
      n->name2 = nb[1];
      n->rest = rest;
      break;
    }
    case CircuitKind::Gate: {
      n->pat_in = apply_to_pattern(c->pat_in, s);
      auto names = c->pat.wires();
      auto [nb, rest] = bind_under(names, c->rest, s);
      n->pat = rebuild_binder_pattern(c->pat, names, nb);
      n->rest = rest;
      break;
    }
  }
  return n;
}

void build_subst(const Pattern& from, const Pattern& to, WireSubst& s) {
  switch (from.kind()) {
    case Pattern::Kind::Wire: s[from.name()] = to; return;
    case Pattern::Kind::Unit:
      if (to.kind() != Pattern::Kind::Unit)
        throw TypeError(TypeErrorKind::PatternShape, {},
                        "cannot substitute " + pretty_print(to) + " for ()");
      return;
    case Pattern::Kind::Pair:
      if (to.kind() != Pattern::Kind::Pair)
        throw TypeError(TypeErrorKind::PatternShape, {},
                        "cannot substitute " + pretty_print(to) + " for " + pretty_print(from));
      build_subst(from.first(), to.first(), s);
      build_subst(from.second(), to.second(), s);
      return;
  }
}

}  // namespace

CircuitTerm subst_pattern(const CircuitTerm& c, const Pattern& from, const Pattern& to) {
  WireSubst s;
  build_subst(from, to, s);
  return apply_wire_subst(c, s);
}

namespace {

HostTerm subst_host_impl(const HostTerm& t, const std::string& x, const HostTerm& v,
                         const std::vector<std::string>& fv);

CircuitTerm subst_host_impl(const CircuitTerm& c, const std::string& x, const HostTerm& v,
                            const std::vector<std::string>& fv) {
  auto n = std::make_shared<CircuitNode>(*c);
  switch (c->kind) {
    case CircuitKind::Output:
    case CircuitKind::Call: return c;
    case CircuitKind::Unbox:
    case CircuitKind::Init: n->host = subst_host_impl(c->host, x, v, fv); break;
    case CircuitKind::Compose:
      n->first = subst_host_impl(c->first, x, v, fv);
      n->rest = subst_host_impl(c->rest, x, v, fv);
      break;
    case CircuitKind::UnitElim:
    case CircuitKind::PairElim:
    case CircuitKind::Gate: n->rest = subst_host_impl(c->rest, x, v, fv); break;
    case CircuitKind::Lift:
    case CircuitKind::QLift: {
      if (c->name == x) return c;
      if (contains(fv, c->name)) {
        auto avoid = fv;
        for (const auto& y : free_vars(c->rest)) add_unique(avoid, y);
        avoid.push_back(x);
        std::string ny = fresh_name(c->name, avoid);
        auto renamed = subst_host(c->rest, c->name, make::var(ny));
        n->name = ny;
        n->rest = subst_host_impl(renamed, x, v, fv);
      } else {
        n->rest = subst_host_impl(c->rest, x, v, fv);
      }
      break;
    }
  }
  return n;
}

HostTerm subst_host_impl(const HostTerm& t, const std::string& x, const HostTerm& v,
                         const std::vector<std::string>& fv) {
  if (!t) return t;
  auto binder = [&](const std::string& y, const HostTerm& body, std::string& new_name) {
    if (y == x) {
      new_name = y;
      return body;
    }
    if (contains(fv, y)) {
      auto avoid = fv;
      for (const auto& z : free_vars(body)) add_unique(avoid, z);
      avoid.push_back(x);
      new_name = fresh_name(y, avoid);
      return subst_host_impl(subst_host(body, y, make::var(new_name)), x, v, fv);
    }
    new_name = y;
    return subst_host_impl(body, x, v, fv);
  };
  auto n = std::make_shared<HostNode>(*t);
  switch (t->kind) {
    case HostKind::Var: return t->name == x ? v : t;
    case HostKind::Lambda: n->a = binder(t->name, t->a, n->name); break;
    case HostKind::LetBind:
      n->a = subst_host_impl(t->a, x, v, fv);
      n->b = binder(t->name, t->b, n->name);
      break;
    case HostKind::Box:
    case HostKind::Run:
    case HostKind::QRun: n->circ = subst_host_impl(t->circ, x, v, fv); break;
    default:
      n->a = subst_host_impl(t->a, x, v, fv);
      n->b = subst_host_impl(t->b, x, v, fv);
      n->c = subst_host_impl(t->c, x, v, fv);
      break;
  }
  return n;
}

}  // namespace

CircuitTerm subst_host(const CircuitTerm& c, const std::string& x, const HostTerm& t) {
  return subst_host_impl(c, x, t, free_vars(t));
}

HostTerm subst_host(const HostTerm& body, const std::string& x, const HostTerm& t) {
  return subst_host_impl(body, x, t, free_vars(t));
}

namespace {

CircuitTerm freshen_impl(const CircuitTerm& c, std::vector<std::string>& avoid) {
  auto fresh_binders = [&](const std::vector<std::string>& names, const CircuitTerm& rest,
                           std::vector<std::string>& out) {
    WireSubst s;
    out.clear();
    for (const auto& b : names) {
      std::string nb = fresh_name(b, avoid);
      avoid.push_back(nb);
      s[b] = Pattern::wire(nb);
      out.push_back(nb);
    }
    return freshen_impl(apply_wire_subst(rest, s), avoid);
  };
  auto n = std::make_shared<CircuitNode>(*c);
  std::vector<std::string> nb;
  switch (c->kind) {
    case CircuitKind::Output:
    case CircuitKind::Unbox:
    case CircuitKind::Init:
    case CircuitKind::Call: return c;
    case CircuitKind::Compose: {
      n->first = freshen_impl(c->first, avoid);
      auto names = c->pat.wires();
      n->rest = fresh_binders(names, c->rest, nb);
      n->pat = rebuild_binder_pattern(c->pat, names, nb);
      break;
    }
    case CircuitKind::UnitElim:
    case CircuitKind::Lift:
    case CircuitKind::QLift: n->rest = freshen_impl(c->rest, avoid); break;
    case CircuitKind::PairElim:
      n->rest = fresh_binders({c->name, c->name2}, c->rest, nb);
      n->name = nb[0];
      n->name2 = nb[1];
      break;
    case CircuitKind::Gate: {
      auto names = c->pat.wires();
      n->rest = fresh_binders(names, c->rest, nb);
      n->pat = rebuild_binder_pattern(c->pat, names, nb);
      break;
    }
  }
  return n;
}

}  // namespace

CircuitTerm freshen_wires(const CircuitTerm& c, const std::vector<std::string>& avoid) {
  std::vector<std::string> a = avoid;
  for (const auto& w : free_wires(c)) add_unique(a, w);
  return freshen_impl(c, a);
}

// ---------------------------------------------------------------------------
// Alpha equivalence
// ---------------------------------------------------------------------------

namespace {

struct AlphaEnv {
  std::vector<std::pair<std::string, std::string>> wires;
  std::vector<std::pair<std::string, std::string>> vars;
};

bool same_name(const std::vector<std::pair<std::string, std::string>>& env, const std::string& a,
               const std::string& b) {
  for (size_t i = env.size(); i-- > 0;) {
    const bool ha = env[i].first == a;
    const bool hb = env[i].second == b;
    if (ha || hb) return ha && hb;
  }
  return a == b;
}

bool alpha_pattern(const Pattern& a, const Pattern& b, const AlphaEnv& env) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Pattern::Kind::Wire: return same_name(env.wires, a.name(), b.name());
    case Pattern::Kind::Unit: return true;
    case Pattern::Kind::Pair:
      return alpha_pattern(a.first(), b.first(), env) && alpha_pattern(a.second(), b.second(), env);
  }
  return false;
}

// Binding pattern: shapes must agree, names are pushed pairwise.
bool bind_patterns(const Pattern& a, const Pattern& b, AlphaEnv& env) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Pattern::Kind::Wire: env.wires.emplace_back(a.name(), b.name()); return true;
    case Pattern::Kind::Unit: return true;
    case Pattern::Kind::Pair:
      return bind_patterns(a.first(), b.first(), env) && bind_patterns(a.second(), b.second(), env);
  }
  return false;
}

bool alpha_host(const HostTerm& a, const HostTerm& b, AlphaEnv env);

bool opt_eq(const std::optional<WireType>& a, const std::optional<WireType>& b) {
  return a.has_value() == b.has_value() && (!a || *a == *b);
}
bool opt_eq(const std::optional<HostType>& a, const std::optional<HostType>& b) {
  return a.has_value() == b.has_value() && (!a || *a == *b);
}

bool alpha_circ(const CircuitTerm& a, const CircuitTerm& b, AlphaEnv env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case CircuitKind::Output: return alpha_pattern(a->pat, b->pat, env);
    case CircuitKind::Unbox:
      return alpha_pattern(a->pat, b->pat, env) && alpha_host(a->host, b->host, env);
    case CircuitKind::Init: return alpha_host(a->host, b->host, env);
    case CircuitKind::Call:
      return a->name == b->name && a->has_arg == b->has_arg &&
             (!a->has_arg || alpha_pattern(a->pat, b->pat, env));
    case CircuitKind::Compose: {
      if (!alpha_circ(a->first, b->first, env)) return false;
      if (!bind_patterns(a->pat, b->pat, env)) return false;
      return alpha_circ(a->rest, b->rest, env);
    }
    case CircuitKind::UnitElim:
      return alpha_pattern(a->pat, b->pat, env) && alpha_circ(a->rest, b->rest, env);
    case CircuitKind::PairElim:
      if (!alpha_pattern(a->pat, b->pat, env)) return false;
      env.wires.emplace_back(a->name, b->name);
      env.wires.emplace_back(a->name2, b->name2);
      return alpha_circ(a->rest, b->rest, env);
    case CircuitKind::Gate:
      if (a->gate.name != b->gate.name || a->gate.index != b->gate.index) return false;
      if (!alpha_pattern(a->pat_in, b->pat_in, env)) return false;
      if (!bind_patterns(a->pat, b->pat, env)) return false;
      return alpha_circ(a->rest, b->rest, env);
    case CircuitKind::Lift:
    case CircuitKind::QLift:
      if (!alpha_pattern(a->pat, b->pat, env)) return false;
      env.vars.emplace_back(a->name, b->name);
      return alpha_circ(a->rest, b->rest, env);
  }
  return false;
}

bool alpha_host(const HostTerm& a, const HostTerm& b, AlphaEnv env) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case HostKind::Var: return same_name(env.vars, a->name, b->name);
    case HostKind::Lambda:
      if (!opt_eq(a->type, b->type)) return false;
      env.vars.emplace_back(a->name, b->name);
      return alpha_host(a->a, b->a, env);
    case HostKind::LetBind:
      if (!alpha_host(a->a, b->a, env)) return false;
      env.vars.emplace_back(a->name, b->name);
      return alpha_host(a->b, b->b, env);
    case HostKind::Box:
      if (!opt_eq(a->wtype, b->wtype)) return false;
      if (!bind_patterns(a->pat, b->pat, env)) return false;
      return alpha_circ(a->circ, b->circ, env);
    case HostKind::Run:
    case HostKind::QRun: return alpha_circ(a->circ, b->circ, env);
    case HostKind::ClassicalLit:
      return a->name == b->name && a->value == b->value && a->cardinality == b->cardinality;
    case HostKind::IntLit: return a->value == b->value;
    case HostKind::BinOp:
      return a->op == b->op && alpha_host(a->a, b->a, env) && alpha_host(a->b, b->b, env);
    case HostKind::Fix:
      return opt_eq(a->type, b->type) && opt_eq(a->wtype, b->wtype) && opt_eq(a->wtype2, b->wtype2);
    case HostKind::GateFamily: return a->name == b->name && alpha_host(a->a, b->a, env);
    case HostKind::MeasW:
    case HostKind::NewW: return opt_eq(a->wtype, b->wtype);
    default:
      return alpha_host(a->a, b->a, env) && alpha_host(a->b, b->b, env) &&
             alpha_host(a->c, b->c, env);
  }
}

}  // namespace

bool alpha_equal(const CircuitTerm& a, const CircuitTerm& b) { return alpha_circ(a, b, {}); }

bool alpha_equal(const HostTerm& a, const HostTerm& b) { return alpha_host(a, b, {}); }

bool alpha_equal(const Program& a, const Program& b) {
  if (a.classicals.size() != b.classicals.size() || a.gates.size() != b.gates.size() ||
      a.decls.size() != b.decls.size() || a.entry != b.entry)
    return false;
  for (size_t i = 0; i < a.classicals.size(); ++i)
    if (a.classicals[i].name != b.classicals[i].name ||
        a.classicals[i].cardinality != b.classicals[i].cardinality)
      return false;
  for (size_t i = 0; i < a.gates.size(); ++i)
    if (a.gates[i].name != b.gates[i].name || a.gates[i].in != b.gates[i].in ||
        a.gates[i].out != b.gates[i].out)
      return false;
  for (size_t i = 0; i < a.decls.size(); ++i) {
    const auto& x = a.decls[i];
    const auto& y = b.decls[i];
    if (x.kind != y.kind || x.name != y.name || !opt_eq(x.type, y.type)) return false;
    if (x.kind == Declaration::Kind::Circuit) {
      if (x.params.size() != y.params.size() || !opt_eq(x.out, y.out)) return false;
      AlphaEnv env;
      for (size_t k = 0; k < x.params.size(); ++k) {
        if (x.params[k].second != y.params[k].second) return false;
        env.wires.emplace_back(x.params[k].first, y.params[k].first);
      }
      if (!alpha_circ(x.circuit, y.circuit, env)) return false;
    } else if (!alpha_host(x.body, y.body, {})) {
      return false;
    }
  }
  return true;
}

}  // namespace ewire
