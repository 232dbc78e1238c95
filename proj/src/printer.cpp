#include <sstream>

#include "ewire/syntax.hpp"

namespace ewire {

std::string pretty_print(const WireType& w) {
  switch (w.kind()) {
    case WireType::Kind::Unit: return "I";
    case WireType::Kind::Tensor: {
      std::string l = pretty_print(w.left());
      if (w.left().is_tensor()) l = "(" + l + ")";
      return l + " * " + pretty_print(w.right());
    }
    case WireType::Kind::Classical:
    case WireType::Kind::Quantum: return w.name();
  }
  return "?";
}

std::string pretty_print(const HostType& a) {
  using K = HostType::Kind;
  switch (a.kind()) {
    case K::Unit: return "1";
    case K::Int: return "int";
    case K::Classical: return a.name();
    case K::Monadic: return "T(" + pretty_print(a.first()) + ")";
    case K::Circ: return "Circ(" + pretty_print(a.circ_in()) + ", " + pretty_print(a.circ_out()) + ")";
    case K::Arrow: {
      std::string l = pretty_print(a.first());
      if (a.first().kind() == K::Arrow) l = "(" + l + ")";
      return l + " -> " + pretty_print(a.second());
    }
    case K::Product: {
      std::string l = pretty_print(a.first());
      std::string r = pretty_print(a.second());
      if (a.first().kind() == K::Product || a.first().kind() == K::Arrow) l = "(" + l + ")";
      if (a.second().kind() == K::Arrow) r = "(" + r + ")";
      return l + " * " + r;
    }
  }
  return "?";
}

std::string pretty_print(const Pattern& p) {
  switch (p.kind()) {
    case Pattern::Kind::Wire: return p.name();
    case Pattern::Kind::Unit: return "()";
    case Pattern::Kind::Pair: return "(" + pretty_print(p.first()) + ", " + pretty_print(p.second()) + ")";
  }
  return "?";
}

namespace {

std::string host(const HostTerm& t, int level);

bool is_final(const CircuitTerm& c) {
  switch (c->kind) {
    case CircuitKind::Output:
    case CircuitKind::Unbox:
    case CircuitKind::Init:
    case CircuitKind::Call: return true;
    default: return false;
  }
}

std::string circ(const CircuitTerm& c) {
  switch (c->kind) {
    case CircuitKind::Output: return "output " + pretty_print(c->pat);
    case CircuitKind::Unbox: return "unbox " + host(c->host, 4) + " " + pretty_print(c->pat);
    case CircuitKind::Init: return "init " + host(c->host, 4);
    case CircuitKind::Call: return c->has_arg ? c->name + " " + pretty_print(c->pat) : c->name;
    case CircuitKind::Compose: {
      std::string first = circ(c->first);
      if (!is_final(c->first)) first = "(" + first + ")";
      return pretty_print(c->pat) + " <- " + first + "; " + circ(c->rest);
    }
    case CircuitKind::UnitElim: return "() <- " + pretty_print(c->pat) + "; " + circ(c->rest);
    case CircuitKind::PairElim:
      return "(" + c->name + ", " + c->name2 + ") <- " + pretty_print(c->pat) + "; " + circ(c->rest);
    case CircuitKind::Gate:
      return pretty_print(c->pat) + " <- gate " + c->gate.display() + " " + pretty_print(c->pat_in) +
             "; " + circ(c->rest);
    case CircuitKind::Lift:
    case CircuitKind::QLift:
      return c->name + (c->kind == CircuitKind::Lift ? " <= lift " : " <= qlift ") +
             pretty_print(c->pat) + "; " + circ(c->rest);
  }
  return "?";
}

int host_level(const HostTerm& t) {
  switch (t->kind) {
    case HostKind::Lambda:
    case HostKind::If:
    case HostKind::LetBind:
    case HostKind::Box:
    case HostKind::Run:
    case HostKind::QRun:
    case HostKind::Return: return 0;
    case HostKind::BinOp:
      return (t->op == BinOpKind::Eq || t->op == BinOpKind::Lt) ? 1 : 2;
    case HostKind::App:
    case HostKind::Proj1:
    case HostKind::Proj2:
    case HostKind::GateFamily: return 3;
    case HostKind::IntLit: return t->value < 0 ? 3 : 4;
    default: return 4;
  }
}

std::string host_raw(const HostTerm& t) {
  switch (t->kind) {
    case HostKind::Var: return t->name;
    case HostKind::Lambda:
      if (t->type) return "lambda (" + t->name + " : " + pretty_print(*t->type) + "). " + host(t->a, 0);
      return "lambda " + t->name + ". " + host(t->a, 0);
    case HostKind::App: return host(t->a, 3) + " " + host(t->b, 4);
    case HostKind::UnitVal: return "()";
    case HostKind::Pair: return "(" + host(t->a, 0) + ", " + host(t->b, 0) + ")";
    case HostKind::Proj1: return "fst " + host(t->a, 4);
    case HostKind::Proj2: return "snd " + host(t->a, 4);
    case HostKind::Return: return "return " + host(t->a, 0);
    case HostKind::LetBind:
      return "let " + t->name + " <- " + host(t->a, 0) + " in " + host(t->b, 0);
    case HostKind::Box:
      if (t->wtype)
        return "box (" + pretty_print(t->pat) + " : " + pretty_print(*t->wtype) + ") => " + circ(t->circ);
      return "box " + pretty_print(t->pat) + " => " + circ(t->circ);
    case HostKind::Run: return "run " + circ(t->circ);
    case HostKind::QRun: return "qrun " + circ(t->circ);
    case HostKind::ClassicalLit: return t->name + "#" + std::to_string(t->value);
    case HostKind::If:
      return "if " + host(t->a, 0) + " then " + host(t->b, 0) + " else " + host(t->c, 0);
    case HostKind::IntLit: return std::to_string(t->value);
    case HostKind::BinOp: {
      const bool cmp = t->op == BinOpKind::Eq || t->op == BinOpKind::Lt;
      if (cmp) return host(t->a, 2) + " " + to_string(t->op) + " " + host(t->b, 2);
      return host(t->a, 2) + " " + to_string(t->op) + " " + host(t->b, 3);
    }
    case HostKind::Fix:
      if (t->type && t->wtype && t->wtype2)
        return "fix[" + pretty_print(*t->type) + ", " + pretty_print(*t->wtype) + ", " +
               pretty_print(*t->wtype2) + "]";
      return "fix";
    case HostKind::GateFamily: return t->name + " " + host(t->a, 4);
    case HostKind::MeasW: return "meas[" + pretty_print(*t->wtype) + "]";
    case HostKind::NewW: return "new[" + pretty_print(*t->wtype) + "]";
  }
  return "?";
}

std::string host(const HostTerm& t, int level) {
  std::string s = host_raw(t);
  return host_level(t) < level ? "(" + s + ")" : s;
}

}  // namespace

std::string pretty_print(const CircuitTerm& c) { return circ(c); }

std::string pretty_print(const HostTerm& t) { return host(t, 0); }

std::string pretty_print(const Program& p) {
  std::ostringstream out;
  for (const auto& c : p.classicals) out << "classical " << c.name << " " << c.cardinality << "\n";
  for (const auto& g : p.gates)
    out << "gate " << g.name << " : " << pretty_print(g.in) << " -> " << pretty_print(g.out) << "\n";
  for (const auto& d : p.decls) {
    switch (d.kind) {
      case Declaration::Kind::Def:
      case Declaration::Kind::Rec:
        out << (d.kind == Declaration::Kind::Def ? "def " : "rec ") << d.name;
        if (d.type) out << " : " << pretty_print(*d.type);
        out << " = " << pretty_print(d.body) << "\n";
        break;
      case Declaration::Kind::Circuit:
        out << "circuit " << d.name;
        if (!d.params.empty()) {
          out << " (";
          for (size_t i = 0; i < d.params.size(); ++i)
            out << (i ? ", " : "") << d.params[i].first << " : " << pretty_print(d.params[i].second);
          out << ")";
        }
        if (d.out) out << " : " << pretty_print(*d.out);
        out << " = " << pretty_print(d.circuit) << "\n";
        break;
    }
  }
  if (p.entry) out << "main " << *p.entry << "\n";
  return out.str();
}

}  // namespace ewire
