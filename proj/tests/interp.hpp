#pragma once

// Runs the circuits produced by gen.hpp on the Kraus-list oracle. Only the
// fragment the generator emits is supported: gates, composition, output,
// pair and unit elimination, literal boxes under unbox, conditionals on a
// lifted bit, init of a bit, and the diverging `loop 0`.

#include <map>
#include <memory>
#include <stdexcept>

#include "ewire/syntax.hpp"
#include "oracle.hpp"

namespace interp {

using namespace ewire;

struct Tree;
using TreeP = std::shared_ptr<const Tree>;
struct Tree {
  enum class Kind { Leaf, Unit, Pair } kind = Kind::Unit;
  std::string leaf;
  TreeP a, b;
};

inline TreeP leaf(std::string n) {
  auto t = std::make_shared<Tree>();
  t->kind = Tree::Kind::Leaf;
  t->leaf = std::move(n);
  return t;
}
inline TreeP unit() { return std::make_shared<Tree>(); }
inline TreeP pair(TreeP a, TreeP b) {
  auto t = std::make_shared<Tree>();
  t->kind = Tree::Kind::Pair;
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}

inline void flatten(const TreeP& t, std::vector<std::string>& out) {
  if (t->kind == Tree::Kind::Leaf) out.push_back(t->leaf);
  if (t->kind == Tree::Kind::Pair) {
    flatten(t->a, out);
    flatten(t->b, out);
  }
}
inline std::vector<std::string> flatten(const TreeP& t) {
  std::vector<std::string> out;
  flatten(t, out);
  return out;
}

struct HostVal {
  enum class Kind { Int, Box, Diverge } kind = Kind::Int;
  std::int64_t v = 0;
  HostTerm box;
};

class Interp {
 public:
  using Wires = std::map<std::string, TreeP>;
  using Hosts = std::map<std::string, HostVal>;

  /// Heisenberg matrix of the circuit over `omega`, in the oracle's layout.
  oracle::Mat heisenberg(const WireContext& omega, const CircuitTerm& c) {
    std::vector<oracle::Leaf> in;
    Wires w;
    for (const auto& [n, t] : omega) {
      in.push_back(oracle::Leaf{n, !(t == WireType::qubit()), 2});
      w[n] = leaf(n);
    }
    oracle::Register r(in);
    TreeP out = run(r, c, w, {});
    return r.heisenberg(flatten(out));
  }

  TreeP run(oracle::Register& r, const CircuitTerm& c, Wires w, const Hosts& h) {
    switch (c->kind) {
      case CircuitKind::Output:
        return build(c->pat, w);
      case CircuitKind::Compose: {
        TreeP t = run(r, c->first, w, h);
        bind(c->pat, t, w);
        return run(r, c->rest, w, h);
      }
      case CircuitKind::UnitElim:
        build(c->pat, w);
        return run(r, c->rest, w, h);
      case CircuitKind::PairElim: {
        TreeP t = build(c->pat, w);
        w[c->name] = t->a;
        w[c->name2] = t->b;
        return run(r, c->rest, w, h);
      }
      case CircuitKind::Gate: {
        TreeP in = build(c->pat_in, w);
        bind(c->pat, gate(r, c->gate, flatten(in)), w);
        return run(r, c->rest, w, h);
      }
      case CircuitKind::Unbox: {
        HostVal f = eval(c->host, h);
        TreeP arg = build(c->pat, w);
        std::vector<std::string> args = flatten(arg);
        if (f.kind == HostVal::Kind::Diverge) {
          const std::string o = fresh();
          r.apply({oracle::Mat::Zero(2, 2)}, args, {oracle::Leaf{o, false, 2}});
          return leaf(o);
        }
        Wires inner;
        bind(f.box->pat, arg, inner);
        return run(r, f.box->circ, inner, h);
      }
      case CircuitKind::Lift: {
        const std::vector<std::string> bits = flatten(build(c->pat, w));
        if (bits.size() != 1) throw std::runtime_error("interp: lift of a single bit only");
        const int base = counter_;
        counter_ += 64;
        std::optional<oracle::Register> merged;
        for (int v = 0; v < 2; ++v) {
          oracle::Register branch = r;
          branch.apply({oracle::ket(2, v).adjoint()}, bits, {});
          Hosts h2 = h;
          h2[c->name] = HostVal{HostVal::Kind::Int, v, nullptr};
          TreeP t = run(branch, c->rest, w, h2);
          int k = base;
          t = canon(branch, t, k);
          if (merged)
            merged->absorb(branch);
          else
            merged = branch;
          if (v == 1) {
            r = *merged;
            return t;
          }
        }
        throw std::logic_error("unreachable");
      }
      case CircuitKind::Init: {
        HostVal v = eval(c->host, h);
        const std::string o = fresh();
        r.init_classical(o, 2, static_cast<int>(v.v));
        return leaf(o);
      }
      default:
        throw std::runtime_error("interp: unsupported circuit form");
    }
  }

 private:
  std::string fresh() { return "#" + std::to_string(counter_++); }

  // Renames the leaves of `t` to positional names so both lift branches agree.
  TreeP canon(oracle::Register& r, const TreeP& t, int& k) {
    switch (t->kind) {
      case Tree::Kind::Leaf: {
        const std::string n = "#" + std::to_string(k++);
        r.rename(t->leaf, n);
        return leaf(n);
      }
      case Tree::Kind::Unit:
        return t;
      case Tree::Kind::Pair: {
        TreeP a = canon(r, t->a, k);
        return pair(a, canon(r, t->b, k));
      }
    }
    return t;
  }

  static TreeP build(const Pattern& p, Wires& w) {
    switch (p.kind()) {
      case Pattern::Kind::Unit:
        return unit();
      case Pattern::Kind::Wire: {
        auto it = w.find(p.name());
        if (it == w.end()) throw std::runtime_error("interp: unbound wire " + p.name());
        TreeP t = it->second;
        w.erase(it);
        return t;
      }
      case Pattern::Kind::Pair: {
        TreeP a = build(p.first(), w);
        return pair(a, build(p.second(), w));
      }
    }
    return unit();
  }

  static void bind(const Pattern& p, const TreeP& t, Wires& w) {
    switch (p.kind()) {
      case Pattern::Kind::Unit:
        return;
      case Pattern::Kind::Wire:
        w[p.name()] = t;
        return;
      case Pattern::Kind::Pair:
        bind(p.first(), t->a, w);
        bind(p.second(), t->b, w);
        return;
    }
  }

  TreeP gate(oracle::Register& r, const GateRef& g, const std::vector<std::string>& in) {
    const std::string& n = g.name;
    if (n == "meas" || n == "new") {
      const std::string o = fresh();
      if (n == "meas")
        r.measure(in[0], o);
      else
        r.prepare(in[0], o);
      return leaf(o);
    }
    if (n == "init0" || n == "init1") {
      const std::string o = fresh();
      r.init(o, n == "init1");
      return leaf(o);
    }
    if (n == "discard") {
      r.discard(in[0]);
      return unit();
    }
    if (n == "bit-control X" || n == "bit-control Z") {
      r.bit_control(in[0], in[1], n == "bit-control X" ? oracle::pauli_x() : oracle::pauli_z());
      return pair(leaf(in[0]), leaf(in[1]));
    }
    r.unitary(oracle::unitary(n, static_cast<int>(g.index.value_or(0))), in);
    if (in.size() == 1) return leaf(in[0]);
    return pair(leaf(in[0]), leaf(in[1]));
  }

  HostVal eval(const HostTerm& t, const Hosts& h) {
    switch (t->kind) {
      case HostKind::Var:
        return h.at(t->name);
      case HostKind::Box:
        return HostVal{HostVal::Kind::Box, 0, t};
      case HostKind::ClassicalLit:
      case HostKind::IntLit:
        return HostVal{HostVal::Kind::Int, t->value, nullptr};
      case HostKind::If:
        return eval(eval(t->a, h).v ? t->b : t->c, h);
      case HostKind::App:
        return HostVal{HostVal::Kind::Diverge, 0, nullptr};
      default:
        throw std::runtime_error("interp: unsupported host form");
    }
  }

  int counter_ = 0;
};

}  // namespace interp
