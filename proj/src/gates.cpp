#include "ewire/gates.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "ewire/denote.hpp"

namespace ewire {

namespace {

const std::set<std::string>& unitary_names() {
  static const std::set<std::string> names = {"H", "X", "Y", "Z", "S", "T",
                                              "SWAP", "CNOT", "CZ", "R", "CR"};
  return names;
}

const std::set<std::string>& other_names() {
  static const std::set<std::string> names = {"meas", "new",      "init0", "init1", "discard",
                                              "isempty", "headtail", "nil",   "cons"};
  return names;
}

bool indexed(const std::string& name) { return name == "R" || name == "CR"; }

void check_index(const std::string& name, std::optional<std::int64_t> index) {
  if (indexed(name)) {
    if (!index)
      throw TypeError(TypeErrorKind::GateSignature, {}, "gate " + name + " needs an index, e.g. " +
                                                            name + "[2]");
    if (*index < 0)
      throw TypeError(TypeErrorKind::GateSignature, {},
                      "gate " + name + "[" + std::to_string(*index) + "]: negative index");
  } else if (index) {
    throw TypeError(TypeErrorKind::GateSignature, {}, "gate " + name + " takes no index");
  }
}

bool strip_prefix(const std::string& name, const std::string& prefix, std::string* rest) {
  if (name.rfind(prefix, 0) != 0) return false;
  *rest = name.substr(prefix.size());
  return true;
}

WireType qq() { return WireType::tensor(WireType::qubit(), WireType::qubit()); }

Matrix phase_gate(std::int64_t n) {
  // exp(2 pi i / 2^n); n = 0 is a full turn.
  const double angle = 2.0 * std::numbers::pi * std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(n, 2000)));
  Matrix u = Matrix::Identity(2, 2);
  u(1, 1) = std::polar(1.0, angle);
  return u;
}

Matrix controlled(const Matrix& u) {
  const auto d = u.rows();
  Matrix c = Matrix::Identity(2 * d, 2 * d);
  c.bottomRightCorner(d, d) = u;
  return c;
}

}  // namespace

bool is_builtin_gate(const std::string& name) {
  return unitary_names().count(name) || other_names().count(name);
}

bool is_qlist_gate(const std::string& name) {
  return name == "isempty" || name == "headtail" || name == "nil" || name == "cons";
}

std::optional<GateSignature> builtin_gate_signature(const std::string& name,
                                                    std::optional<std::int64_t> index) {
  std::string inner;
  if (strip_prefix(name, "bit-control ", &inner)) {
    auto sig = builtin_gate_signature(inner, index);
    if (!sig) return std::nullopt;
    if (sig->in != sig->out || sig->in.mentions_qlist())
      throw TypeError(TypeErrorKind::GateSignature, {},
                      "bit-control needs a gate W -> W, got " + inner);
    return GateSignature{WireType::tensor(WireType::bit(), sig->in),
                         WireType::tensor(WireType::bit(), sig->out)};
  }
  if (strip_prefix(name, "control ", &inner)) {
    auto sig = builtin_gate_signature(inner, index);
    if (!sig) return std::nullopt;
    if (!gate_unitary(inner, index))
      throw TypeError(TypeErrorKind::GateSignature, {}, "control needs a unitary gate, got " + inner);
    return GateSignature{WireType::tensor(WireType::qubit(), sig->in),
                         WireType::tensor(WireType::qubit(), sig->out)};
  }
  if (!is_builtin_gate(name)) return std::nullopt;
  check_index(name, index);
  const WireType q = WireType::qubit(), b = WireType::bit(), i = WireType::unit(),
                 l = WireType::qlist();
  if (name == "meas") return GateSignature{q, b};
  if (name == "new") return GateSignature{b, q};
  if (name == "init0" || name == "init1") return GateSignature{i, q};
  if (name == "discard") return GateSignature{b, i};
  if (name == "SWAP" || name == "CNOT" || name == "CZ" || name == "CR") return GateSignature{qq(), qq()};
  if (name == "isempty") return GateSignature{l, WireType::tensor(b, l)};
  if (name == "headtail") return GateSignature{l, WireType::tensor(q, l)};
  if (name == "nil") return GateSignature{i, l};
  if (name == "cons") return GateSignature{WireType::tensor(q, l), l};
  return GateSignature{q, q};
}

std::optional<Matrix> gate_unitary(const std::string& name, std::optional<std::int64_t> index) {
  std::string inner;
  if (strip_prefix(name, "control ", &inner)) {
    auto u = gate_unitary(inner, index);
    if (!u) return std::nullopt;
    return controlled(*u);
  }
  if (!unitary_names().count(name)) return std::nullopt;
  const Complex I(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  Matrix u = Matrix::Identity(2, 2);
  if (name == "H") {
    u << s, s, s, -s;
  } else if (name == "X") {
    u << 0, 1, 1, 0;
  } else if (name == "Y") {
    u << 0, -I, I, 0;
  } else if (name == "Z") {
    u << 1, 0, 0, -1;
  } else if (name == "S") {
    u << 1, 0, 0, I;
  } else if (name == "T") {
    u << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4);
  } else if (name == "R") {
    check_index(name, index);
    u = phase_gate(*index);
  } else if (name == "CR") {
    check_index(name, index);
    u = controlled(phase_gate(*index));
  } else if (name == "CNOT") {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    u = controlled(x);
  } else if (name == "CZ") {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    u = controlled(z);
  } else if (name == "SWAP") {
    u = Matrix::Zero(4, 4);
    u(0, 0) = u(1, 2) = u(2, 1) = u(3, 3) = 1.0;
  }
  return u;
}

SuperOp gate_denotation(const std::string& name, std::optional<std::int64_t> index) {
  std::string inner;
  if (strip_prefix(name, "bit-control ", &inner)) {
    SuperOp f = gate_denotation(inner, index);
    // ⟦bit ⊗ W⟧ = 2 ⊙ ⟦W⟧: (A0, A1) |-> (A0, f(A1)).
    return op_direct_sum(op_identity(f.source), f);
  }
  if (auto u = gate_unitary(name, index)) return op_unitary(*u);
  if (is_qlist_gate(name))
    throw EvalError("gate " + name + " has no fixed-size denotation");
  if (!is_builtin_gate(name)) throw EvalError("UnknownGate: no denotation for gate '" + name + "'");
  check_index(name, index);
  const FdAlgebra m2 = FdAlgebra::matrix(2), c2 = FdAlgebra::classical(2), c = FdAlgebra::scalar();
  if (name == "meas") {
    SuperOp f = op_zero(c2, m2);
    f.matrix(0, 0) = 1.0;
    f.matrix(3, 1) = 1.0;
    return f;
  }
  if (name == "new") {
    SuperOp f = op_zero(m2, c2);
    f.matrix(0, 0) = 1.0;
    f.matrix(1, 3) = 1.0;
    return f;
  }
  if (name == "init0" || name == "init1") {
    SuperOp f = op_zero(m2, c);
    f.matrix(0, name == "init0" ? 0 : 3) = 1.0;
    return f;
  }
  // discard
  SuperOp f = op_zero(c, c2);
  f.matrix(0, 0) = 1.0;
  f.matrix(1, 0) = 1.0;
  return f;
}

}  // namespace ewire
