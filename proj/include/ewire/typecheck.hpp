#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ewire/syntax.hpp"

namespace ewire {

/// Γ: later bindings shadow earlier ones.
using HostContext = std::vector<std::pair<std::string, HostType>>;

struct CheckedHost {
  HostType type;
  HostTerm term;  // elaborated: core constructors only, annotations filled in
};

struct CheckedCircuit {
  WireType type;
  CircuitTerm term;
};

/// Ω ⟹ p : W. Exchange is implicit (wires are looked up by name); every wire
/// of Ω must occur exactly once in p.
WireType match_pattern(const WireContext& omega, const Pattern& p);

/// Checks and elaborates a program. Declarations are processed in order and
/// become globals of the later ones.
class Typechecker {
 public:
  explicit Typechecker(const Program& program);

  /// The elaborated program: every declaration is a `def` (or a `circuit`
  /// with its boxed form in `body`) over core syntax.
  const Program& elaborated() const { return elaborated_; }
  const std::vector<std::pair<std::string, HostType>>& declaration_types() const { return types_; }
  std::optional<HostType> global_type(const std::string& name) const;

  CheckedHost check_host(const HostContext& gamma, const HostTerm& t,
                         const std::optional<HostType>& expected = std::nullopt) const;
  CheckedCircuit check_circuit(const HostContext& gamma, const WireContext& omega,
                               const CircuitTerm& c) const;

 private:
  friend class CheckerImpl;
  Program source_;
  Program elaborated_;
  std::vector<std::pair<std::string, HostType>> types_;
  std::map<std::string, HostType> globals_;
  std::map<std::string, Declaration> circuits_;
};

/// Elaborated program of `p` (throws TypeError).
Program elaborate_sugar(const Program& p);

/// meas_W : Circ(W, Ŵ) and new_W : Circ(Ŵ, W), built by induction on W.
HostTerm meas_circuit(const WireType& w);
HostTerm new_circuit(const WireType& w);

}  // namespace ewire
