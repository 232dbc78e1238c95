#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ewire/denote.hpp"
#include "ewire/syntax.hpp"

namespace ewire {

/// The circuit equations, oriented left to right, in priority order. The
/// last three are host steps used to expose a literal box under `unbox`.
enum class Rule {
  UnboxBox,
  OutputSubst,
  GateCommute,
  LiftCommute,
  UnitEta,
  PairEta,
  UnitCommute,
  PairCommute,
  LiftInit,
  InitLift,
  Inline,
  Beta,
  Proj,
};

const char* to_string(Rule r);

struct TraceEntry {
  int step = 0;
  Rule rule = Rule::UnboxBox;
  Span span;
};

struct NormalizeOptions {
  bool copower_rules = false;  // enables LiftInit and InitLift
  int max_steps = 10000;
};

struct NormalizeResult {
  CircuitTerm term;
  std::vector<TraceEntry> trace;
  bool step_limit = false;  // stopped at max_steps with a redex left
};

struct HostNormalizeResult {
  HostTerm term;
  std::vector<TraceEntry> trace;
  bool step_limit = false;
};

/// One leftmost-outermost application of `rule` (nullopt when nothing
/// matches). `program` supplies the globals Inline may unfold.
std::optional<CircuitTerm> apply_rule(Rule rule, const CircuitTerm& c, const Program* program = nullptr);

NormalizeResult normalize(const CircuitTerm& c, const NormalizeOptions& options = {},
                          const Program* program = nullptr);
/// Normalizes every circuit inside a host term (box bodies, run).
HostNormalizeResult normalize_host(const HostTerm& t, const NormalizeOptions& options = {},
                                   const Program* program = nullptr);

struct EquivResult {
  bool equal = false;
  double distance = 0;  // Frobenius distance, infinity when the types differ
};

/// Compares ⟦Γ;Ω ⊢ C1⟧ and ⟦Γ;Ω ⊢ C2⟧ in a fresh evaluator for each side.
EquivResult check_equiv(const CircuitTerm& c1, const CircuitTerm& c2, const WireContext& omega,
                        const Program& elaborated, const Env& env = nullptr, double tol = 1e-9,
                        EvalOptions options = {});

}  // namespace ewire
