#pragma once

#include <optional>
#include <string>

#include "ewire/denote.hpp"
#include "ewire/normalize.hpp"
#include "ewire/typecheck.hpp"

namespace ewire {

/// Replaces every qlist leaf by the concrete list of `length` qubits.
WireType concretize_qlist(const WireType& w, int length);

/// The declaration a command acts on: `requested`, else `main`, else the
/// last declaration.
std::string resolve_entry(const Program& p, const std::optional<std::string>& requested);

/// Exact output distribution of an entry of type T(A), Circ(I, V) with V
/// classical, or Circ(I, W) (measured with meas_W).
Distribution run_entry(const Typechecker& tc, const std::string& entry, const EvalOptions& options);

/// Heisenberg map of an entry of circuit type. Inputs mentioning qlist need
/// `qlist_size`.
SuperOp denote_entry(const Typechecker& tc, const std::string& entry, const EvalOptions& options,
                     std::optional<int> qlist_size = std::nullopt, WireType* out = nullptr);

struct EntryNormalization {
  std::string text;  // the normalized declaration body
  std::vector<TraceEntry> trace;
  bool step_limit = false;
};

EntryNormalization normalize_entry(const Typechecker& tc, const std::string& entry,
                                   const NormalizeOptions& options);

}  // namespace ewire
