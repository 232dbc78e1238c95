#pragma once

#include <optional>
#include <string>

#include "ewire/algebra.hpp"
#include "ewire/syntax.hpp"

namespace ewire {

struct GateSignature {
  WireType in;
  WireType out;
};

/// True for names of the built-in library (without control prefixes).
bool is_builtin_gate(const std::string& name);

/// Signature of a built-in gate, resolving "bit-control" and "control"
/// prefixes. Returns nullopt for unknown names; throws TypeError(GateSignature)
/// on a bad index.
std::optional<GateSignature> builtin_gate_signature(const std::string& name,
                                                    std::optional<std::int64_t> index);

/// Heisenberg map of a built-in gate with a fixed signature (not the qlist
/// gates, whose denotation depends on the list length).
SuperOp gate_denotation(const std::string& name, std::optional<std::int64_t> index);

/// The unitary behind a unitary gate name, if any.
std::optional<Matrix> gate_unitary(const std::string& name, std::optional<std::int64_t> index);

bool is_qlist_gate(const std::string& name);

}  // namespace ewire
