#pragma once

#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ewire/denote.hpp"
#include "ewire/normalize.hpp"

namespace ewire {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits, the precision of every printed number.
double round12(double x);
std::string format_number(double x);

/// {source_blocks, target_blocks, rows, cols, matrix: [[re, im], ...], cp, unital, subunital}
Json superop_to_json(const SuperOp& f, double tol = 1e-9);
/// {outcomes: {value: weight}, diverge_mass[, counts]}
Json distribution_to_json(const Distribution& d,
                          const std::vector<std::pair<std::string, std::int64_t>>* counts = nullptr);
/// {step, rule, span}
Json trace_entry_to_json(const TraceEntry& e);
Json span_to_json(const Span& s);
/// {kind, span, message} for any library error.
Json error_to_json(const std::exception& e);
/// Kind name used in diagnostics ("LinearityViolation", "ParseError", ...).
std::string error_kind(const std::exception& e);

}  // namespace ewire
