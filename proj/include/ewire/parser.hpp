#pragma once

#include <string>
#include <string_view>

#include "ewire/syntax.hpp"

namespace ewire {

/// Parses a whole `.ew` source file.
Program parse_program(std::string_view text);

// Fragment parsers. `context` supplies header declarations (classical bases,
// gate declarations, circuit abbreviations) needed to resolve names; the
// fragment must span the whole input.
CircuitTerm parse_circuit(std::string_view text, const Program* context = nullptr);
HostTerm parse_host_term(std::string_view text, const Program* context = nullptr);
WireType parse_wire_type(std::string_view text, const Program* context = nullptr);
HostType parse_host_type(std::string_view text, const Program* context = nullptr);
Pattern parse_pattern(std::string_view text);

}  // namespace ewire
