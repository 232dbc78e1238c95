#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ewire/denote.hpp"
#include "ewire/driver.hpp"
#include "ewire/parser.hpp"
#include "ewire/typecheck.hpp"
#include "oracle.hpp"

#ifndef EWIRE_SOURCE_DIR
#define EWIRE_SOURCE_DIR "."
#endif

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(EWIRE_SOURCE_DIR) + "/" + rel; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline ewire::Typechecker check_text(const std::string& text) { return ewire::Typechecker(ewire::parse_program(text)); }

inline ewire::Typechecker check_file(const std::string& rel) { return check_text(read_text(source_path(rel))); }

inline ewire::EvalOptions cpsu(std::int64_t fuel = 10000) {
  ewire::EvalOptions o;
  o.mode = ewire::Mode::CPSU;
  o.fuel = fuel;
  return o;
}

inline ewire::SuperOp denote(const ewire::Typechecker& tc, const std::string& entry, ewire::EvalOptions o = {},
                             std::optional<int> qlist = std::nullopt) {
  return ewire::denote_entry(tc, entry, o, qlist);
}

inline double diff(const ewire::Matrix& a, const oracle::Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
  return (a - b).norm();
}

/// Heisenberg matrix of rho -> u rho u^dagger as the library lays it out.
inline oracle::Mat unitary_superop(const oracle::Mat& u) { return oracle::unitary_channel(u); }

}  // namespace testing
