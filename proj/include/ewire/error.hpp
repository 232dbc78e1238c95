#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ewire {

/// Source position, 1-based. A zero line means "synthesized".
struct Span {
  int line = 0;
  int col = 0;
};

std::string to_string(const Span& span);

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
 public:
  ParseError(Span span, std::string message, std::vector<std::string> expected = {});
  Span span;
  std::string message;
  std::vector<std::string> expected;
};

enum class TypeErrorKind {
  LinearityViolation,
  UnboundWire,
  UnusedWire,
  NotClassical,
  Mismatch,
  EffectfulUnbox,
  GateSignature,
  PatternShape,
};

const char* to_string(TypeErrorKind kind);

class TypeError : public Error {
 public:
  TypeError(TypeErrorKind kind, Span span, std::string message);
  TypeErrorKind kind;
  Span span;
  std::string message;
};

/// Errors raised while evaluating host terms or denoting circuits.
class EvalError : public Error {
 public:
  explicit EvalError(const std::string& msg) : Error(msg) {}
};

/// Dimension caps, fuel exhaustion at non-circuit types and similar limits.
class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& msg) : Error(msg) {}
};

}  // namespace ewire
