#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ewire/error.hpp"

namespace ewire {

// ---------------------------------------------------------------------------
// Wire types
// ---------------------------------------------------------------------------

/// Circuit-level type: I, W (x) W', a classical base of finite cardinality or
/// a quantum base. Immutable; copies share structure.
///
/// The quantum base named "qlist" is size-indexed: it is opaque to the
/// typechecker and instantiated as qubit (x) (qubit (x) ... (x) I) by the
/// denotation at a concrete length (its dimension field is 0).
class WireType {
 public:
  enum class Kind { Unit, Tensor, Classical, Quantum };

  WireType();  // I

  static WireType unit();
  static WireType tensor(WireType left, WireType right);
  static WireType classical(std::string name, int cardinality);
  static WireType quantum(std::string name, int dimension);
  static WireType bit();
  static WireType qubit();
  static WireType qlist();
  /// qubit (x) (qubit (x) ... (x) I) with `length` qubits.
  static WireType qlist_of_length(int length);

  Kind kind() const;
  bool is_unit() const { return kind() == Kind::Unit; }
  bool is_tensor() const { return kind() == Kind::Tensor; }
  const WireType& left() const;
  const WireType& right() const;
  const std::string& name() const;
  /// Cardinality of a classical base or dimension of a quantum base.
  int size() const;

  bool is_classical() const;
  bool mentions_qlist() const;
  bool is_qlist_base() const;

  friend bool operator==(const WireType& a, const WireType& b);
  friend bool operator!=(const WireType& a, const WireType& b) { return !(a == b); }

 private:
  struct Node;
  explicit WireType(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Replaces every qubit leaf by bit; homomorphic on (x) and I.
WireType classicalize(const WireType& w);

// ---------------------------------------------------------------------------
// Host types
// ---------------------------------------------------------------------------

class HostType {
 public:
  enum class Kind { Unit, Product, Arrow, Monadic, Circ, Classical, Int };

  HostType();  // 1

  static HostType unit();
  static HostType product(HostType a, HostType b);
  static HostType arrow(HostType a, HostType b);
  static HostType monadic(HostType a);
  static HostType circ(WireType in, WireType out);
  static HostType classical(std::string name, int cardinality);
  static HostType bit();
  /// Unbounded host integers; the lifting of the classical wire base `int`.
  static HostType integer();

  Kind kind() const;
  /// Product/Arrow components; Monadic payload is `first()`.
  const HostType& first() const;
  const HostType& second() const;
  const WireType& circ_in() const;
  const WireType& circ_out() const;
  const std::string& name() const;
  int cardinality() const;

  friend bool operator==(const HostType& a, const HostType& b);
  friend bool operator!=(const HostType& a, const HostType& b) { return !(a == b); }

 private:
  struct Node;
  explicit HostType(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// |V|: structural translation of a classical wire type into a host type.
/// Throws TypeError(NotClassical) on a quantum leaf.
HostType lift_type(const WireType& v);

/// Inverse of lift_type on first-order host types. `int_cardinality` sizes
/// the wire base that host integers cross into.
std::optional<WireType> unlift_type(const HostType& a, int int_cardinality);

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

class Pattern {
 public:
  enum class Kind { Wire, Unit, Pair };

  Pattern();  // ()

  static Pattern wire(std::string name);
  static Pattern unit();
  static Pattern pair(Pattern a, Pattern b);

  Kind kind() const;
  const std::string& name() const;
  const Pattern& first() const;
  const Pattern& second() const;

  /// Wire names in left-to-right order.
  std::vector<std::string> wires() const;

  friend bool operator==(const Pattern& a, const Pattern& b);
  friend bool operator!=(const Pattern& a, const Pattern& b) { return !(a == b); }

 private:
  struct Node;
  explicit Pattern(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Gate reference: a library name, an optional integer index (R[n], CR[n]),
/// and the signature the typechecker resolved.
struct GateRef {
  std::string name;
  std::optional<std::int64_t> index;
  std::optional<WireType> in;
  std::optional<WireType> out;

  std::string display() const;
};

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

struct CircuitNode;
struct HostNode;
using CircuitTerm = std::shared_ptr<const CircuitNode>;
using HostTerm = std::shared_ptr<const HostNode>;

enum class CircuitKind {
  Output,    // output p
  Compose,   // p <- C1; C2
  UnitElim,  // () <- p; C
  PairElim,  // (w1, w2) <- p; C
  Gate,      // p2 <- gate g p1; C
  Unbox,     // unbox t p
  Lift,      // x <= lift p; C
  Init,      // init t
  // Surface forms removed by elaboration.
  QLift,     // x <= qlift p; C   (measure, then lift)
  Call,      // reference to a circuit abbreviation, optionally applied to p
};

struct CircuitNode {
  CircuitKind kind;
  Pattern pat;        // Output/Compose/UnitElim/PairElim/Unbox/Lift/QLift/Call arg; Gate output
  Pattern pat_in;     // Gate input
  std::string name;   // Lift/QLift host variable, Call target, PairElim first wire
  std::string name2;  // PairElim second wire
  GateRef gate;
  CircuitTerm first;  // Compose C1
  CircuitTerm rest;   // continuation
  HostTerm host;      // Unbox/Init
  bool has_arg = false;  // Call p
  Span span;
};

enum class HostKind {
  Var,
  Lambda,
  App,
  UnitVal,
  Pair,
  Proj1,
  Proj2,
  Return,
  LetBind,
  Box,
  Run,
  ClassicalLit,
  If,
  IntLit,
  BinOp,
  Fix,
  GateFamily,
  // Surface forms removed by elaboration.
  QRun,
  MeasW,
  NewW,
};

enum class BinOpKind { Add, Sub, Eq, Lt };

const char* to_string(BinOpKind op);

struct HostNode {
  HostKind kind;
  std::string name;                 // Var, Lambda/LetBind binder, ClassicalLit base, GateFamily
  std::optional<HostType> type;     // Lambda annotation; Fix argument type A
  std::optional<WireType> wtype;    // Box input type; Fix W1; MeasW/NewW W
  std::optional<WireType> wtype2;   // Fix W2
  HostTerm a, b, c;
  Pattern pat;                      // Box
  CircuitTerm circ;                 // Box body, Run, QRun
  std::int64_t value = 0;           // IntLit, ClassicalLit
  int cardinality = 0;              // ClassicalLit
  BinOpKind op = BinOpKind::Add;
  Span span;
};

// Construction helpers. Each returns a fresh immutable node.
namespace make {
CircuitTerm output(Pattern p, Span s = {});
CircuitTerm compose(Pattern p, CircuitTerm first, CircuitTerm rest, Span s = {});
CircuitTerm unit_elim(Pattern p, CircuitTerm rest, Span s = {});
CircuitTerm pair_elim(std::string w1, std::string w2, Pattern p, CircuitTerm rest, Span s = {});
CircuitTerm gate(Pattern out, GateRef g, Pattern in, CircuitTerm rest, Span s = {});
CircuitTerm unbox(HostTerm t, Pattern p, Span s = {});
CircuitTerm lift(std::string x, Pattern p, CircuitTerm rest, Span s = {});
CircuitTerm init(HostTerm t, Span s = {});
CircuitTerm qlift(std::string x, Pattern p, CircuitTerm rest, Span s = {});
CircuitTerm call(std::string name, std::optional<Pattern> arg, Span s = {});

HostTerm var(std::string x, Span s = {});
HostTerm lambda(std::string x, std::optional<HostType> type, HostTerm body, Span s = {});
HostTerm app(HostTerm f, HostTerm a, Span s = {});
HostTerm unit(Span s = {});
HostTerm pair(HostTerm a, HostTerm b, Span s = {});
HostTerm proj1(HostTerm t, Span s = {});
HostTerm proj2(HostTerm t, Span s = {});
HostTerm ret(HostTerm t, Span s = {});
HostTerm let_bind(HostTerm t, std::string x, HostTerm u, Span s = {});
HostTerm box(Pattern p, std::optional<WireType> w, CircuitTerm body, Span s = {});
HostTerm run(CircuitTerm c, Span s = {});
HostTerm classical_lit(std::string base, int cardinality, std::int64_t value, Span s = {});
HostTerm if_(HostTerm cond, HostTerm then_, HostTerm else_, Span s = {});
HostTerm int_lit(std::int64_t n, Span s = {});
HostTerm binop(BinOpKind op, HostTerm a, HostTerm b, Span s = {});
HostTerm fix(std::optional<HostType> arg, std::optional<WireType> w1, std::optional<WireType> w2,
             Span s = {});
HostTerm gate_family(std::string name, HostTerm index, Span s = {});
HostTerm qrun(CircuitTerm c, Span s = {});
HostTerm meas_w(WireType w, Span s = {});
HostTerm new_w(WireType w, Span s = {});
}  // namespace make

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

using WireContext = std::vector<std::pair<std::string, WireType>>;

struct ClassicalDecl {
  std::string name;
  int cardinality = 0;
  Span span;
};

struct GateDecl {
  std::string name;
  WireType in;
  WireType out;
  Span span;
};

struct Declaration {
  enum class Kind { Def, Rec, Circuit };
  Kind kind = Kind::Def;
  std::string name;
  std::optional<HostType> type;  // Def/Rec annotation
  HostTerm body;                 // Def/Rec
  WireContext params;            // Circuit: the wire context it is checked in
  std::optional<WireType> out;   // Circuit: optional declared output type
  CircuitTerm circuit;           // Circuit
  Span span;
};

struct Program {
  std::vector<ClassicalDecl> classicals;
  std::vector<GateDecl> gates;
  std::vector<Declaration> decls;
  std::optional<std::string> entry;

  /// Cardinality of the wire base `int` (declared, else 64).
  int int_cardinality() const;
  const Declaration* find(const std::string& name) const;
};

inline constexpr int kDefaultIntCardinality = 64;

// ---------------------------------------------------------------------------
// Syntactic operations
// ---------------------------------------------------------------------------

/// Free wires of a circuit in first-use order.
std::vector<std::string> free_wires(const CircuitTerm& c);
/// Free host variables of a host term / of the host terms inside a circuit.
std::vector<std::string> free_vars(const HostTerm& t);
std::vector<std::string> free_vars(const CircuitTerm& c);

/// Capture-avoiding replacement of the wires of `from` by the matching
/// sub-patterns of `to`. `from` must have the shape of `to` or be a single
/// wire; throws TypeError(PatternShape) otherwise.
CircuitTerm subst_pattern(const CircuitTerm& c, const Pattern& from, const Pattern& to);

/// Capture-avoiding substitution of host variable `x` by `t`.
CircuitTerm subst_host(const CircuitTerm& c, const std::string& x, const HostTerm& t);
HostTerm subst_host(const HostTerm& body, const std::string& x, const HostTerm& t);

/// Renames every wire bound inside `c` to a name that is not in `avoid`.
CircuitTerm freshen_wires(const CircuitTerm& c, const std::vector<std::string>& avoid);

bool alpha_equal(const CircuitTerm& a, const CircuitTerm& b);
bool alpha_equal(const HostTerm& a, const HostTerm& b);
bool alpha_equal(const Program& a, const Program& b);

/// Generates a name based on `base` that is not contained in `avoid`.
std::string fresh_name(const std::string& base, const std::vector<std::string>& avoid);

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string pretty_print(const WireType& w);
std::string pretty_print(const HostType& a);
std::string pretty_print(const Pattern& p);
std::string pretty_print(const CircuitTerm& c);
std::string pretty_print(const HostTerm& t);
std::string pretty_print(const Program& p);

}  // namespace ewire
