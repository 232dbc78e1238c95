#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ewire/algebra.hpp"
#include "ewire/syntax.hpp"

namespace ewire {

/// ⟦W⟧: qubit -> M_2, classical base of cardinality k -> C^k, I -> C,
/// tensor -> alg_tensor. The opaque qlist base has no algebra.
FdAlgebra denote_wire(const WireType& w);

enum class Mode { CPU, CPSU };

const char* to_string(Mode m);

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

struct ValueNode;
using Value = std::shared_ptr<const ValueNode>;

struct EnvNode;
/// Persistent host environment; lookups walk towards older bindings.
using Env = std::shared_ptr<const EnvNode>;

struct EnvNode {
  std::string name;
  Value value;
  Env next;
};

Env env_bind(const Env& env, std::string name, Value v);
const Value* env_lookup(const Env& env, const std::string& name);

/// Over-approximation of the classical values a wire can carry. Leaves of
/// classical bases hold value sets; everything else is Top.
struct Support;
using SupportPtr = std::shared_ptr<const Support>;
struct Support {
  enum class Kind { Top, Values, Pair };
  Kind kind = Kind::Top;
  std::set<std::int64_t> values;
  SupportPtr first, second;
};

SupportPtr support_top();
SupportPtr support_values(std::set<std::int64_t> values);
SupportPtr support_pair(SupportPtr a, SupportPtr b);
SupportPtr support_union(const SupportPtr& a, const SupportPtr& b);

/// A circuit value specialised to a concrete input type.
struct CircInstance {
  SuperOp op;
  WireType out;
  SupportPtr support;
};

/// ⟦Circ(W1, W2)⟧. Boxes whose input type mentions qlist are kept as
/// closures and denoted per concrete list length when unboxed.
struct CircValue {
  WireType in, out;
  bool lazy = false;
  bool bottom = false;
  std::shared_ptr<const CircInstance> eager;
  Pattern pat;
  CircuitTerm body;
  Env env;
  mutable std::map<std::string, std::shared_ptr<const CircInstance>> memo;
};

struct Distribution {
  std::vector<std::pair<Value, double>> outcomes;

  double mass() const;
  double diverge_mass() const;
};

enum class ValueKind { Unit, Int, Classical, Pair, Closure, FixCombinator, Fix, Circ, Dist };

struct ValueNode {
  ValueKind kind = ValueKind::Unit;
  std::int64_t num = 0;  // Int value, Classical index
  std::string base;      // Classical base name
  int card = 0;          // Classical cardinality
  Value first, second;   // Pair; Fix functional in `first`
  std::string param;     // Closure
  HostTerm body;
  Env env;
  WireType fix_in, fix_out;  // FixCombinator / Fix result signature
  std::shared_ptr<const CircValue> circ;
  std::shared_ptr<const Distribution> dist;
};

namespace value {
Value unit();
Value integer(std::int64_t n);
Value classical(const std::string& base, int card, std::int64_t v);
Value bit(bool b);
Value pair(Value a, Value b);
Value closure(std::string param, HostTerm body, Env env);
Value circ(std::shared_ptr<const CircValue> c);
Value dist(Distribution d);
}  // namespace value

/// Structural equality on first-order values; closures and circuits compare
/// by identity.
bool values_equal(const Value& a, const Value& b);
std::string format_value(const Value& v);

/// Values of a classical wire type in lexicographic order, which is also the
/// block order of ⟦V⟧.
std::vector<Value> enumerate_classical(const WireType& v);
std::int64_t encode_classical(const WireType& v, const Value& x);
Value decode_classical(const WireType& v, std::int64_t index);

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

namespace detail {
struct Slot;
struct Den;
}  // namespace detail

struct EvalOptions {
  Mode mode = Mode::CPU;
  std::int64_t fuel = 10000;
};

/// Evaluates host terms and denotes circuits of an elaborated program.
/// Fuel is counted per top-level call of `evaluate`/`reset_fuel`.
class Evaluator {
 public:
  Evaluator(Program elaborated, EvalOptions options = {});

  const EvalOptions& options() const { return options_; }
  const Program& program() const { return program_; }
  void reset_fuel() { fuel_ = options_.fuel; }
  std::int64_t fuel_left() const { return fuel_; }

  /// Resets fuel and evaluates `t`.
  Value evaluate(const HostTerm& t, const Env& env = nullptr);
  Value eval(const HostTerm& t, const Env& env);
  Value global(const std::string& name);
  Value apply(const Value& f, const Value& arg);

  /// Specialises a circuit value to a concrete input wire type. Lazy boxes
  /// are denoted under `support`, the known classical values of the input.
  std::shared_ptr<const CircInstance> instantiate(const CircValue& c, const WireType& concrete_in,
                                                  const SupportPtr& support = nullptr);

  /// Denotation of a closed-over circuit Γ;Ω ⊢ C : W with Ω given in order;
  /// the target is ⟦Ω⟧ = ⟦W1⟧ ⊗ ... ⊗ ⟦Wn⟧ (⟦·⟧ = C).
  SuperOp denote_circuit(const WireContext& omega, const CircuitTerm& c, const Env& env,
                         WireType* out = nullptr);

  /// Exact output distribution of a closed circuit with classical output.
  Distribution run_circuit(const CircuitTerm& c, const Env& env);

 private:
  using Slot = detail::Slot;
  using Den = detail::Den;

  Den denote(const CircuitTerm& c, const std::vector<Slot>& ctx, const Env& env);
  Den compose_with(Den first, const std::vector<Slot>& ctx1, const Pattern& p,
                   const CircuitTerm& rest, const std::vector<Slot>& ctx2,
                   const std::vector<Slot>& ctx, const Env& env);
  Den rebind(const Pattern& from, const Pattern& to, const CircuitTerm& rest,
             const std::vector<Slot>& ctx, const Env& env);
  Den gate_app(const GateRef& g, const Pattern& in, const std::vector<Slot>& ctx1);
  CircInstance box_instance(const Pattern& p, const WireType& in, const CircuitTerm& body,
                            const Env& env, const SupportPtr& support);
  Value make_box(const HostNode& t, const Env& env);
  Value bottom_circ(const WireType& in, const WireType& out);
  Value run_value(const CircuitTerm& c, const Env& env);

  Program program_;
  EvalOptions options_;
  std::int64_t fuel_ = 0;
  std::map<std::string, Value> globals_;
  std::set<std::string> evaluating_;
};

/// Counts of `shots` draws from `d` (splitmix64 + inverse CDF); residual
/// mass is reported under the outcome "⊥". Keys are format_value strings in
/// outcome order.
std::vector<std::pair<std::string, std::int64_t>> sample(const Distribution& d,
                                                         std::uint64_t seed,
                                                         std::int64_t shots);

/// Runs `fn` on a thread with a large stack so deep fixpoint unfoldings do
/// not overflow; rethrows exceptions.
void run_with_stack(const std::function<void()>& fn, std::size_t stack_bytes = std::size_t(1) << 30);

}  // namespace ewire
