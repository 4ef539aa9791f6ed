// Finite structural causal models (U, V, F): evaluation, submodels,
// events, probabilities over contexts, JSON and DOT I/O.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icl/rational.h"

namespace icl::scm {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Value = std::uint16_t;  // index into a variable's domain
using VarId = std::uint32_t;  // index into the base model's endogenous list

struct VarRef {
  bool exogenous = false;
  std::uint32_t index = 0;
  bool operator==(const VarRef&) const = default;
};

// Boolean tree over primitive tests `var = value`.  Used both for clause
// derived mechanism rules and for events.
struct Expr {
  enum class Kind { False, True, Is, Not, And };
  Kind kind = Kind::True;
  VarRef var;
  Value value = 0;
  std::vector<Expr> children;

  static Expr truth(bool v);
  static Expr is(VarRef var, Value value);
  static Expr negation(Expr e);
  static Expr conjunction(std::vector<Expr> es);
  static Expr disjunction(std::vector<Expr> es);
  bool operator==(const Expr&) const = default;
};

struct Variable {
  std::string name;
  std::vector<std::string> domain;
  bool operator==(const Variable&) const = default;
};

// F_X: parents plus a table (row-major over parent domains, last parent
// fastest) and/or rules.  Rules are only allowed for binary variables: the
// value is domain[1] iff some rule holds.
struct Mechanism {
  std::vector<VarRef> parents;
  std::optional<std::vector<Value>> table;
  std::optional<std::vector<Expr>> rules;
};

using Context = std::vector<Value>;

struct Recursion {
  bool recursive = true;
  std::vector<VarId> order;  // parents before children
  std::vector<VarId> cycle;  // X0 -> X1 -> ... -> X0 (parent to child)
};

// Row count of a table over `parents`; nullopt on overflow past `cap`.
std::optional<std::size_t> table_size(const std::vector<std::size_t>& domain_sizes,
                                      std::size_t cap);

// Immutable model.  Submodels share the base and carry an overlay of
// removed (intervened) variables; VarIds stay those of the base.
class CausalModel {
 public:
  CausalModel();  // no variables
  // Validates names, domains, parents and tables.  Cyclic models are
  // accepted here; evaluation rejects them.
  static CausalModel create(std::vector<Variable> exogenous, std::vector<Variable> endogenous,
                            std::vector<Mechanism> mechanisms);

  const std::vector<Variable>& exogenous() const { return base_->exogenous; }
  // All endogenous variables of the base model, including removed ones.
  const std::vector<Variable>& variables() const { return base_->endogenous; }
  const Variable& variable(VarId id) const { return base_->endogenous.at(id); }
  const Mechanism& mechanism(VarId id) const { return base_->mechanisms.at(id); }
  std::size_t domain_size(VarRef r) const;
  std::string name(VarRef r) const;

  // Membership in V of this (sub)model.
  bool in_v(VarId id) const { return !fixed_[id].has_value(); }
  std::optional<Value> fixed_value(VarId id) const { return fixed_[id]; }
  std::vector<VarId> endogenous_ids() const;  // V, in base order

  std::optional<VarRef> find(std::string_view name) const;
  std::optional<VarId> find_endogenous(std::string_view name) const;

  // Removing variables can break cycles of a non-recursive base, so a
  // submodel of one carries its own order.
  const Recursion& recursion() const { return own_recursion_ ? *own_recursion_ : base_->recursion; }
  bool recursive() const { return recursion().recursive; }
  const std::vector<VarId>& order() const;  // throws when not recursive

  // Children (in V of the base) of each endogenous variable.
  const std::vector<std::vector<VarId>>& children() const { return base_->children; }

  // Mechanism output given full values of all variables (exogenous values
  // from `u`, endogenous values from `values`).
  Value apply(VarId id, const Context& u, const std::vector<Value>& values) const;

  // Values of every base endogenous variable under u, with removed
  // variables at their fixed value and `overrides` (Value or -1 per VarId,
  // may be empty) applied on top.
  std::vector<Value> solve(const Context& u, const std::vector<int>& overrides = {}) const;

  // M_{X=x}.  Throws when some X is not in V or a value is out of domain.
  CausalModel submodel(const std::vector<std::pair<VarId, Value>>& assignment) const;

  // Mechanism of `id` with removed parents substituted by their fixed
  // values (table over the remaining parents).
  Mechanism specialized_mechanism(VarId id) const;

  void check_context(const Context& u) const;
  std::vector<Context> all_contexts() const;

 private:
  struct Base {
    std::vector<Variable> exogenous;
    std::vector<Variable> endogenous;
    std::vector<Mechanism> mechanisms;
    std::unordered_map<std::string, VarRef> index;
    Recursion recursion;
    std::vector<std::vector<VarId>> children;
  };
  std::shared_ptr<const Base> base_;
  std::vector<std::optional<Value>> fixed_;
  std::shared_ptr<const Recursion> own_recursion_;
};

Recursion check_recursive(const CausalModel& model);

// Y_M(u) for the listed variables (which must be in V).
std::vector<Value> evaluate(const CausalModel& model, const Context& u,
                            const std::vector<VarId>& ys);

// Throws ModelError if `e` mentions exogenous or removed variables or
// out-of-domain values.
void check_event(const CausalModel& model, const Expr& e);
bool eval_expr(const Expr& e, const Context& u, const std::vector<Value>& values);
bool event_truth(const CausalModel& model, const Context& u, const Expr& phi);
std::vector<VarId> event_variables(const Expr& e);

// Distribution over D(U): product of per-variable marginals or an explicit
// joint table (contexts not listed have probability 0).
struct Distribution {
  enum class Kind { Product, Joint };
  Kind kind = Kind::Product;
  std::vector<std::vector<Rational>> marginals;
  std::vector<std::pair<Context, Rational>> joint;

  Rational probability(const Context& u) const;
};

struct ProbCausalModel {
  CausalModel model;
  Distribution distribution;
};

// Checks nonnegativity and normalisation (exact); throws ModelError.
void check_distribution(const CausalModel& model, const Distribution& d);

Rational context_probability(const ProbCausalModel& pm,
                             const std::function<bool(const Context&)>& predicate);

// SCM JSON.  Writing a submodel emits its V only, with specialised
// mechanisms.
struct ModelDocument {
  CausalModel model;
  std::optional<Distribution> distribution;
};
ModelDocument read_model_json(std::string_view text);
std::string write_model_json(const CausalModel& model,
                             const std::optional<Distribution>& distribution = std::nullopt);

// Parent graph in Graphviz syntax.
std::string to_dot(const CausalModel& model);

std::string render_expr(const CausalModel& model, const Expr& e);

}  // namespace icl::scm
