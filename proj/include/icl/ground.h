// Horizon-bounded grounding, acyclicity and answer sets of acyclic programs.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icl/lang.h"
#include "icl/rational.h"

namespace icl::ground {

using AtomId = std::uint32_t;

class GroundingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite Herbrand universe: object terms per sort, action terms, and the
// times 0..horizon.
struct HerbrandUniverse {
  std::map<std::string, std::vector<lang::Term>, std::less<>> sorts;
  std::vector<lang::Term> objects;
  std::vector<lang::Term> actions;
  int horizon = 0;

  const std::vector<lang::Term>& sort(std::string_view name) const;
  // Object terms in every one of `vs.object_sorts` (all objects when empty),
  // or all actions for action variables.  Not defined for time variables.
  std::vector<lang::Term> range(const lang::VariableSort& vs) const;
};

struct GroundAtom {
  std::string predicate;
  std::vector<lang::Term> args;
  int time = 0;
  std::string text;  // canonical rendering, e.g. "at(r1, p1, 1)"

  bool is_action() const { return predicate == lang::kDoPredicate; }
  lang::Atom to_atom() const;
};

struct GroundFormula {
  enum class Kind { False, True, Atom, Not, And };
  Kind kind = Kind::True;
  AtomId atom = 0;
  std::vector<GroundFormula> children;

  static GroundFormula truth(bool value);
  static GroundFormula of(AtomId atom);
  bool operator==(const GroundFormula&) const = default;
};

void collect_atoms(const GroundFormula& f, std::vector<AtomId>& out);

struct GroundClause {
  AtomId head = 0;
  GroundFormula body;
  std::vector<AtomId> body_atoms;  // distinct, in first-occurrence order
};

struct GroundOptions {
  std::size_t max_atoms = 100000;
  std::size_t max_clauses = 2000000;
};

// Ground variable binding.  Object and action variables map to ground terms,
// time variables to integers.
struct Substitution {
  std::map<std::string, lang::Term> terms;
  std::map<std::string, int> times;

  bool operator==(const Substitution&) const = default;
  std::string to_string() const;
};

class GroundProgram {
 public:
  const HerbrandUniverse& universe() const { return universe_; }
  const std::vector<GroundAtom>& herbrand_base() const { return atoms_; }
  const GroundAtom& atom(AtomId id) const { return atoms_.at(id); }
  std::size_t size() const { return atoms_.size(); }

  std::optional<AtomId> find(std::string_view text) const;
  std::optional<AtomId> find(const lang::Atom& ground_atom) const;

  const std::vector<GroundClause>& clauses() const { return clauses_; }
  // Clause indices with head `id`.
  const std::vector<std::size_t>& clauses_with_head(AtomId id) const { return by_head_[id]; }

  // Alternatives as atom ids, in theory order.
  const std::vector<std::vector<AtomId>>& choice_space() const { return alternatives_; }
  // Per-alternative probabilities aligned with choice_space(); empty for
  // plain ICL theories.
  const std::vector<std::vector<Rational>>& probabilities() const { return probabilities_; }
  // (alternative, index) for atomic choices.
  std::optional<std::pair<std::size_t, std::size_t>> choice_position(AtomId id) const;

  int horizon() const { return universe_.horizon; }

  // Grounds `f` under `sub`; every atom must exist in the Herbrand base and
  // every time argument must lie within the horizon.  Distinct guards are
  // evaluated away.  Throws GroundingError otherwise.
  GroundFormula ground(const lang::Formula& f, const Substitution& sub = {}) const;
  AtomId ground(const lang::Atom& a, const Substitution& sub = {}) const;

 private:
  friend GroundProgram ground_theory(const lang::IclTheory&, const GroundOptions&);

  AtomId add_atom(GroundAtom atom);

  HerbrandUniverse universe_;
  std::vector<GroundAtom> atoms_;
  std::unordered_map<std::string, AtomId> index_;
  std::vector<GroundClause> clauses_;
  std::vector<std::vector<std::size_t>> by_head_;
  std::vector<std::vector<AtomId>> alternatives_;
  std::vector<std::vector<Rational>> probabilities_;
  std::unordered_map<AtomId, std::pair<std::size_t, std::size_t>> choice_pos_;
};

HerbrandUniverse build_universe(const lang::Vocabulary& vocabulary, int horizon,
                                std::size_t max_terms = 100000);

GroundProgram ground_theory(const lang::IclTheory& theory, const GroundOptions& options = {});

// Every well-sorted ground substitution of `sorts`; time variables range
// over 0..horizon.  Enumeration order is lexicographic in variable name,
// then universe order.
std::vector<Substitution> enumerate_substitutions(const HerbrandUniverse& universe,
                                                  const lang::VariableSorts& sorts);

lang::Term apply(const lang::Term& t, const Substitution& sub);
lang::Atom apply(const lang::Atom& a, const Substitution& sub);

struct Acyclicity {
  bool acyclic = true;
  std::vector<int> level;      // kappa, indexed by AtomId (when acyclic)
  std::vector<AtomId> order;   // atoms sorted by level (when acyclic)
  std::vector<AtomId> cycle;   // p0 -> p1 -> ... -> p0 body-to-head chain
};

Acyclicity check_acyclic(const GroundProgram& program);

class World {
 public:
  World() = default;
  explicit World(std::size_t size) : truth_(size, false) {}

  bool contains(AtomId id) const { return truth_.at(id); }
  void set(AtomId id, bool value) { truth_.at(id) = value; }
  std::size_t size() const { return truth_.size(); }
  std::vector<AtomId> atoms() const;

  bool operator==(const World&) const = default;

 private:
  std::vector<bool> truth_;
};

// One atomic choice per alternative, ordered like choice_space().
struct TotalChoice {
  std::vector<AtomId> atoms;
  bool operator==(const TotalChoice&) const = default;
};

// Validates that `atoms` picks exactly one atomic choice per alternative.
TotalChoice make_total_choice(const GroundProgram& program, const std::vector<lang::Atom>& atoms);
std::vector<TotalChoice> all_total_choices(const GroundProgram& program);

// Unique answer set of program + {p <= true | p in choice}.
World answer_set(const GroundProgram& program, const TotalChoice& choice);

bool world_satisfies(const World& world, const GroundFormula& f);
// Throws GroundingError when `f` is not ground.
bool world_satisfies(const GroundProgram& program, const World& world, const lang::Formula& f);

// Dump in .icl clause syntax.
std::string render_ground_program(const GroundProgram& program);

}  // namespace icl::ground
