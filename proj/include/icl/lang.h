// Abstract syntax, concrete syntax and validation for ICL / PICL theories
// and query files.
//
// Theory files (.icl):
//
//   % comment
//   sort pos = {p1, p2}.
//   func next(pos) : pos.          % object function symbols (optional)
//   depth 1.                       % nesting depth for function symbols
//   action moveTo(pos).
//   pred at(thing, pos).           % trailing time argument is implicit
//   choice { fa(pickUp(o1), 0) : 0.3, su(pickUp(o1), 0) : 0.7 }.
//   carrying(O, T+1) <= carrying(O, T) & ~do(putDown(O), T).
//   at(r1, p2, 0).
//   exec do(moveTo(p1), 0).
//   horizon 2.
//
// Uppercase identifiers are variables.  `|` and `<=` inside bodies are
// desugared into `~` and `&` at parse time.  `X \= Y` is a built-in
// inequality over object or action terms.  See docs/grammar.md.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icl/rational.h"

namespace icl::lang {

struct SourceLocation {
  int line = 0;
  int column = 0;
};

// Every rejected input is reported through this exception; `location` is
// {0,0} when a diagnostic has no single source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, SourceLocation location);
  SourceLocation location() const { return location_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  SourceLocation location_;
};

inline constexpr std::string_view kActionSort = "action";
inline constexpr std::string_view kObjectSort = "object";
inline constexpr std::string_view kDoPredicate = "do";

// Object or action term.  Constants are zero-argument applications.
struct Term {
  enum class Kind { Variable, Apply };
  Kind kind = Kind::Apply;
  std::string name;
  std::vector<Term> args;

  static Term variable(std::string name);
  static Term constant(std::string name);
  static Term apply(std::string name, std::vector<Term> args);

  bool is_ground() const;
  bool operator==(const Term&) const = default;
};

// `variable + offset`, or the numeral `offset` when `variable` is empty.
struct TimeTerm {
  std::string variable;
  int offset = 0;

  static TimeTerm at(int t) { return TimeTerm{"", t}; }
  bool is_ground() const { return variable.empty(); }
  bool operator==(const TimeTerm&) const = default;
};

// do(a, s) when predicate == "do" (args holds the single action term),
// otherwise the fluent p(t1, ..., tk, s).
struct Atom {
  std::string predicate;
  std::vector<Term> args;
  TimeTerm time;

  bool is_action() const { return predicate == kDoPredicate; }
  bool is_ground() const;
  bool operator==(const Atom&) const = default;
};

struct Formula {
  enum class Kind { False, True, Atom, Not, And, Distinct };
  Kind kind = Kind::True;
  lang::Atom atom;                 // Kind::Atom
  std::vector<Formula> children;   // Not: 1, And: >= 2
  std::vector<Term> terms;         // Distinct: 2

  static Formula truth(bool value);
  static Formula of(lang::Atom a);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> fs);
  static Formula disjunction(Formula a, Formula b);   // ~(~a & ~b)
  static Formula implication(Formula a, Formula b);   // a <= b  ==  ~(~a & b)
  static Formula distinct(Term a, Term b);

  bool operator==(const Formula&) const = default;
};

struct SortDecl {
  std::string name;
  std::vector<std::string> members;
  bool operator==(const SortDecl&) const = default;
};

struct FunctionDecl {
  std::string name;
  std::vector<std::string> arg_sorts;
  std::string result_sort;
  bool operator==(const FunctionDecl&) const = default;
};

struct ActionDecl {
  std::string name;
  std::vector<std::string> arg_sorts;
  bool operator==(const ActionDecl&) const = default;
};

// Argument sorts exclude the implicit trailing time argument.  A sort is a
// declared object sort, "object" (every object term) or "action".
struct PredicateDecl {
  std::string name;
  std::vector<std::string> arg_sorts;
  bool operator==(const PredicateDecl&) const = default;
};

struct Vocabulary {
  std::vector<SortDecl> sorts;
  std::vector<FunctionDecl> functions;
  std::vector<ActionDecl> actions;
  std::vector<PredicateDecl> predicates;
  int function_depth = 0;

  const SortDecl* find_sort(std::string_view name) const;
  const FunctionDecl* find_function(std::string_view name) const;
  const ActionDecl* find_action(std::string_view name) const;
  const PredicateDecl* find_predicate(std::string_view name) const;
  bool is_constant(std::string_view name) const;

  bool operator==(const Vocabulary&) const = default;
};

struct Clause {
  Atom head;
  Formula body;
  bool operator==(const Clause&) const = default;
};

struct AtomicChoice {
  Atom atom;
  std::optional<std::string> probability;  // decimal or fraction literal
  bool operator==(const AtomicChoice&) const = default;
};

struct Alternative {
  std::vector<AtomicChoice> choices;
  bool operator==(const Alternative&) const = default;
};

struct IclTheory {
  Vocabulary vocabulary;
  std::vector<Clause> program;
  std::vector<Alternative> choice_space;
  std::vector<Atom> executions;
  int horizon = 0;

  // True iff every atomic choice carries a probability (and there is at
  // least one alternative).
  bool probabilistic() const;
  Rational probability(std::size_t alternative, std::size_t choice) const;

  bool operator==(const IclTheory&) const = default;
};

enum class CauseMode { Weak, Actual };
enum class ExecMode { Fixed, Overridable };

std::string_view to_string(CauseMode mode);
std::string_view to_string(ExecMode mode);

// Shared by every query kind.  `executions` is empty-optional when the
// query file has no `exec` line, in which case the theory's executions
// apply.
struct QueryCommon {
  std::vector<Atom> cause;  // conjunction of atoms (psi)
  Formula effect;           // phi
  std::optional<std::vector<Atom>> executions;
  ExecMode exec_mode = ExecMode::Fixed;
};

struct CauseQuery : QueryCommon {
  std::vector<Atom> total_choice;
  CauseMode mode = CauseMode::Actual;
};

struct ExplanationQuery : QueryCommon {
  std::vector<std::vector<Atom>> total_choices;
};

struct PartialExplanationQuery : QueryCommon {
  std::vector<std::vector<Atom>> total_choices;
  std::optional<std::string> alpha;
};

using Query = std::variant<CauseQuery, ExplanationQuery, PartialExplanationQuery>;

const QueryCommon& common(const Query& q);

// Parses and validates a theory; throws ParseError with the first
// diagnostic.
IclTheory parse_theory(std::string_view source);

// Validates a programmatically built theory (the checks parse_theory runs).
void validate_theory(const IclTheory& theory);

Query parse_query(std::string_view source, const IclTheory& theory);

std::string render_theory(const IclTheory& theory);
std::string render_atom(const Atom& atom);
std::string render_term(const Term& term);
std::string render_time(const TimeTerm& time);
std::string render_formula(const Formula& formula);
// Symbol names print bare when they are plain lowercase identifiers and
// single-quoted otherwise.
std::string render_symbol(std::string_view name);

// ---------------------------------------------------------------------------
// Sorting

enum class VarKind { Object, Action, Time };

// Range of a clause or query variable: its kind plus every object sort it
// occurs under (the variable ranges over their intersection).
struct VariableSort {
  VarKind kind = VarKind::Object;
  std::set<std::string> object_sorts;
  bool operator==(const VariableSort&) const = default;
};

using VariableSorts = std::map<std::string, VariableSort>;

// Infers variable sorts over a set of formulas and atoms; throws ParseError
// on kind conflicts or ill-sorted atoms.
VariableSorts infer_variable_sorts(const Vocabulary& vocabulary,
                                   const std::vector<const Formula*>& formulas,
                                   const std::vector<const Atom*>& atoms = {});

// Throws ParseError if the atom does not respect the vocabulary.
void check_atom(const Vocabulary& vocabulary, const Atom& atom);

bool is_conjunction_of_atoms(const Formula& f);
void collect_atoms(const Formula& f, std::vector<const Atom*>& out);
// Desugared form: only False, True, Atom, Not, And (and Distinct guards).
bool is_core_formula(const Formula& f);

}  // namespace icl::lang
