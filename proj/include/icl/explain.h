// Explanations (EX1-EX4), the largest explanation context set, explanatory
// power and alpha-partial explanations, plus their ICL-level wrappers.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icl/causes.h"

namespace icl::explain {

using causes::Assignment;
using causes::Verdict;

enum class Condition { None, EX1, EX2, EX3, EX4 };
std::string_view to_string(Condition c);

// Partial explanation queries assume phi holds in every context of the set.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContextDetail {
  scm::Context u;
  bool phi = false;
  bool x_holds = false;                // X(u) = x
  std::optional<Verdict> weak_cause;   // only evaluated where X(u) = x
  std::optional<causes::Witness> witness;
};

struct ExplanationVerdict {
  Verdict verdict = Verdict::False;
  Condition failed = Condition::None;
  std::vector<ContextDetail> details;  // one per distinct context, input order
  Assignment ex3_subset;               // EX3 failure: the offending X'
  std::string note;

  bool holds() const { return verdict == Verdict::True; }
};

// Duplicate contexts are ignored.  Throws scm::ModelError on an empty set.
ExplanationVerdict is_explanation(const scm::CausalModel& model, const std::vector<scm::Context>& contexts,
                                  const Assignment& x, const scm::Expr& phi,
                                  const causes::SearchOptions& options = {});

struct PartialExplanationResult {
  // True: C^phi is defined; False: no subset of the contexts admits X = x
  // as an explanation; Unknown: a weak-cause check ran out of budget.
  Verdict defined = Verdict::False;
  std::vector<scm::Context> context_set;  // C^phi, in input order
  std::optional<Rational> power;
  std::optional<bool> alpha_holds;
  bool partial = false;  // power > 0
  std::vector<ContextDetail> details;
  std::string note;
};

// Throws PreconditionError when phi fails in some context.
PartialExplanationResult explanation_context_set(const scm::CausalModel& model,
                                                 const std::vector<scm::Context>& contexts,
                                                 const Assignment& x, const scm::Expr& phi,
                                                 const causes::SearchOptions& options = {});

// P(C^phi | X = x).  Throws PreconditionError when C^phi is undefined or
// undecided, or no context has X(u) = x.
Rational explanatory_power(const scm::ProbCausalModel& pm, const std::vector<scm::Context>& contexts,
                           const Assignment& x, const scm::Expr& phi,
                           const causes::SearchOptions& options = {});

// Context set and power, plus alpha_holds = (power >= alpha) when given.
PartialExplanationResult is_alpha_partial_explanation(const scm::ProbCausalModel& pm,
                                                      const std::vector<scm::Context>& contexts,
                                                      const Assignment& x, const scm::Expr& phi,
                                                      const std::optional<Rational>& alpha,
                                                      const causes::SearchOptions& options = {});

struct IclExplanationResult {
  ExplanationVerdict verdict;
  std::optional<ground::Substitution> failing_substitution;
  std::size_t instances = 0;
  std::optional<causes::Instance> reported;
};

IclExplanationResult icl_explanation(const compile::CompiledTheory& ct, const std::vector<lang::Atom>& psi,
                                     const lang::Formula& phi,
                                     const std::vector<std::vector<lang::Atom>>& total_choices,
                                     const causes::SearchOptions& options = {});

struct IclPartialResult {
  Verdict verdict = Verdict::False;  // partial explanation (at alpha, when given) for every theta
  PartialExplanationResult result;   // of the reported instance
  std::optional<ground::Substitution> failing_substitution;
  std::size_t instances = 0;
  std::optional<causes::Instance> reported;
};

IclPartialResult icl_partial_explanation(const compile::CompiledTheory& ct,
                                         const std::vector<lang::Atom>& psi, const lang::Formula& phi,
                                         const std::vector<std::vector<lang::Atom>>& total_choices,
                                         const std::optional<Rational>& alpha,
                                         const causes::SearchOptions& options = {});

}  // namespace icl::explain
