#include "icl/explain.h"

#include <algorithm>

namespace icl::explain {

using causes::SearchOptions;
using scm::CausalModel;
using scm::Context;
using scm::Expr;

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::None:
      return "none";
    case Condition::EX1:
      return "EX1";
    case Condition::EX2:
      return "EX2";
    case Condition::EX3:
      return "EX3";
    case Condition::EX4:
      return "EX4";
  }
  return "";
}

namespace {

std::vector<Context> distinct(const CausalModel& model, const std::vector<Context>& contexts) {
  if (contexts.empty()) throw scm::ModelError("the context set is empty");
  std::vector<Context> out;
  for (const auto& u : contexts) {
    model.check_context(u);
    if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
  }
  return out;
}

bool holds_at(const std::vector<scm::Value>& values, const Assignment& x) {
  return std::all_of(x.begin(), x.end(), [&](const auto& p) { return values[p.first] == p.second; });
}

// phi and X(u) = x per context; weak-cause checks where X(u) = x.
std::vector<ContextDetail> details_of(const CausalModel& model, const std::vector<Context>& contexts,
                                      const Assignment& x, const Expr& phi, bool with_weak,
                                      const SearchOptions& options) {
  std::vector<ContextDetail> out;
  for (const auto& u : contexts) {
    ContextDetail d;
    d.u = u;
    const auto values = model.solve(u);
    d.phi = scm::eval_expr(phi, u, values);
    d.x_holds = holds_at(values, x);
    if (with_weak && d.x_holds) {
      auto v = causes::is_weak_cause(model, u, x, phi, options);
      d.weak_cause = v.verdict;
      d.witness = v.witness;
    }
    out.push_back(std::move(d));
  }
  return out;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// EX3 over every nonempty proper subset of X.  The empty subset is never a
// weak cause, so it is satisfied by any context.
std::pair<Verdict, Assignment> check_ex3(const CausalModel& model, const std::vector<Context>& contexts,
                                         const Assignment& x, const Expr& phi,
                                         const SearchOptions& options) {
  bool unknown = false;
  for (std::size_t k = 1; k < x.size(); ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    do {
      Assignment sub;
      for (std::size_t i : idx) sub.push_back(x[i]);
      bool satisfied = false, sub_unknown = false;
      for (const auto& u : contexts) {
        if (!holds_at(model.solve(u), sub)) continue;
        const auto v = causes::is_weak_cause(model, u, sub, phi, options);
        if (v.verdict == Verdict::False) {
          satisfied = true;
          break;
        }
        if (v.verdict == Verdict::Unknown) sub_unknown = true;
      }
      if (!satisfied) {
        if (!sub_unknown) return {Verdict::False, sub};
        unknown = true;
      }
    } while (next_combination(idx, x.size()));
  }
  return {unknown ? Verdict::Unknown : Verdict::True, {}};
}

const char* kBudgetNote = "a weak-cause check was undecided within the search budget";

}  // namespace

ExplanationVerdict is_explanation(const CausalModel& model, const std::vector<Context>& contexts,
                                  const Assignment& x, const Expr& phi, const SearchOptions& options) {
  const auto cs = distinct(model, contexts);
  scm::check_event(model, phi);
  ExplanationVerdict out;
  out.details = details_of(model, cs, x, phi, false, options);
  auto fail = [&](Condition c) {
    out.verdict = Verdict::False;
    out.failed = c;
    return out;
  };
  if (!std::all_of(out.details.begin(), out.details.end(), [](const auto& d) { return d.phi; })) {
    return fail(Condition::EX1);
  }
  const bool some_x = std::any_of(out.details.begin(), out.details.end(), [](const auto& d) { return d.x_holds; });
  const bool some_not_x =
      std::any_of(out.details.begin(), out.details.end(), [](const auto& d) { return !d.x_holds; });
  if (!some_x || !some_not_x) return fail(Condition::EX4);

  bool unknown = false;
  for (auto& d : out.details) {
    if (!d.x_holds) continue;
    const auto v = causes::is_weak_cause(model, d.u, x, phi, options);
    d.weak_cause = v.verdict;
    d.witness = v.witness;
    if (v.verdict == Verdict::False) return fail(Condition::EX2);
    if (v.verdict == Verdict::Unknown) unknown = true;
  }
  auto [ex3, subset] = check_ex3(model, cs, x, phi, options);
  if (ex3 == Verdict::False) {
    out.ex3_subset = std::move(subset);
    return fail(Condition::EX3);
  }
  if (unknown || ex3 == Verdict::Unknown) {
    out.verdict = Verdict::Unknown;
    out.note = kBudgetNote;
    return out;
  }
  out.verdict = Verdict::True;
  return out;
}

PartialExplanationResult explanation_context_set(const CausalModel& model,
                                                 const std::vector<Context>& contexts, const Assignment& x,
                                                 const Expr& phi, const SearchOptions& options) {
  const auto cs = distinct(model, contexts);
  scm::check_event(model, phi);
  PartialExplanationResult out;
  out.details = details_of(model, cs, x, phi, true, options);
  for (const auto& d : out.details) {
    if (!d.phi) throw PreconditionError("the effect does not hold in every context of the set");
  }
  bool unknown = false;
  for (const auto& d : out.details) {
    if (!d.x_holds || d.weak_cause == Verdict::True) out.context_set.push_back(d.u);
    if (d.weak_cause == Verdict::Unknown) unknown = true;
  }
  if (unknown) {
    out.defined = Verdict::Unknown;
    out.note = kBudgetNote;
    return out;
  }
  // The candidate is the largest set satisfying EX1 and EX2; it is an
  // explanation set iff EX3 and EX4 hold on it.
  bool some_x = false, some_not_x = false;
  for (const auto& d : out.details) {
    if (d.x_holds && d.weak_cause == Verdict::True) some_x = true;
    if (!d.x_holds) some_not_x = true;
  }
  if (!some_x || !some_not_x) {
    out.defined = Verdict::False;
    out.context_set.clear();
    return out;
  }
  const auto ex3 = check_ex3(model, out.context_set, x, phi, options).first;
  out.defined = ex3;
  if (ex3 == Verdict::Unknown) out.note = kBudgetNote;
  if (ex3 == Verdict::False) out.context_set.clear();
  return out;
}

namespace {

void add_power(const scm::ProbCausalModel& pm, PartialExplanationResult& r) {
  Rational num = 0, den = 0;
  for (const auto& d : r.details) {
    if (!d.x_holds) continue;
    const Rational p = pm.distribution.probability(d.u);
    den += p;
    if (d.weak_cause == Verdict::True) num += p;
  }
  if (den == 0) throw PreconditionError("P(X = x) is zero over the context set");
  r.power = num / den;
  r.partial = *r.power > 0;
}

}  // namespace

Rational explanatory_power(const scm::ProbCausalModel& pm, const std::vector<Context>& contexts,
                           const Assignment& x, const Expr& phi, const SearchOptions& options) {
  auto r = explanation_context_set(pm.model, contexts, x, phi, options);
  if (r.defined != Verdict::True) throw PreconditionError("the explanation context set is not defined");
  add_power(pm, r);
  return *r.power;
}

PartialExplanationResult is_alpha_partial_explanation(const scm::ProbCausalModel& pm,
                                                      const std::vector<Context>& contexts,
                                                      const Assignment& x, const Expr& phi,
                                                      const std::optional<Rational>& alpha,
                                                      const SearchOptions& options) {
  auto r = explanation_context_set(pm.model, contexts, x, phi, options);
  if (r.defined != Verdict::True) return r;
  add_power(pm, r);
  if (alpha) r.alpha_holds = *r.power >= *alpha;
  return r;
}

namespace {

std::vector<Context> contexts_of(const compile::CompiledTheory& ct,
                                 const std::vector<std::vector<lang::Atom>>& total_choices) {
  std::vector<Context> out;
  for (const auto& b : total_choices) out.push_back(compile::context_of_choice(ct, b));
  return out;
}

}  // namespace

IclExplanationResult icl_explanation(const compile::CompiledTheory& ct, const std::vector<lang::Atom>& psi,
                                     const lang::Formula& phi,
                                     const std::vector<std::vector<lang::Atom>>& total_choices,
                                     const SearchOptions& options) {
  const auto cs = contexts_of(ct, total_choices);
  const auto instances = causes::instantiate(ct, psi, phi);
  IclExplanationResult out;
  out.instances = instances.size();
  std::optional<std::size_t> unknown_at;
  std::optional<ExplanationVerdict> unknown_verdict;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto v = is_explanation(ct.model, cs, instances[i].x, instances[i].phi, options);
    if (v.verdict == Verdict::False) {
      out.verdict = std::move(v);
      out.failing_substitution = instances[i].theta;
      out.reported = instances[i];
      return out;
    }
    if (v.verdict == Verdict::Unknown && !unknown_at) {
      unknown_at = i;
      unknown_verdict = v;
    }
    if (i + 1 == instances.size()) {
      out.verdict = std::move(v);
      out.reported = instances[i];
    }
  }
  if (unknown_at) {
    out.verdict = std::move(*unknown_verdict);
    out.reported = instances[*unknown_at];
  }
  return out;
}

IclPartialResult icl_partial_explanation(const compile::CompiledTheory& ct,
                                         const std::vector<lang::Atom>& psi, const lang::Formula& phi,
                                         const std::vector<std::vector<lang::Atom>>& total_choices,
                                         const std::optional<Rational>& alpha, const SearchOptions& options) {
  const auto pm = ct.prob();
  const auto cs = contexts_of(ct, total_choices);
  const auto instances = causes::instantiate(ct, psi, phi);
  IclPartialResult out;
  out.instances = instances.size();
  std::optional<std::size_t> unknown_at;
  std::optional<PartialExplanationResult> unknown_result;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto r = is_alpha_partial_explanation(pm, cs, instances[i].x, instances[i].phi, alpha, options);
    Verdict v = Verdict::Unknown;
    if (r.defined == Verdict::False) {
      v = Verdict::False;
    } else if (r.defined == Verdict::True) {
      v = (alpha ? *r.alpha_holds : r.partial) ? Verdict::True : Verdict::False;
    }
    if (v == Verdict::False) {
      out.verdict = Verdict::False;
      out.result = std::move(r);
      out.failing_substitution = instances[i].theta;
      out.reported = instances[i];
      return out;
    }
    if (v == Verdict::Unknown && !unknown_at) {
      unknown_at = i;
      unknown_result = r;
    }
    if (i + 1 == instances.size()) {
      out.verdict = v;
      out.result = std::move(r);
      out.reported = instances[i];
    }
  }
  if (unknown_at) {
    out.verdict = Verdict::Unknown;
    out.result = std::move(*unknown_result);
    out.reported = instances[*unknown_at];
  }
  return out;
}

}  // namespace icl::explain
