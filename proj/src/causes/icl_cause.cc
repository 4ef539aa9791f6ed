#include "icl/causes.h"

namespace icl::causes {

std::vector<Instance> instantiate(const compile::CompiledTheory& ct, const std::vector<lang::Atom>& psi,
                                  const lang::Formula& phi) {
  std::vector<const lang::Atom*> atoms;
  for (const auto& a : psi) atoms.push_back(&a);
  const auto sorts = lang::infer_variable_sorts(ct.theory.vocabulary, {&phi}, atoms);
  lang::collect_atoms(phi, atoms);
  const int horizon = ct.program.horizon();

  std::vector<Instance> out;
  for (const auto& theta : ground::enumerate_substitutions(ct.program.universe(), sorts)) {
    bool in_range = true;
    for (const lang::Atom* a : atoms) {
      const lang::Atom g = ground::apply(*a, theta);
      if (g.time.offset > horizon) {
        if (sorts.empty()) {
          throw compile::DomainError("'" + lang::render_atom(g) + "' lies beyond horizon " +
                                     std::to_string(horizon));
        }
        in_range = false;
        break;
      }
    }
    if (!in_range) continue;
    Instance inst;
    inst.theta = theta;
    try {
      for (const auto& a : psi) inst.cause_atoms.push_back(ct.program.ground(a, theta));
      inst.effect = ct.program.ground(phi, theta);
    } catch (const ground::GroundingError& e) {
      throw compile::DomainError(e.what());
    }
    inst.x = compile::to_assignment(ct, inst.cause_atoms);
    inst.phi = compile::to_event(ct, inst.effect);
    out.push_back(std::move(inst));
  }
  if (out.empty()) throw compile::DomainError("query has no ground instance within the horizon");
  return out;
}

IclCauseResult icl_cause(const compile::CompiledTheory& ct, const std::vector<lang::Atom>& psi,
                         const lang::Formula& phi, const std::vector<lang::Atom>& total_choice,
                         lang::CauseMode mode, const SearchOptions& options) {
  const scm::Context u = compile::context_of_choice(ct, total_choice);
  const auto instances = instantiate(ct, psi, phi);
  IclCauseResult out;
  out.instances = instances.size();
  std::optional<std::size_t> unknown_at;
  std::optional<CauseVerdict> unknown_verdict;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    CauseVerdict v = mode == lang::CauseMode::Weak ? is_weak_cause(ct.model, u, inst.x, inst.phi, options)
                                                   : is_actual_cause(ct.model, u, inst.x, inst.phi, options);
    if (v.verdict == Verdict::False) {
      out.verdict = std::move(v);
      out.failing_substitution = inst.theta;
      out.reported = inst;
      return out;
    }
    if (v.verdict == Verdict::Unknown && !unknown_at) {
      unknown_at = i;
      unknown_verdict = v;
    }
    if (i + 1 == instances.size()) {
      out.verdict = std::move(v);
      out.reported = inst;
    }
  }
  if (unknown_at) {
    out.verdict = std::move(*unknown_verdict);
    out.reported = instances[*unknown_at];
  }
  return out;
}

}  // namespace icl::causes
