// Halpern-Pearl weak and actual causes (AC1-AC3) over causal models, and
// their lifting to ICL theories.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icl/compile.h"
#include "icl/ground.h"
#include "icl/scm.h"

namespace icl::causes {

enum class Verdict { False, True, Unknown };
std::string_view to_string(Verdict v);

enum class Condition { None, AC1, AC2, AC3 };
std::string_view to_string(Condition c);

using Assignment = std::vector<std::pair<scm::VarId, scm::Value>>;

struct Witness {
  Assignment w;      // W = w
  Assignment x_bar;  // X = x-bar
};

struct SearchOptions {
  std::uint64_t budget = 5'000'000;        // examined (W, w) pairs per weak-cause check
  std::uint64_t z_branch_cap = 1'000'000;  // AC2(b) evaluations per (W, w)
  // Brute force: every W in V \ X and every subset Z of V \ (X u W).
  bool oracle = false;
};

struct SearchStats {
  std::uint64_t pairs = 0;       // (W, w) pairs examined
  std::uint64_t evaluations = 0; // model evaluations
  std::size_t candidates = 0;    // |candidate W variables|
};

struct CauseVerdict {
  Verdict verdict = Verdict::False;
  Condition failed = Condition::None;
  std::optional<Witness> witness;
  Assignment smaller_cause;  // AC3 failure: a proper subset satisfying AC1 and AC2
  std::string note;          // why Unknown
  SearchStats stats;

  bool holds() const { return verdict == Verdict::True; }
};

CauseVerdict is_weak_cause(const scm::CausalModel& model, const scm::Context& u, const Assignment& x,
                           const scm::Expr& phi, const SearchOptions& options = {});
CauseVerdict is_actual_cause(const scm::CausalModel& model, const scm::Context& u, const Assignment& x,
                             const scm::Expr& phi, const SearchOptions& options = {});

// Re-checks AC2(a) and AC2(b) for a given witness.  AC2(b) is decided by
// enumerating every subset of the variables that are descendants of a
// changed W variable and ancestors of phi, so keep those sets small.
struct WitnessCheck {
  bool ac2a = false;
  bool ac2b = false;
};
WitnessCheck check_witness(const scm::CausalModel& model, const scm::Context& u, const Assignment& x,
                           const scm::Expr& phi, const Witness& witness);

// Ancestors-or-self of `roots` among the variables of V (removed variables
// are not traversed).
std::vector<bool> ancestors(const scm::CausalModel& model, const std::vector<scm::VarId>& roots);

// ---------------------------------------------------------------------------
// ICL level

// One ground instance (psi theta, phi theta) of a query.
struct Instance {
  ground::Substitution theta;
  std::vector<ground::AtomId> cause_atoms;
  ground::GroundFormula effect;
  Assignment x;   // rho(psi theta)
  scm::Expr phi;  // rho(phi theta)
};

// Every well-sorted substitution of the free variables of psi and phi.
// Substitutions that push a time past the horizon are skipped; a query
// with no admissible instance is rejected.  Throws compile::DomainError.
std::vector<Instance> instantiate(const compile::CompiledTheory& ct, const std::vector<lang::Atom>& psi,
                                  const lang::Formula& phi);

struct IclCauseResult {
  CauseVerdict verdict;  // of the first failing (or last) instance
  std::optional<ground::Substitution> failing_substitution;
  std::size_t instances = 0;
  std::optional<Instance> reported;  // instance `verdict` refers to
};

IclCauseResult icl_cause(const compile::CompiledTheory& ct, const std::vector<lang::Atom>& psi,
                         const lang::Formula& phi, const std::vector<lang::Atom>& total_choice,
                         lang::CauseMode mode, const SearchOptions& options = {});

std::string render_assignment(const scm::CausalModel& model, const Assignment& a);

}  // namespace icl::causes
