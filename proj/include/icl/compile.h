// ICL/PICL theory -> (probabilistic) causal model, action execution sets,
// and binary causal model -> PICL theory.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icl/ground.h"
#include "icl/lang.h"
#include "icl/scm.h"

namespace icl::compile {

class CompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A query mentions something that is not an endogenous variable of the
// model it is asked against (exogenous choice atom, atom fixed by E, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompileOptions {
  ground::GroundOptions ground;
  std::size_t table_cap = 4096;  // materialise tables up to this many rows
};

struct CompiledTheory {
  lang::IclTheory theory;  // the theory actually compiled
  ground::GroundProgram program;
  scm::CausalModel model;  // M_T, or (M_T)_E after apply_execution
  std::optional<scm::Distribution> distribution;
  std::vector<int> variable_of_atom;  // AtomId -> VarId, -1 for atomic choices
  std::vector<lang::Atom> executions;  // E applied so far
  lang::ExecMode exec_mode = lang::ExecMode::Fixed;

  std::optional<scm::VarId> variable(ground::AtomId id) const;
  // Throws CompileError for plain ICL theories.
  scm::ProbCausalModel prob() const;
};

// U_T = alternatives ("U0", "U1", ... with the atomic choices as domain),
// V_T = HB minus the choice atoms (named by their canonical text, domain
// {"0","1"}), F_p true iff some ground clause body for p holds.  The
// theory's own `exec` lines are not applied here.
CompiledTheory compile_picl(const lang::IclTheory& theory, const CompileOptions& options = {});

scm::Context context_of_choice(const CompiledTheory& ct, const ground::TotalChoice& choice);
scm::Context context_of_choice(const CompiledTheory& ct, const std::vector<lang::Atom>& choice);

// Fixed: submodel with every atom of E set to 1.  Overridable: recompiles
// the theory with the facts e <= true added.
CompiledTheory apply_execution(const CompiledTheory& ct, const std::vector<lang::Atom>& executions,
                               lang::ExecMode mode, const CompileOptions& options = {});

// Convenience: compile and apply the given executions (or the theory's own
// when `executions` is empty-optional).
CompiledTheory compile_with_execution(const lang::IclTheory& theory,
                                      const std::optional<std::vector<lang::Atom>>& executions,
                                      lang::ExecMode mode, const CompileOptions& options = {});

// rho: every ground atom p becomes the primitive event p = 1.  Throws
// DomainError for atoms that are not variables of ct.model's V.
scm::Expr to_event(const CompiledTheory& ct, const ground::GroundFormula& f);
std::vector<std::pair<scm::VarId, scm::Value>> to_assignment(const CompiledTheory& ct,
                                                             const std::vector<ground::AtomId>& atoms);

// The PICL theory of a binary (probabilistic) causal model.  Choice atoms
// are u('Ui', 'v', 0); endogenous X = 1 becomes the 0-ary fluent 'X'(0).
// Throws CompileError for non-binary endogenous variables, mechanisms with
// no usable table, or a joint distribution that is not a product.
lang::IclTheory reverse_compile(const scm::CausalModel& model,
                                const std::optional<scm::Distribution>& distribution = std::nullopt);

inline constexpr std::string_view kChoicePredicate = "u";

}  // namespace icl::compile
