#include <algorithm>

#include "icl/compile.h"

namespace icl::compile {

using ground::AtomId;
using ground::GroundFormula;
using scm::Expr;
using scm::VarId;
using scm::VarRef;

std::optional<VarId> CompiledTheory::variable(AtomId id) const {
  if (id >= variable_of_atom.size() || variable_of_atom[id] < 0) return std::nullopt;
  return static_cast<VarId>(variable_of_atom[id]);
}

scm::ProbCausalModel CompiledTheory::prob() const {
  if (!distribution) throw CompileError("theory has no probabilities");
  return {model, *distribution};
}

namespace {

struct Translator {
  const ground::GroundProgram& program;
  const std::vector<int>& var_of;

  VarRef ref(AtomId a) const {
    if (auto pos = program.choice_position(a)) {
      return VarRef{true, static_cast<std::uint32_t>(pos->first)};
    }
    return VarRef{false, static_cast<std::uint32_t>(var_of[a])};
  }

  Expr expr(const GroundFormula& f) const {
    switch (f.kind) {
      case GroundFormula::Kind::False:
        return Expr::truth(false);
      case GroundFormula::Kind::True:
        return Expr::truth(true);
      case GroundFormula::Kind::Atom:
        if (auto pos = program.choice_position(f.atom)) {
          return Expr::is(ref(f.atom), static_cast<scm::Value>(pos->second));
        }
        return Expr::is(ref(f.atom), 1);
      case GroundFormula::Kind::Not:
        return Expr::negation(expr(f.children[0]));
      case GroundFormula::Kind::And: {
        std::vector<Expr> cs;
        for (const auto& c : f.children) cs.push_back(expr(c));
        return Expr::conjunction(std::move(cs));
      }
    }
    return Expr::truth(false);
  }
};

bool eval_rules(const std::vector<Expr>& rules, const scm::Context& u, const std::vector<scm::Value>& v) {
  return std::any_of(rules.begin(), rules.end(), [&](const Expr& r) { return scm::eval_expr(r, u, v); });
}

}  // namespace

CompiledTheory compile_picl(const lang::IclTheory& theory, const CompileOptions& options) {
  CompiledTheory ct;
  ct.theory = theory;
  try {
    ct.program = ground::ground_theory(theory, options.ground);
  } catch (const ground::GroundingError& e) {
    throw CompileError(e.what());
  }
  const auto& program = ct.program;
  const auto acyc = ground::check_acyclic(program);
  if (!acyc.acyclic) {
    std::string msg = "ground program is cyclic:";
    for (std::size_t i = 0; i < acyc.cycle.size(); ++i) {
      msg += (i ? " -> " : " ") + program.atom(acyc.cycle[i]).text;
    }
    throw CompileError(msg);
  }

  std::vector<scm::Variable> exo;
  for (std::size_t i = 0; i < program.choice_space().size(); ++i) {
    scm::Variable u{"U" + std::to_string(i), {}};
    for (AtomId a : program.choice_space()[i]) u.domain.push_back(program.atom(a).text);
    exo.push_back(std::move(u));
  }
  std::vector<scm::Variable> endo;
  ct.variable_of_atom.assign(program.size(), -1);
  for (AtomId a = 0; a < program.size(); ++a) {
    if (program.choice_position(a)) continue;
    ct.variable_of_atom[a] = static_cast<int>(endo.size());
    endo.push_back({program.atom(a).text, {"0", "1"}});
  }

  Translator tr{program, ct.variable_of_atom};
  std::vector<scm::Mechanism> mechanisms(endo.size());
  for (AtomId a = 0; a < program.size(); ++a) {
    if (ct.variable_of_atom[a] < 0) continue;
    auto& m = mechanisms[ct.variable_of_atom[a]];
    std::vector<Expr> rules;
    for (std::size_t ci : program.clauses_with_head(a)) {
      const auto& c = program.clauses()[ci];
      for (AtomId b : c.body_atoms) {
        const VarRef r = tr.ref(b);
        if (std::find(m.parents.begin(), m.parents.end(), r) == m.parents.end()) m.parents.push_back(r);
      }
      rules.push_back(tr.expr(c.body));
    }
    m.rules = std::move(rules);
  }

  // Tables, evaluated from the rules row by row.
  for (std::size_t i = 0; i < mechanisms.size(); ++i) {
    auto& m = mechanisms[i];
    std::vector<std::size_t> sizes;
    for (const auto& p : m.parents) sizes.push_back(p.exogenous ? exo[p.index].domain.size() : 2);
    auto rows = scm::table_size(sizes, options.table_cap);
    if (!rows) continue;
    std::vector<scm::Value> table(*rows);
    scm::Context u(exo.size(), 0);
    std::vector<scm::Value> v(endo.size(), 0);
    for (std::size_t row = 0; row < *rows; ++row) {
      std::size_t rest = row;
      for (std::size_t k = m.parents.size(); k-- > 0;) {
        const auto val = static_cast<scm::Value>(rest % sizes[k]);
        rest /= sizes[k];
        (m.parents[k].exogenous ? u[m.parents[k].index] : v[m.parents[k].index]) = val;
      }
      table[row] = eval_rules(*m.rules, u, v) ? 1 : 0;
    }
    m.table = std::move(table);
  }

  ct.model = scm::CausalModel::create(std::move(exo), std::move(endo), std::move(mechanisms));
  if (!ct.model.recursive()) throw CompileError("compiled model is not recursive");

  if (theory.probabilistic() || program.choice_space().empty()) {
    scm::Distribution d;
    d.marginals = program.probabilities();
    ct.distribution = std::move(d);
  }
  return ct;
}

scm::Context context_of_choice(const CompiledTheory& ct, const ground::TotalChoice& choice) {
  const auto& cs = ct.program.choice_space();
  if (choice.atoms.size() != cs.size()) throw CompileError("not a total choice");
  scm::Context u(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto pos = ct.program.choice_position(choice.atoms[i]);
    if (!pos || pos->first != i) throw CompileError("not a total choice");
    u[i] = static_cast<scm::Value>(pos->second);
  }
  return u;
}

scm::Context context_of_choice(const CompiledTheory& ct, const std::vector<lang::Atom>& choice) {
  try {
    return context_of_choice(ct, ground::make_total_choice(ct.program, choice));
  } catch (const ground::GroundingError& e) {
    throw CompileError(e.what());
  }
}

namespace {

std::vector<AtomId> execution_atoms(const ground::GroundProgram& program,
                                    const std::vector<lang::Atom>& executions) {
  std::vector<AtomId> out;
  for (const auto& e : executions) {
    const std::string text = lang::render_atom(e);
    if (!e.is_action() || !e.is_ground()) throw CompileError("'" + text + "' is not a ground do-atom");
    if (e.time.offset > program.horizon()) {
      throw CompileError("'" + text + "' lies beyond horizon " + std::to_string(program.horizon()));
    }
    auto id = program.find(e);
    if (!id) throw CompileError("unknown do-atom '" + text + "'");
    if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
  }
  return out;
}

}  // namespace

CompiledTheory apply_execution(const CompiledTheory& ct, const std::vector<lang::Atom>& executions,
                               lang::ExecMode mode, const CompileOptions& options) {
  const auto atoms = execution_atoms(ct.program, executions);
  if (mode == lang::ExecMode::Fixed) {
    CompiledTheory out = ct;
    std::vector<std::pair<VarId, scm::Value>> assignment;
    for (AtomId a : atoms) {
      auto v = ct.variable(a);
      if (!v || !ct.model.in_v(*v)) {
        throw CompileError("'" + ct.program.atom(a).text + "' is not an endogenous variable");
      }
      assignment.emplace_back(*v, 1);
    }
    out.model = ct.model.submodel(assignment);
    out.executions.insert(out.executions.end(), executions.begin(), executions.end());
    out.exec_mode = mode;
    return out;
  }
  if (!ct.executions.empty() && ct.exec_mode == lang::ExecMode::Fixed) {
    throw CompileError("cannot add overridable executions to a model with fixed executions");
  }
  lang::IclTheory t = ct.theory;
  for (AtomId a : atoms) {
    if (ct.program.choice_position(a)) {
      throw CompileError("'" + ct.program.atom(a).text + "' is an atomic choice");
    }
    t.program.push_back({ct.program.atom(a).to_atom(), lang::Formula::truth(true)});
  }
  CompiledTheory out = compile_picl(t, options);
  out.executions = ct.executions;
  out.executions.insert(out.executions.end(), executions.begin(), executions.end());
  out.exec_mode = mode;
  return out;
}

CompiledTheory compile_with_execution(const lang::IclTheory& theory,
                                      const std::optional<std::vector<lang::Atom>>& executions,
                                      lang::ExecMode mode, const CompileOptions& options) {
  lang::IclTheory base = theory;
  base.executions.clear();
  CompiledTheory ct = compile_picl(base, options);
  const auto& e = executions ? *executions : theory.executions;
  if (e.empty()) {
    ct.exec_mode = mode;
    return ct;
  }
  return apply_execution(ct, e, mode, options);
}

Expr to_event(const CompiledTheory& ct, const GroundFormula& f) {
  switch (f.kind) {
    case GroundFormula::Kind::False:
      return Expr::truth(false);
    case GroundFormula::Kind::True:
      return Expr::truth(true);
    case GroundFormula::Kind::Atom: {
      auto v = to_assignment(ct, {f.atom});
      return Expr::is(VarRef{false, v[0].first}, 1);
    }
    case GroundFormula::Kind::Not:
      return Expr::negation(to_event(ct, f.children[0]));
    case GroundFormula::Kind::And: {
      std::vector<Expr> cs;
      for (const auto& c : f.children) cs.push_back(to_event(ct, c));
      return Expr::conjunction(std::move(cs));
    }
  }
  return Expr::truth(false);
}

std::vector<std::pair<VarId, scm::Value>> to_assignment(const CompiledTheory& ct,
                                                        const std::vector<AtomId>& atoms) {
  std::vector<std::pair<VarId, scm::Value>> out;
  for (AtomId a : atoms) {
    const std::string& text = ct.program.atom(a).text;
    auto v = ct.variable(a);
    if (!v) throw DomainError("'" + text + "' is an atomic choice, not an endogenous variable");
    if (!ct.model.in_v(*v)) throw DomainError("'" + text + "' is fixed by the execution set");
    if (std::none_of(out.begin(), out.end(), [&](const auto& p) { return p.first == *v; })) {
      out.emplace_back(*v, 1);
    }
  }
  return out;
}

}  // namespace icl::compile
