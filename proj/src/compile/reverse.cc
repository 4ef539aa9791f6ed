#include <algorithm>
#include <map>
#include <set>

#include "icl/compile.h"

namespace icl::compile {

using lang::Atom;
using lang::Formula;
using lang::Term;
using scm::VarRef;

namespace {

// A product term over the parents of one variable: per parent a value or
// -1 for "any".
using Implicant = std::vector<int>;

bool covers(const Implicant& imp, const std::vector<int>& point) {
  for (std::size_t k = 0; k < imp.size(); ++k) {
    if (imp[k] >= 0 && imp[k] != point[k]) return false;
  }
  return true;
}

std::vector<int> decode(std::size_t row, const std::vector<std::size_t>& sizes) {
  std::vector<int> point(sizes.size());
  for (std::size_t k = sizes.size(); k-- > 0;) {
    point[k] = static_cast<int>(row % sizes[k]);
    row /= sizes[k];
  }
  return point;
}

// True-point DNF, merged and pruned.  Merging replaces a group of
// implicants that agree except at one parent, and together cover that
// parent's whole domain, by the implicant with that parent free.
std::vector<Implicant> simplify(const std::vector<std::vector<int>>& true_points,
                                const std::vector<bool>& is_true, const std::vector<std::size_t>& sizes) {
  std::set<Implicant> current(true_points.begin(), true_points.end());
  std::set<Implicant> primes;
  while (!current.empty()) {
    std::set<Implicant> merged_into, next;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      std::map<Implicant, std::set<int>> groups;
      for (const auto& imp : current) {
        if (imp[k] < 0) continue;
        Implicant key = imp;
        key[k] = -1;
        groups[key].insert(imp[k]);
      }
      for (const auto& [key, vals] : groups) {
        if (vals.size() != sizes[k]) continue;
        next.insert(key);
        for (int v : vals) {
          Implicant imp = key;
          imp[k] = v;
          merged_into.insert(imp);
        }
      }
    }
    for (const auto& imp : current) {
      if (!merged_into.count(imp)) primes.insert(imp);
    }
    current = std::move(next);
  }

  auto implied = [&](const Implicant& imp) {
    for (std::size_t row = 0; row < is_true.size(); ++row) {
      if (!is_true[row] && covers(imp, decode(row, sizes))) return false;
    }
    return true;
  };
  // Literal dropping: a literal goes when the wider term stays inside the
  // true points.
  std::set<Implicant> widened;
  for (Implicant imp : primes) {
    for (std::size_t k = 0; k < imp.size(); ++k) {
      if (imp[k] < 0) continue;
      Implicant wider = imp;
      wider[k] = -1;
      if (implied(wider)) imp = wider;
    }
    widened.insert(imp);
  }
  std::vector<Implicant> cover(widened.begin(), widened.end());
  // Largest terms first, then drop any term whose points are already
  // covered by the rest.
  std::stable_sort(cover.begin(), cover.end(), [](const Implicant& a, const Implicant& b) {
    auto free = [](const Implicant& i) { return std::count(i.begin(), i.end(), -1); };
    return free(a) > free(b);
  });
  for (std::size_t i = cover.size(); i-- > 0;) {
    bool redundant = true;
    for (const auto& p : true_points) {
      if (!covers(cover[i], p)) continue;
      bool other = false;
      for (std::size_t j = 0; j < cover.size() && !other; ++j) {
        other = j != i && covers(cover[j], p);
      }
      if (!other) {
        redundant = false;
        break;
      }
    }
    if (redundant) cover.erase(cover.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return cover;
}

Formula disjoin(std::vector<Formula> parts) {
  if (parts.empty()) return Formula::truth(false);
  Formula f = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) f = Formula::disjunction(std::move(f), std::move(parts[i]));
  return f;
}

}  // namespace

lang::IclTheory reverse_compile(const scm::CausalModel& model,
                                const std::optional<scm::Distribution>& distribution) {
  const auto& us = model.exogenous();
  const std::vector<scm::VarId> vs = model.endogenous_ids();
  for (scm::VarId id : vs) {
    const auto& x = model.variable(id);
    if (x.domain.size() != 2) throw CompileError("endogenous variable '" + x.name + "' is not binary");
    if (x.name == kChoicePredicate || x.name == lang::kDoPredicate) {
      throw CompileError("endogenous variable name '" + x.name + "' is reserved");
    }
  }

  lang::IclTheory t;
  t.horizon = 0;
  auto& voc = t.vocabulary;
  if (!us.empty()) {
    lang::SortDecl uvar{"uvar", {}}, uval{"uval", {}};
    for (const auto& u : us) {
      uvar.members.push_back(u.name);
      for (const auto& v : u.domain) {
        if (std::find(uval.members.begin(), uval.members.end(), v) == uval.members.end()) {
          uval.members.push_back(v);
        }
      }
    }
    voc.sorts = {uvar, uval};
    voc.predicates.push_back({std::string(kChoicePredicate), {"uvar", "uval"}});
  }
  for (scm::VarId id : vs) voc.predicates.push_back({model.variable(id).name, {}});

  auto choice_atom = [&](std::size_t i, std::size_t v) {
    return Atom{std::string(kChoicePredicate),
                {Term::constant(us[i].name), Term::constant(us[i].domain[v])},
                lang::TimeTerm::at(0)};
  };
  auto fluent = [&](scm::VarId id) { return Atom{model.variable(id).name, {}, lang::TimeTerm::at(0)}; };

  std::optional<std::vector<std::vector<Rational>>> marginals;
  if (distribution) {
    scm::check_distribution(model, *distribution);
    if (distribution->kind == scm::Distribution::Kind::Product) {
      marginals = distribution->marginals;
    } else {
      std::vector<std::vector<Rational>> m(us.size());
      for (std::size_t i = 0; i < us.size(); ++i) m[i].assign(us[i].domain.size(), 0);
      for (const auto& [u, p] : distribution->joint) {
        for (std::size_t i = 0; i < us.size(); ++i) m[i][u[i]] += p;
      }
      scm::Distribution product;
      product.marginals = m;
      for (const auto& u : model.all_contexts()) {
        if (product.probability(u) != distribution->probability(u)) {
          throw CompileError("joint distribution does not factorise over the exogenous variables");
        }
      }
      marginals = std::move(m);
    }
  }
  for (std::size_t i = 0; i < us.size(); ++i) {
    lang::Alternative alt;
    for (std::size_t v = 0; v < us[i].domain.size(); ++v) {
      lang::AtomicChoice c{choice_atom(i, v), std::nullopt};
      if (marginals) c.probability = to_fraction_string((*marginals)[i][v]);
      alt.choices.push_back(std::move(c));
    }
    t.choice_space.push_back(std::move(alt));
  }

  for (scm::VarId id : vs) {
    const scm::Mechanism m = model.specialized_mechanism(id);
    std::vector<std::size_t> sizes;
    for (const auto& p : m.parents) sizes.push_back(model.domain_size(p));
    std::vector<scm::Value> table;
    if (m.table) {
      table = *m.table;
    } else {
      auto rows = scm::table_size(sizes, std::size_t{1} << 16);
      if (!rows) throw CompileError("mechanism of '" + model.variable(id).name + "' has no table");
      scm::Context u(us.size(), 0);
      std::vector<scm::Value> v(model.variables().size(), 0);
      for (std::size_t row = 0; row < *rows; ++row) {
        auto point = decode(row, sizes);
        for (std::size_t k = 0; k < point.size(); ++k) {
          (m.parents[k].exogenous ? u[m.parents[k].index] : v[m.parents[k].index]) =
              static_cast<scm::Value>(point[k]);
        }
        bool any = false;
        for (const auto& r : *m.rules) any = any || scm::eval_expr(r, u, v);
        table.push_back(any ? 1 : 0);
      }
    }
    std::vector<bool> is_true(table.size());
    std::vector<std::vector<int>> points;
    for (std::size_t row = 0; row < table.size(); ++row) {
      is_true[row] = table[row] == 1;
      if (is_true[row]) points.push_back(decode(row, sizes));
    }
    if (points.empty()) continue;
    const auto cover = simplify(points, is_true, sizes);
    for (std::size_t row = 0; row < table.size(); ++row) {
      const auto p = decode(row, sizes);
      const bool hit = std::any_of(cover.begin(), cover.end(), [&](const Implicant& c) { return covers(c, p); });
      if (hit != is_true[row]) throw CompileError("internal: simplified cover differs from the table");
    }
    std::vector<Formula> disjuncts;
    for (const auto& imp : cover) {
      std::vector<Formula> lits;
      for (std::size_t k = 0; k < imp.size(); ++k) {
        if (imp[k] < 0) continue;
        const VarRef p = m.parents[k];
        if (p.exogenous) {
          lits.push_back(Formula::of(choice_atom(p.index, static_cast<std::size_t>(imp[k]))));
        } else if (imp[k] == 1) {
          lits.push_back(Formula::of(fluent(p.index)));
        } else {
          lits.push_back(Formula::negation(Formula::of(fluent(p.index))));
        }
      }
      disjuncts.push_back(Formula::conjunction(std::move(lits)));
    }
    t.program.push_back({fluent(id), disjoin(std::move(disjuncts))});
  }
  lang::validate_theory(t);
  return t;
}

}  // namespace icl::compile
