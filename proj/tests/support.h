// Test-side helpers: fixture access, random models and theories, and
// brute-force reference implementations used as oracles.  Nothing here calls
// the evaluation code under test except to build its inputs.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icl/causes.h"
#include "icl/compile.h"
#include "icl/explain.h"
#include "icl/lang.h"
#include "icl/scm.h"

namespace icl::testing {

inline std::string fixture_path(const std::string& name) { return std::string(ICL_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Random finite models, kept in a plain form the oracle evaluates itself.

struct PlainModel {
  std::vector<int> exo_sizes;
  std::vector<int> endo_sizes;
  // Parent p < 0 is exogenous -p-1; p >= 0 is an endogenous index lower
  // than the child's, so index order is a causal order.
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<int>> tables;  // row-major, last parent fastest

  int size_of(int p) const { return p < 0 ? exo_sizes[-p - 1] : endo_sizes[p]; }

  // Values of all endogenous variables; override[i] >= 0 pins variable i.
  std::vector<int> solve(const std::vector<int>& u, const std::vector<int>& override = {}) const {
    std::vector<int> v(endo_sizes.size(), 0);
    for (std::size_t i = 0; i < endo_sizes.size(); ++i) {
      if (!override.empty() && override[i] >= 0) {
        v[i] = override[i];
        continue;
      }
      std::size_t row = 0;
      for (int p : parents[i]) row = row * size_of(p) + (p < 0 ? u[-p - 1] : v[p]);
      v[i] = tables[i][row];
    }
    return v;
  }

  std::vector<std::vector<int>> contexts() const {
    std::vector<std::vector<int>> out{{}};
    for (int s : exo_sizes) {
      std::vector<std::vector<int>> next;
      for (const auto& c : out) {
        for (int k = 0; k < s; ++k) {
          auto d = c;
          d.push_back(k);
          next.push_back(d);
        }
      }
      out = next;
    }
    return out;
  }

  scm::CausalModel to_model() const {
    std::vector<scm::Variable> exo, endo;
    std::vector<scm::Mechanism> mechs;
    auto domain = [](int n) {
      std::vector<std::string> d;
      for (int k = 0; k < n; ++k) d.push_back(std::to_string(k));
      return d;
    };
    for (std::size_t i = 0; i < exo_sizes.size(); ++i) exo.push_back({"U" + std::to_string(i), domain(exo_sizes[i])});
    for (std::size_t i = 0; i < endo_sizes.size(); ++i) {
      endo.push_back({"V" + std::to_string(i), domain(endo_sizes[i])});
      scm::Mechanism m;
      for (int p : parents[i]) {
        m.parents.push_back(p < 0 ? scm::VarRef{true, static_cast<std::uint32_t>(-p - 1)}
                                  : scm::VarRef{false, static_cast<std::uint32_t>(p)});
      }
      std::vector<scm::Value> t(tables[i].begin(), tables[i].end());
      m.table = t;
      mechs.push_back(std::move(m));
    }
    return scm::CausalModel::create(exo, endo, mechs);
  }
};

inline PlainModel random_model(std::mt19937& rng, int max_v, int max_u, bool binary) {
  PlainModel m;
  std::uniform_int_distribution<int> nv(1, max_v), nu(1, max_u), dom(2, 3), coin(0, 2);
  const int u = nu(rng), v = nv(rng);
  for (int i = 0; i < u; ++i) m.exo_sizes.push_back(binary ? 2 : dom(rng));
  for (int i = 0; i < v; ++i) {
    m.endo_sizes.push_back(binary ? 2 : dom(rng));
    std::vector<int> ps;
    for (int j = 0; j < u; ++j) {
      if (coin(rng) == 0) ps.push_back(-j - 1);
    }
    for (int j = 0; j < i; ++j) {
      if (coin(rng) != 0 && ps.size() < 3) ps.push_back(j);
    }
    std::size_t rows = 1;
    for (int p : ps) rows *= m.size_of(p);
    std::vector<int> t(rows);
    std::uniform_int_distribution<int> val(0, m.endo_sizes[i] - 1);
    for (auto& x : t) x = val(rng);
    m.parents.push_back(ps);
    m.tables.push_back(t);
  }
  return m;
}

// Events as the oracle sees them.
struct PlainEvent {
  enum class Kind { Is, Not, And, Or } kind = Kind::Is;
  int var = 0;
  int value = 0;
  std::vector<PlainEvent> children;

  bool eval(const std::vector<int>& v) const {
    switch (kind) {
      case Kind::Is:
        return v[var] == value;
      case Kind::Not:
        return !children[0].eval(v);
      case Kind::And:
        return std::all_of(children.begin(), children.end(), [&](const auto& c) { return c.eval(v); });
      case Kind::Or:
        return std::any_of(children.begin(), children.end(), [&](const auto& c) { return c.eval(v); });
    }
    return false;
  }

  scm::Expr to_expr() const {
    switch (kind) {
      case Kind::Is:
        return scm::Expr::is({false, static_cast<std::uint32_t>(var)}, static_cast<scm::Value>(value));
      case Kind::Not:
        return scm::Expr::negation(children[0].to_expr());
      case Kind::And: {
        std::vector<scm::Expr> es;
        for (const auto& c : children) es.push_back(c.to_expr());
        return scm::Expr::conjunction(es);
      }
      case Kind::Or: {
        std::vector<scm::Expr> es;
        for (const auto& c : children) es.push_back(c.to_expr());
        return scm::Expr::disjunction(es);
      }
    }
    return {};
  }
};

inline PlainEvent random_event(std::mt19937& rng, const PlainModel& m, int depth = 2) {
  std::uniform_int_distribution<int> kind(0, depth > 0 ? 3 : 0);
  std::uniform_int_distribution<int> var(0, static_cast<int>(m.endo_sizes.size()) - 1);
  PlainEvent e;
  switch (kind(rng)) {
    case 0: {
      e.kind = PlainEvent::Kind::Is;
      e.var = var(rng);
      e.value = std::uniform_int_distribution<int>(0, m.endo_sizes[e.var] - 1)(rng);
      break;
    }
    case 1:
      e.kind = PlainEvent::Kind::Not;
      e.children.push_back(random_event(rng, m, depth - 1));
      break;
    default:
      e.kind = kind(rng) % 2 ? PlainEvent::Kind::And : PlainEvent::Kind::Or;
      e.children.push_back(random_event(rng, m, depth - 1));
      e.children.push_back(random_event(rng, m, depth - 1));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Brute-force Halpern-Pearl definitions, straight from AC1-AC3.

using PlainAssignment = std::vector<std::pair<int, int>>;

inline bool plain_weak_cause(const PlainModel& m, const std::vector<int>& u, const PlainAssignment& x,
                             const PlainEvent& phi) {
  const auto actual = m.solve(u);
  for (const auto& [i, v] : x) {
    if (actual[i] != v) return false;
  }
  if (!phi.eval(actual) || x.empty()) return false;
  const int n = static_cast<int>(m.endo_sizes.size());
  std::vector<bool> in_x(n, false);
  for (const auto& [i, _] : x) in_x[i] = true;
  std::vector<int> rest;
  for (int i = 0; i < n; ++i) {
    if (!in_x[i]) rest.push_back(i);
  }
  // W ranges over all subsets of V \ X; Z = the others.
  for (std::uint32_t wmask = 0; wmask < (1u << rest.size()); ++wmask) {
    std::vector<int> w_vars, z_vars;
    for (std::size_t k = 0; k < rest.size(); ++k) ((wmask >> k) & 1 ? w_vars : z_vars).push_back(rest[k]);
    std::vector<int> w(w_vars.size(), 0);
    for (;;) {
      // every x-bar != x
      std::vector<int> xb(x.size(), 0);
      bool a = false;
      for (;;) {
        bool differs = false;
        for (std::size_t k = 0; k < x.size(); ++k) differs = differs || xb[k] != x[k].second;
        if (differs) {
          std::vector<int> ov(n, -1);
          for (std::size_t k = 0; k < x.size(); ++k) ov[x[k].first] = xb[k];
          for (std::size_t k = 0; k < w_vars.size(); ++k) ov[w_vars[k]] = w[k];
          if (!phi.eval(m.solve(u, ov))) a = true;
        }
        std::size_t k = 0;
        for (; k < x.size(); ++k) {
          if (++xb[k] < m.endo_sizes[x[k].first]) break;
          xb[k] = 0;
        }
        if (k == x.size() || a) break;
      }
      if (a) {
        bool b = true;
        for (std::uint32_t zmask = 0; zmask < (1u << z_vars.size()) && b; ++zmask) {
          std::vector<int> ov(n, -1);
          for (const auto& [i, v] : x) ov[i] = v;
          for (std::size_t k = 0; k < w_vars.size(); ++k) ov[w_vars[k]] = w[k];
          for (std::size_t k = 0; k < z_vars.size(); ++k) {
            if ((zmask >> k) & 1) ov[z_vars[k]] = actual[z_vars[k]];
          }
          b = phi.eval(m.solve(u, ov));
        }
        if (b) return true;
      }
      std::size_t k = 0;
      for (; k < w_vars.size(); ++k) {
        if (++w[k] < m.endo_sizes[w_vars[k]]) break;
        w[k] = 0;
      }
      if (k == w_vars.size()) break;
    }
  }
  return false;
}

inline bool plain_actual_cause(const PlainModel& m, const std::vector<int>& u, const PlainAssignment& x,
                               const PlainEvent& phi) {
  if (!plain_weak_cause(m, u, x, phi)) return false;
  for (std::uint32_t mask = 1; mask + 1 < (1u << x.size()); ++mask) {
    PlainAssignment sub;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if ((mask >> k) & 1) sub.push_back(x[k]);
    }
    if (plain_weak_cause(m, u, sub, phi)) return false;
  }
  return true;
}

// EX1-EX4 taken literally.
inline bool plain_explanation(const PlainModel& m, const std::vector<std::vector<int>>& cs,
                              const PlainAssignment& x, const PlainEvent& phi) {
  auto holds = [&](const std::vector<int>& u, const PlainAssignment& a) {
    const auto v = m.solve(u);
    return std::all_of(a.begin(), a.end(), [&](const auto& p) { return v[p.first] == p.second; });
  };
  bool some_x = false, some_not_x = false;
  for (const auto& u : cs) {
    if (!phi.eval(m.solve(u))) return false;                                // EX1
    if (holds(u, x) && !plain_weak_cause(m, u, x, phi)) return false;       // EX2
    (holds(u, x) ? some_x : some_not_x) = true;
  }
  if (!some_x || !some_not_x) return false;                                 // EX4
  for (std::uint32_t mask = 1; mask + 1 < (1u << x.size()); ++mask) {       // EX3
    PlainAssignment sub;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if ((mask >> k) & 1) sub.push_back(x[k]);
    }
    const bool ok = std::any_of(cs.begin(), cs.end(),
                                [&](const auto& u) { return holds(u, sub) && !plain_weak_cause(m, u, sub, phi); });
    if (!ok) return false;
  }
  return true;
}

inline causes::Assignment to_assignment(const PlainAssignment& a) {
  causes::Assignment out;
  for (const auto& [i, v] : a) out.emplace_back(static_cast<scm::VarId>(i), static_cast<scm::Value>(v));
  return out;
}

inline scm::Context to_context(const std::vector<int>& u) { return scm::Context(u.begin(), u.end()); }

// ---------------------------------------------------------------------------
// Random acyclic theories, with a ground-by-hand reference semantics.

struct PlainLiteral {
  int pred = 0;
  int arg = -1;     // -1: the clause variable X; otherwise a constant index
  int offset = 0;   // time T + offset
  bool positive = true;
};

struct PlainClause {
  int head = 0;
  int head_arg = -1;
  int head_offset = 1;
  std::vector<PlainLiteral> body;
};

// Predicates p0..p(n-1) over sort s = {a, b}; choice atoms c(k, a|b, 0)
// modelled as predicate "c<k>" alternatives {c<k>(a,0)... }.
struct PlainTheory {
  int preds = 0;
  int horizon = 0;
  std::vector<PlainClause> clauses;
  std::vector<std::pair<int, int>> facts;  // (pred, const) at time 0
  // Each alternative has two atoms ch<k>(a, t_k) vs ch<k>(b, t_k).
  std::vector<int> choice_times;
  std::vector<std::pair<std::string, std::string>> probs;  // per alternative

  static std::string constant(int k) { return k == 0 ? "a" : "b"; }

  std::string source() const {
    std::ostringstream os;
    os << "sort s = {a, b}.\n";
    for (int p = 0; p < preds; ++p) os << "pred p" << p << "(s).\n";
    for (std::size_t k = 0; k < choice_times.size(); ++k) os << "pred ch" << k << "(s).\n";
    for (std::size_t k = 0; k < choice_times.size(); ++k) {
      os << "choice { ch" << k << "(a, " << choice_times[k] << ")";
      if (!probs.empty()) os << " : " << probs[k].first;
      os << ", ch" << k << "(b, " << choice_times[k] << ")";
      if (!probs.empty()) os << " : " << probs[k].second;
      os << " }.\n";
    }
    auto arg = [](int a) { return a < 0 ? std::string("X") : constant(a); };
    auto time = [](int off) { return off == 0 ? std::string("T") : "T+" + std::to_string(off); };
    for (const auto& c : clauses) {
      os << "p" << c.head << "(" << arg(c.head_arg) << ", " << time(c.head_offset) << ")";
      if (!c.body.empty()) {
        os << " <= ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
          const auto& l = c.body[i];
          if (i) os << " & ";
          if (!l.positive) os << "~";
          if (l.pred >= preds) {
            os << "ch" << (l.pred - preds) << "(" << arg(l.arg) << ", " << time(l.offset) << ")";
          } else {
            os << "p" << l.pred << "(" << arg(l.arg) << ", " << time(l.offset) << ")";
          }
        }
      }
      os << ".\n";
    }
    for (const auto& [p, k] : facts) os << "p" << p << "(" << constant(k) << ", 0).\n";
    os << "horizon " << horizon << ".\n";
    return os.str();
  }

  // Atom key "p<i>(<c>, <t>)" or "ch<k>(<c>, <t>)" matching the rendering of
  // ground atoms.
  static std::string key(const std::string& pred, int c, int t) {
    return pred + "(" + constant(c) + ", " + std::to_string(t) + ")";
  }

  // Reference world for a total choice (choice[k] = 0 for a, 1 for b):
  // ground every clause by hand and iterate the immediate-consequence
  // operator to its fixpoint, which is unique for acyclic programs.
  std::set<std::string> world(const std::vector<int>& choice) const {
    std::set<std::string> truth;
    for (std::size_t k = 0; k < choice_times.size(); ++k) {
      truth.insert(key("ch" + std::to_string(k), choice[k], choice_times[k]));
    }
    for (;;) {
      std::set<std::string> next;
      for (std::size_t k = 0; k < choice_times.size(); ++k) {
        next.insert(key("ch" + std::to_string(k), choice[k], choice_times[k]));
      }
      for (const auto& [p, k] : facts) next.insert(key("p" + std::to_string(p), k, 0));
      for (const auto& c : clauses) {
        for (int x = 0; x < 2; ++x) {
          for (int t = 0; t <= horizon; ++t) {
            const int ht = t + c.head_offset;
            if (ht > horizon) continue;
            bool ok = true;
            for (const auto& l : c.body) {
              const int lt = t + l.offset;
              if (lt > horizon) {
                ok = false;  // no such ground atom
                break;
              }
              const std::string name = l.pred >= preds ? "ch" + std::to_string(l.pred - preds)
                                                       : "p" + std::to_string(l.pred);
              const bool in = truth.count(key(name, l.arg < 0 ? x : l.arg, lt)) > 0;
              if (in != l.positive) {
                ok = false;
                break;
              }
            }
            if (ok) next.insert(key("p" + std::to_string(c.head), c.head_arg < 0 ? x : c.head_arg, ht));
          }
        }
      }
      if (next == truth) return truth;
      truth = std::move(next);
    }
  }
};

// Acyclic by construction: a body literal either looks strictly back in
// time or, at the same time, at a lower-numbered predicate.
inline PlainTheory random_theory(std::mt19937& rng, bool probabilistic) {
  PlainTheory t;
  std::uniform_int_distribution<int> np(1, 3), nh(0, 2), nc(0, 2), coin(0, 1), nb(0, 3);
  t.preds = np(rng);
  t.horizon = nh(rng);
  // |HB| = 2 * (preds + choice preds) * (H + 1) <= 20 with these ranges is
  // enforced by trimming below.
  int choices = nc(rng);
  while (2 * (t.preds + choices) * (t.horizon + 1) > 20) {
    if (choices > 0) {
      --choices;
    } else if (t.horizon > 0) {
      --t.horizon;
    } else {
      --t.preds;
    }
  }
  for (int k = 0; k < choices; ++k) {
    t.choice_times.push_back(std::uniform_int_distribution<int>(0, t.horizon)(rng));
    if (probabilistic) {
      const int num = std::uniform_int_distribution<int>(0, 10)(rng);
      t.probs.emplace_back(std::to_string(num) + "/10", std::to_string(10 - num) + "/10");
    }
  }
  const int clauses = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int i = 0; i < clauses; ++i) {
    PlainClause c;
    c.head = std::uniform_int_distribution<int>(0, t.preds - 1)(rng);
    c.head_arg = coin(rng) ? -1 : std::uniform_int_distribution<int>(0, 1)(rng);
    c.head_offset = t.horizon > 0 ? coin(rng) : 0;
    const int body = nb(rng);
    for (int j = 0; j < body; ++j) {
      PlainLiteral l;
      l.positive = coin(rng);
      l.arg = coin(rng) ? -1 : std::uniform_int_distribution<int>(0, 1)(rng);
      const bool use_choice = choices > 0 && coin(rng);
      if (use_choice) {
        l.pred = t.preds + std::uniform_int_distribution<int>(0, choices - 1)(rng);
        l.offset = std::uniform_int_distribution<int>(0, c.head_offset)(rng);
      } else if (c.head_offset > 0 && coin(rng)) {
        l.pred = std::uniform_int_distribution<int>(0, t.preds - 1)(rng);
        l.offset = 0;  // strictly earlier than the head
      } else if (c.head > 0) {
        l.pred = std::uniform_int_distribution<int>(0, c.head - 1)(rng);
        l.offset = c.head_offset;
      } else {
        continue;
      }
      c.body.push_back(l);
    }
    // A head variable must occur in the body; otherwise ground the head.
    if (c.head_arg < 0 && std::none_of(c.body.begin(), c.body.end(), [](const auto& l) { return l.arg < 0; })) {
      c.head_arg = 0;
    }
    t.clauses.push_back(c);
  }
  const int facts = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int i = 0; i < facts; ++i) {
    t.facts.emplace_back(std::uniform_int_distribution<int>(0, t.preds - 1)(rng), coin(rng));
  }
  return t;
}

}  // namespace icl::testing
