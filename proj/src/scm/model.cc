#include <algorithm>
#include <set>
#include <sstream>

#include "icl/scm.h"

namespace icl::scm {

Expr Expr::truth(bool v) {
  Expr e;
  e.kind = v ? Kind::True : Kind::False;
  return e;
}

Expr Expr::is(VarRef var, Value value) {
  Expr e;
  e.kind = Kind::Is;
  e.var = var;
  e.value = value;
  return e;
}

Expr Expr::negation(Expr e) {
  if (e.kind == Kind::True) return truth(false);
  if (e.kind == Kind::False) return truth(true);
  Expr n;
  n.kind = Kind::Not;
  n.children.push_back(std::move(e));
  return n;
}

Expr Expr::conjunction(std::vector<Expr> es) {
  std::vector<Expr> kept;
  for (auto& e : es) {
    if (e.kind == Kind::False) return truth(false);
    if (e.kind == Kind::True) continue;
    if (e.kind == Kind::And) {
      for (auto& c : e.children) kept.push_back(std::move(c));
    } else {
      kept.push_back(std::move(e));
    }
  }
  if (kept.empty()) return truth(true);
  if (kept.size() == 1) return std::move(kept.front());
  Expr a;
  a.kind = Kind::And;
  a.children = std::move(kept);
  return a;
}

Expr Expr::disjunction(std::vector<Expr> es) {
  for (auto& e : es) e = negation(std::move(e));
  return negation(conjunction(std::move(es)));
}

std::optional<std::size_t> table_size(const std::vector<std::size_t>& domain_sizes,
                                      std::size_t cap) {
  std::size_t n = 1;
  for (std::size_t d : domain_sizes) {
    if (d == 0) return 0;
    if (n > cap / d) return std::nullopt;
    n *= d;
  }
  if (n > cap) return std::nullopt;
  return n;
}

namespace {

bool eval(const Expr& e, const Context& u, const std::vector<Value>& values) {
  switch (e.kind) {
    case Expr::Kind::False:
      return false;
    case Expr::Kind::True:
      return true;
    case Expr::Kind::Is:
      return (e.var.exogenous ? u[e.var.index] : values[e.var.index]) == e.value;
    case Expr::Kind::Not:
      return !eval(e.children[0], u, values);
    case Expr::Kind::And:
      for (const auto& c : e.children) {
        if (!eval(c, u, values)) return false;
      }
      return true;
  }
  return false;
}

void collect_refs(const Expr& e, std::vector<VarRef>& out) {
  if (e.kind == Expr::Kind::Is) {
    if (std::find(out.begin(), out.end(), e.var) == out.end()) out.push_back(e.var);
  }
  for (const auto& c : e.children) collect_refs(c, out);
}

Recursion compute_recursion(std::size_t n, const std::vector<Mechanism>& mechanisms) {
  Recursion r;
  std::vector<char> state(n, 0);
  std::vector<VarId> path;
  struct Frame {
    VarId id;
    std::size_t next;
  };
  // Post-order DFS over parents yields parents-before-children.
  for (VarId root = 0; root < n; ++root) {
    if (state[root]) continue;
    std::vector<Frame> stack{{root, 0}};
    state[root] = 1;
    path.assign(1, root);
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& ps = mechanisms[f.id].parents;
      if (f.next < ps.size()) {
        const VarRef p = ps[f.next++];
        if (p.exogenous) continue;
        if (state[p.index] == 1) {
          auto it = std::find(path.begin(), path.end(), p.index);
          // Along `path` each entry is a parent of the one before it.
          std::vector<VarId> down(it, path.end());
          r.recursive = false;
          r.order.clear();
          r.cycle.assign(down.rbegin(), down.rend());
          r.cycle.push_back(r.cycle.front());
          return r;
        }
        if (state[p.index] == 0) {
          state[p.index] = 1;
          stack.push_back({p.index, 0});
          path.push_back(p.index);
        }
        continue;
      }
      state[f.id] = 2;
      r.order.push_back(f.id);
      stack.pop_back();
      path.pop_back();
    }
  }
  return r;
}

}  // namespace

CausalModel::CausalModel() : base_(std::make_shared<Base>()) {}

CausalModel CausalModel::create(std::vector<Variable> exogenous, std::vector<Variable> endogenous,
                                std::vector<Mechanism> mechanisms) {
  if (mechanisms.size() != endogenous.size()) {
    throw ModelError("one mechanism per endogenous variable is required");
  }
  auto base = std::make_shared<Base>();
  auto add_name = [&](const Variable& v, VarRef ref) {
    if (v.name.empty()) throw ModelError("variable with empty name");
    if (v.domain.empty()) throw ModelError("variable '" + v.name + "' has an empty domain");
    if (v.domain.size() > 65535) throw ModelError("domain of '" + v.name + "' is too large");
    std::set<std::string> seen(v.domain.begin(), v.domain.end());
    if (seen.size() != v.domain.size()) {
      throw ModelError("domain of '" + v.name + "' has duplicate values");
    }
    if (!base->index.emplace(v.name, ref).second) {
      throw ModelError("duplicate variable name '" + v.name + "'");
    }
  };
  for (std::uint32_t i = 0; i < exogenous.size(); ++i) add_name(exogenous[i], {true, i});
  for (std::uint32_t i = 0; i < endogenous.size(); ++i) add_name(endogenous[i], {false, i});

  auto dsize = [&](VarRef r) {
    return r.exogenous ? exogenous.at(r.index).domain.size() : endogenous.at(r.index).domain.size();
  };
  for (std::size_t i = 0; i < mechanisms.size(); ++i) {
    const auto& m = mechanisms[i];
    const std::string& name = endogenous[i].name;
    std::vector<std::size_t> sizes;
    for (std::size_t k = 0; k < m.parents.size(); ++k) {
      const VarRef p = m.parents[k];
      if ((p.exogenous && p.index >= exogenous.size()) ||
          (!p.exogenous && p.index >= endogenous.size())) {
        throw ModelError("mechanism of '" + name + "' has an unknown parent");
      }
      if (!p.exogenous && p.index == i) throw ModelError("'" + name + "' is its own parent");
      for (std::size_t j = 0; j < k; ++j) {
        if (m.parents[j] == p) throw ModelError("mechanism of '" + name + "' repeats a parent");
      }
      sizes.push_back(dsize(p));
    }
    if (!m.table && !m.rules) throw ModelError("mechanism of '" + name + "' is empty");
    if (m.table) {
      auto rows = table_size(sizes, std::size_t{1} << 26);
      if (!rows || *rows != m.table->size()) {
        throw ModelError("table of '" + name + "' has the wrong number of rows");
      }
      for (Value v : *m.table) {
        if (v >= endogenous[i].domain.size()) {
          throw ModelError("table of '" + name + "' has an out-of-domain value");
        }
      }
    }
    if (m.rules) {
      if (endogenous[i].domain.size() != 2) {
        throw ModelError("rules require a binary domain ('" + name + "')");
      }
      std::vector<VarRef> refs;
      for (const auto& r : *m.rules) collect_refs(r, refs);
      for (const auto& ref : refs) {
        if (std::find(m.parents.begin(), m.parents.end(), ref) == m.parents.end()) {
          throw ModelError("rule of '" + name + "' mentions a non-parent");
        }
      }
    }
  }
  base->recursion = compute_recursion(endogenous.size(), mechanisms);
  base->children.assign(endogenous.size(), {});
  for (VarId i = 0; i < mechanisms.size(); ++i) {
    for (const auto& p : mechanisms[i].parents) {
      if (!p.exogenous) base->children[p.index].push_back(i);
    }
  }
  base->exogenous = std::move(exogenous);
  base->endogenous = std::move(endogenous);
  base->mechanisms = std::move(mechanisms);
  CausalModel m;
  m.fixed_.assign(base->endogenous.size(), std::nullopt);
  m.base_ = std::move(base);
  return m;
}

std::size_t CausalModel::domain_size(VarRef r) const {
  return r.exogenous ? base_->exogenous.at(r.index).domain.size()
                     : base_->endogenous.at(r.index).domain.size();
}

std::string CausalModel::name(VarRef r) const {
  return r.exogenous ? base_->exogenous.at(r.index).name : base_->endogenous.at(r.index).name;
}

std::vector<VarId> CausalModel::endogenous_ids() const {
  std::vector<VarId> out;
  for (VarId i = 0; i < fixed_.size(); ++i) {
    if (!fixed_[i]) out.push_back(i);
  }
  return out;
}

std::optional<VarRef> CausalModel::find(std::string_view name) const {
  auto it = base_->index.find(std::string(name));
  if (it == base_->index.end()) return std::nullopt;
  return it->second;
}

std::optional<VarId> CausalModel::find_endogenous(std::string_view name) const {
  auto r = find(name);
  if (!r || r->exogenous) return std::nullopt;
  return r->index;
}

const std::vector<VarId>& CausalModel::order() const {
  if (!recursive()) throw ModelError("model is not recursive");
  return recursion().order;
}

Value CausalModel::apply(VarId id, const Context& u, const std::vector<Value>& values) const {
  const Mechanism& m = base_->mechanisms[id];
  if (m.table) {
    std::size_t row = 0;
    for (const VarRef& p : m.parents) {
      row = row * domain_size(p) + (p.exogenous ? u[p.index] : values[p.index]);
    }
    return (*m.table)[row];
  }
  for (const auto& r : *m.rules) {
    if (eval(r, u, values)) return 1;
  }
  return 0;
}

std::vector<Value> CausalModel::solve(const Context& u, const std::vector<int>& overrides) const {
  const auto& ord = order();
  std::vector<Value> values(fixed_.size(), 0);
  for (VarId id : ord) {
    if (!overrides.empty() && overrides[id] >= 0) {
      values[id] = static_cast<Value>(overrides[id]);
    } else if (fixed_[id]) {
      values[id] = *fixed_[id];
    } else {
      values[id] = apply(id, u, values);
    }
  }
  return values;
}

CausalModel CausalModel::submodel(const std::vector<std::pair<VarId, Value>>& assignment) const {
  CausalModel m = *this;
  for (const auto& [id, v] : assignment) {
    if (id >= fixed_.size() || fixed_[id]) throw ModelError("submodel: variable not in V");
    if (v >= variable(id).domain.size()) {
      throw ModelError("submodel: value out of domain for '" + variable(id).name + "'");
    }
    if (m.fixed_[id]) throw ModelError("submodel: variable '" + variable(id).name + "' set twice");
    m.fixed_[id] = v;
  }
  if (!base_->recursion.recursive) {
    auto mechs = base_->mechanisms;
    for (VarId id = 0; id < mechs.size(); ++id) {
      if (m.fixed_[id]) mechs[id].parents.clear();
    }
    m.own_recursion_ = std::make_shared<const Recursion>(compute_recursion(mechs.size(), mechs));
  }
  return m;
}

namespace {

Expr substitute(const Expr& e, const std::vector<std::optional<Value>>& fixed) {
  switch (e.kind) {
    case Expr::Kind::Is:
      if (!e.var.exogenous && fixed[e.var.index]) return Expr::truth(*fixed[e.var.index] == e.value);
      return e;
    case Expr::Kind::Not:
      return Expr::negation(substitute(e.children[0], fixed));
    case Expr::Kind::And: {
      std::vector<Expr> cs;
      for (const auto& c : e.children) cs.push_back(substitute(c, fixed));
      return Expr::conjunction(std::move(cs));
    }
    default:
      return e;
  }
}

}  // namespace

Mechanism CausalModel::specialized_mechanism(VarId id) const {
  const Mechanism& m = mechanism(id);
  Mechanism out;
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < m.parents.size(); ++k) {
    const VarRef p = m.parents[k];
    if (p.exogenous || !fixed_[p.index]) {
      kept.push_back(k);
      out.parents.push_back(p);
    }
  }
  if (kept.size() == m.parents.size()) return m;
  if (m.rules) {
    std::vector<Expr> rules;
    for (const auto& r : *m.rules) {
      Expr s = substitute(r, fixed_);
      if (s.kind != Expr::Kind::False) rules.push_back(std::move(s));
    }
    out.rules = std::move(rules);
  }
  if (m.table) {
    std::vector<std::size_t> sizes;
    for (const auto& p : out.parents) sizes.push_back(domain_size(p));
    const std::size_t rows = *table_size(sizes, m.table->size());
    std::vector<Value> table(rows);
    std::vector<Value> full(m.parents.size());
    for (std::size_t k = 0; k < m.parents.size(); ++k) {
      if (!m.parents[k].exogenous && fixed_[m.parents[k].index]) full[k] = *fixed_[m.parents[k].index];
    }
    for (std::size_t row = 0; row < rows; ++row) {
      std::size_t rest = row;
      for (std::size_t j = kept.size(); j-- > 0;) {
        full[kept[j]] = static_cast<Value>(rest % sizes[j]);
        rest /= sizes[j];
      }
      std::size_t src = 0;
      for (std::size_t k = 0; k < m.parents.size(); ++k) src = src * domain_size(m.parents[k]) + full[k];
      table[row] = (*m.table)[src];
    }
    out.table = std::move(table);
  }
  return out;
}

void CausalModel::check_context(const Context& u) const {
  if (u.size() != exogenous().size()) throw ModelError("context does not cover every exogenous variable");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] >= exogenous()[i].domain.size()) {
      throw ModelError("context value out of domain for '" + exogenous()[i].name + "'");
    }
  }
}

std::vector<Context> CausalModel::all_contexts() const {
  std::vector<Context> out;
  const auto& us = exogenous();
  Context u(us.size(), 0);
  for (;;) {
    out.push_back(u);
    std::size_t k = us.size();
    for (;;) {
      if (k == 0) return out;
      --k;
      if (++u[k] < us[k].domain.size()) break;
      u[k] = 0;
    }
  }
}

Recursion check_recursive(const CausalModel& model) {
  Recursion r = model.recursion();
  if (r.recursive) {
    std::erase_if(r.order, [&](VarId id) { return !model.in_v(id); });
  }
  return r;
}

std::vector<Value> evaluate(const CausalModel& model, const Context& u, const std::vector<VarId>& ys) {
  model.check_context(u);
  for (VarId y : ys) {
    if (y >= model.variables().size() || !model.in_v(y)) throw ModelError("evaluate: variable not in V");
  }
  const auto values = model.solve(u);
  std::vector<Value> out;
  for (VarId y : ys) out.push_back(values[y]);
  return out;
}

void check_event(const CausalModel& model, const Expr& e) {
  if (e.kind == Expr::Kind::Is) {
    if (e.var.exogenous) throw ModelError("event mentions exogenous variable '" + model.name(e.var) + "'");
    if (e.var.index >= model.variables().size()) throw ModelError("event mentions unknown variable");
    if (!model.in_v(e.var.index)) {
      throw ModelError("event mentions '" + model.name(e.var) + "', which is not in V");
    }
    if (e.value >= model.domain_size(e.var)) throw ModelError("event value out of domain");
  }
  for (const auto& c : e.children) check_event(model, c);
}

bool eval_expr(const Expr& e, const Context& u, const std::vector<Value>& values) {
  return eval(e, u, values);
}

bool event_truth(const CausalModel& model, const Context& u, const Expr& phi) {
  check_event(model, phi);
  model.check_context(u);
  return eval(phi, u, model.solve(u));
}

std::vector<VarId> event_variables(const Expr& e) {
  std::vector<VarRef> refs;
  collect_refs(e, refs);
  std::vector<VarId> out;
  for (const auto& r : refs) {
    if (!r.exogenous) out.push_back(r.index);
  }
  return out;
}

Rational Distribution::probability(const Context& u) const {
  if (kind == Kind::Product) {
    Rational p = 1;
    for (std::size_t i = 0; i < marginals.size(); ++i) p *= marginals[i].at(u.at(i));
    return p;
  }
  for (const auto& [c, p] : joint) {
    if (c == u) return p;
  }
  return 0;
}

void check_distribution(const CausalModel& model, const Distribution& d) {
  const auto& us = model.exogenous();
  const Rational tol(Rational(1) / Rational(1000000000));
  if (d.kind == Distribution::Kind::Product) {
    if (d.marginals.size() != us.size()) throw ModelError("one marginal per exogenous variable is required");
    for (std::size_t i = 0; i < us.size(); ++i) {
      if (d.marginals[i].size() != us[i].domain.size()) {
        throw ModelError("marginal of '" + us[i].name + "' does not match its domain");
      }
      Rational sum = 0;
      for (const auto& p : d.marginals[i]) {
        if (p < 0) throw ModelError("negative probability for '" + us[i].name + "'");
        sum += p;
      }
      if (!within(sum, 1, tol)) throw ModelError("marginal of '" + us[i].name + "' does not sum to 1");
    }
    return;
  }
  Rational sum = 0;
  std::set<Context> seen;
  for (const auto& [c, p] : d.joint) {
    model.check_context(c);
    if (!seen.insert(c).second) throw ModelError("joint distribution lists a context twice");
    if (p < 0) throw ModelError("negative probability in joint distribution");
    sum += p;
  }
  if (!within(sum, 1, tol)) throw ModelError("joint distribution does not sum to 1");
}

Rational context_probability(const ProbCausalModel& pm,
                             const std::function<bool(const Context&)>& predicate) {
  Rational sum = 0;
  if (pm.distribution.kind == Distribution::Kind::Joint) {
    for (const auto& [c, p] : pm.distribution.joint) {
      if (predicate(c)) sum += p;
    }
    return sum;
  }
  for (const auto& u : pm.model.all_contexts()) {
    if (predicate(u)) sum += pm.distribution.probability(u);
  }
  return sum;
}

std::string render_expr(const CausalModel& model, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::False:
      return "false";
    case Expr::Kind::True:
      return "true";
    case Expr::Kind::Is: {
      const std::size_t n = model.domain_size(e.var);
      const auto& dom = e.var.exogenous ? model.exogenous()[e.var.index].domain
                                        : model.variable(e.var.index).domain;
      return model.name(e.var) + " = " + (e.value < n ? dom[e.value] : "?");
    }
    case Expr::Kind::Not: {
      const Expr& c = e.children[0];
      if (c.kind == Expr::Kind::And) {
        bool all_neg = std::all_of(c.children.begin(), c.children.end(),
                                   [](const Expr& x) { return x.kind == Expr::Kind::Not; });
        if (all_neg) {
          std::string s = "(";
          for (std::size_t i = 0; i < c.children.size(); ++i) {
            if (i) s += " | ";
            s += render_expr(model, c.children[i].children[0]);
          }
          return s + ")";
        }
        return "~(" + render_expr(model, c) + ")";
      }
      if (c.kind == Expr::Kind::Is) return "~(" + render_expr(model, c) + ")";
      return "~" + render_expr(model, c);
    }
    case Expr::Kind::And: {
      std::string s;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) s += " & ";
        s += render_expr(model, e.children[i]);
      }
      return s;
    }
  }
  return "";
}

std::string to_dot(const CausalModel& model) {
  std::ostringstream os;
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  os << "digraph scm {\n  rankdir=LR;\n";
  for (const auto& u : model.exogenous()) os << "  " << quote(u.name) << " [shape=box];\n";
  for (VarId id : model.endogenous_ids()) os << "  " << quote(model.variable(id).name) << ";\n";
  for (VarId id : model.endogenous_ids()) {
    for (const auto& p : model.specialized_mechanism(id).parents) {
      os << "  " << quote(model.name(p)) << " -> " << quote(model.variable(id).name) << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace icl::scm
