#include <json.hpp>

#include "icl/scm.h"

namespace icl::scm {

using nlohmann::ordered_json;

namespace {

ordered_json expr_to_json(const CausalModel& model, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::False:
      return false;
    case Expr::Kind::True:
      return true;
    case Expr::Kind::Is: {
      const auto& dom = e.var.exogenous ? model.exogenous()[e.var.index].domain
                                        : model.variable(e.var.index).domain;
      return ordered_json{{"is", ordered_json::array({model.name(e.var), dom.at(e.value)})}};
    }
    case Expr::Kind::Not:
      return ordered_json{{"not", expr_to_json(model, e.children[0])}};
    case Expr::Kind::And: {
      ordered_json cs = ordered_json::array();
      for (const auto& c : e.children) cs.push_back(expr_to_json(model, c));
      return ordered_json{{"and", cs}};
    }
  }
  return true;
}

const ordered_json& member(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ModelError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

std::string string_of(const ordered_json& j, const std::string& where) {
  if (!j.is_string()) throw ModelError(where + ": expected a string");
  return j.get<std::string>();
}

Rational probability_of(const ordered_json& j, const std::string& where) {
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else if (j.is_number()) {
    text = j.dump();
  } else {
    throw ModelError(where + ": probability must be a string or number");
  }
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument&) {
    throw ModelError(where + ": malformed probability '" + text + "'");
  }
}

std::vector<std::string> domain_of(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) throw ModelError(where + ": domain must be an array");
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(string_of(v, where));
  return out;
}

Value value_index(const Variable& v, const ordered_json& j, const std::string& where) {
  const std::string s = string_of(j, where);
  for (std::size_t i = 0; i < v.domain.size(); ++i) {
    if (v.domain[i] == s) return static_cast<Value>(i);
  }
  throw ModelError(where + ": '" + s + "' is not in the domain of '" + v.name + "'");
}

struct Names {
  const std::vector<Variable>& exo;
  const std::vector<Variable>& endo;
  std::unordered_map<std::string, VarRef> index;

  VarRef ref(const std::string& name, const std::string& where) const {
    auto it = index.find(name);
    if (it == index.end()) throw ModelError(where + ": unknown variable '" + name + "'");
    return it->second;
  }
  const Variable& var(VarRef r) const { return r.exogenous ? exo.at(r.index) : endo.at(r.index); }
};

Expr expr_from_json(const Names& names, const ordered_json& j, const std::string& where) {
  if (j.is_boolean()) return Expr::truth(j.get<bool>());
  if (!j.is_object() || j.size() != 1) throw ModelError(where + ": malformed expression");
  if (j.contains("is")) {
    const auto& a = j.at("is");
    if (!a.is_array() || a.size() != 2) throw ModelError(where + ": \"is\" takes [name, value]");
    const VarRef r = names.ref(string_of(a[0], where), where);
    return Expr::is(r, value_index(names.var(r), a[1], where));
  }
  // Structure is kept as written so documents round-trip exactly.
  Expr e;
  if (j.contains("not")) {
    e.kind = Expr::Kind::Not;
    e.children.push_back(expr_from_json(names, j.at("not"), where));
    return e;
  }
  if (j.contains("and")) {
    if (!j.at("and").is_array()) throw ModelError(where + ": \"and\" takes an array");
    e.kind = Expr::Kind::And;
    for (const auto& c : j.at("and")) e.children.push_back(expr_from_json(names, c, where));
    return e;
  }
  throw ModelError(where + ": unknown expression operator");
}

}  // namespace

ModelDocument read_model_json(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("model document must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "exogenous" && key != "endogenous" && key != "joint") {
      throw ModelError("unknown top-level key \"" + key + "\"");
    }
  }
  std::vector<Variable> exo, endo;
  const ordered_json empty = ordered_json::array();
  const auto& jexo = doc.contains("exogenous") ? doc.at("exogenous") : empty;
  const auto& jendo = doc.contains("endogenous") ? doc.at("endogenous") : empty;
  if (!jexo.is_array() || !jendo.is_array()) throw ModelError("variable lists must be arrays");
  for (const auto& v : jexo) {
    const std::string name = string_of(member(v, "name", "exogenous variable"), "exogenous variable");
    exo.push_back({name, domain_of(member(v, "domain", name), name)});
  }
  for (const auto& v : jendo) {
    const std::string name = string_of(member(v, "name", "endogenous variable"), "endogenous variable");
    endo.push_back({name, domain_of(member(v, "domain", name), name)});
  }
  Names names{exo, endo, {}};
  for (std::uint32_t i = 0; i < exo.size(); ++i) names.index.emplace(exo[i].name, VarRef{true, i});
  for (std::uint32_t i = 0; i < endo.size(); ++i) names.index.emplace(endo[i].name, VarRef{false, i});

  std::vector<Mechanism> mechanisms;
  for (std::size_t i = 0; i < jendo.size(); ++i) {
    const auto& v = jendo[i];
    const std::string& name = endo[i].name;
    Mechanism m;
    if (v.contains("parents")) {
      if (!v.at("parents").is_array()) throw ModelError(name + ": parents must be an array");
      for (const auto& p : v.at("parents")) m.parents.push_back(names.ref(string_of(p, name), name));
    }
    if (v.contains("table")) {
      std::vector<std::size_t> sizes;
      for (const auto& p : m.parents) sizes.push_back(names.var(p).domain.size());
      auto rows = table_size(sizes, std::size_t{1} << 26);
      if (!rows) throw ModelError(name + ": table too large");
      std::vector<int> table(*rows, -1);
      if (!v.at("table").is_array()) throw ModelError(name + ": table must be an array");
      for (const auto& row : v.at("table")) {
        const auto& pv = member(row, "parents", name);
        if (!pv.is_array() || pv.size() != m.parents.size()) {
          throw ModelError(name + ": table row does not match the parent list");
        }
        std::size_t idx = 0;
        for (std::size_t k = 0; k < m.parents.size(); ++k) {
          idx = idx * sizes[k] + value_index(names.var(m.parents[k]), pv[k], name);
        }
        if (table[idx] >= 0) throw ModelError(name + ": table lists a parent assignment twice");
        table[idx] = value_index(endo[i], member(row, "value", name), name);
      }
      std::vector<Value> t;
      for (int x : table) {
        if (x < 0) throw ModelError(name + ": table is not total");
        t.push_back(static_cast<Value>(x));
      }
      m.table = std::move(t);
    }
    if (v.contains("rules")) {
      if (!v.at("rules").is_array()) throw ModelError(name + ": rules must be an array");
      std::vector<Expr> rules;
      for (const auto& r : v.at("rules")) rules.push_back(expr_from_json(names, r, name));
      m.rules = std::move(rules);
    }
    mechanisms.push_back(std::move(m));
  }

  ModelDocument out{CausalModel::create(exo, endo, std::move(mechanisms)), std::nullopt};

  std::size_t with_dist = 0;
  for (const auto& v : jexo) with_dist += v.contains("distribution") ? 1 : 0;
  const bool joint = doc.contains("joint");
  if (with_dist > 0 && (with_dist != jexo.size() || joint)) {
    throw ModelError("give a distribution for every exogenous variable or a joint table, not both");
  }
  if (with_dist > 0) {
    Distribution d;
    for (const auto& v : jexo) {
      const std::string name = v.at("name").get<std::string>();
      const auto& jd = v.at("distribution");
      if (!jd.is_array()) throw ModelError(name + ": distribution must be an array");
      std::vector<Rational> ps;
      for (const auto& p : jd) ps.push_back(probability_of(p, name));
      d.marginals.push_back(std::move(ps));
    }
    check_distribution(out.model, d);
    out.distribution = std::move(d);
  } else if (joint) {
    Distribution d;
    d.kind = Distribution::Kind::Joint;
    if (!doc.at("joint").is_array()) throw ModelError("joint must be an array");
    for (const auto& row : doc.at("joint")) {
      const auto& c = member(row, "context", "joint");
      if (!c.is_array() || c.size() != exo.size()) throw ModelError("joint: context must cover U");
      Context u;
      for (std::size_t i = 0; i < exo.size(); ++i) u.push_back(value_index(exo[i], c[i], "joint"));
      d.joint.emplace_back(std::move(u), probability_of(member(row, "probability", "joint"), "joint"));
    }
    check_distribution(out.model, d);
    out.distribution = std::move(d);
  }
  return out;
}

std::string write_model_json(const CausalModel& model, const std::optional<Distribution>& distribution) {
  ordered_json doc;
  ordered_json jexo = ordered_json::array();
  for (std::size_t i = 0; i < model.exogenous().size(); ++i) {
    const auto& u = model.exogenous()[i];
    ordered_json v{{"name", u.name}, {"domain", u.domain}};
    if (distribution && distribution->kind == Distribution::Kind::Product) {
      ordered_json ps = ordered_json::array();
      for (const auto& p : distribution->marginals.at(i)) ps.push_back(to_fraction_string(p));
      v["distribution"] = ps;
    }
    jexo.push_back(std::move(v));
  }
  ordered_json jendo = ordered_json::array();
  for (VarId id : model.endogenous_ids()) {
    const Variable& x = model.variable(id);
    const Mechanism m = model.specialized_mechanism(id);
    ordered_json v{{"name", x.name}, {"domain", x.domain}};
    ordered_json parents = ordered_json::array();
    for (const auto& p : m.parents) parents.push_back(model.name(p));
    v["parents"] = parents;
    if (m.table) {
      ordered_json rows = ordered_json::array();
      std::vector<std::size_t> sizes;
      for (const auto& p : m.parents) sizes.push_back(model.domain_size(p));
      for (std::size_t row = 0; row < m.table->size(); ++row) {
        std::vector<std::string> pv(m.parents.size());
        std::size_t rest = row;
        for (std::size_t k = m.parents.size(); k-- > 0;) {
          const VarRef p = m.parents[k];
          const auto& dom = p.exogenous ? model.exogenous()[p.index].domain : model.variable(p.index).domain;
          pv[k] = dom[rest % sizes[k]];
          rest /= sizes[k];
        }
        rows.push_back(ordered_json{{"parents", pv}, {"value", x.domain[(*m.table)[row]]}});
      }
      v["table"] = rows;
    }
    if (m.rules) {
      ordered_json rules = ordered_json::array();
      for (const auto& r : *m.rules) rules.push_back(expr_to_json(model, r));
      v["rules"] = rules;
    }
    jendo.push_back(std::move(v));
  }
  doc["exogenous"] = jexo;
  doc["endogenous"] = jendo;
  if (distribution && distribution->kind == Distribution::Kind::Joint) {
    ordered_json rows = ordered_json::array();
    for (const auto& [u, p] : distribution->joint) {
      std::vector<std::string> c;
      for (std::size_t i = 0; i < u.size(); ++i) c.push_back(model.exogenous()[i].domain[u[i]]);
      rows.push_back(ordered_json{{"context", c}, {"probability", to_fraction_string(p)}});
    }
    doc["joint"] = rows;
  }
  return doc.dump(2) + "\n";
}

}  // namespace icl::scm
