#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "icl/lang.h"
#include "lang/internal.h"

namespace icl::lang {

namespace {

SourceLocation loc_at(const std::vector<SourceLocation>& locs, std::size_t i) {
  return i < locs.size() ? locs[i] : SourceLocation{};
}

// Re-throws a location-less diagnostic with the given statement location.
template <typename F>
void at_location(SourceLocation loc, F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    if (e.location().line > 0 || loc.line == 0) throw;
    throw ParseError(e.message(), loc);
  }
}

bool is_object_sort(const Vocabulary& voc, std::string_view sort) {
  return sort == kObjectSort || voc.find_sort(sort) != nullptr;
}

void validate_vocabulary(const Vocabulary& voc, const TheoryWithLocations* locs) {
  auto where = [&](const std::vector<SourceLocation> TheoryWithLocations::*member,
                   std::size_t i) { return locs ? loc_at(locs->*member, i) : SourceLocation{}; };

  std::set<std::string> sort_names;
  for (std::size_t i = 0; i < voc.sorts.size(); ++i) {
    const auto& s = voc.sorts[i];
    const auto loc = where(&TheoryWithLocations::sort_locs, i);
    if (s.name == kActionSort) throw ParseError("'action' is a built-in sort", loc);
    if (!sort_names.insert(s.name).second) throw ParseError("duplicate sort '" + s.name + "'", loc);
    std::set<std::string> members;
    for (const auto& m : s.members) {
      if (!members.insert(m).second) {
        throw ParseError("constant '" + m + "' listed twice in sort '" + s.name + "'", loc);
      }
    }
  }
  if (voc.function_depth < 0) throw ParseError("negative nesting depth", {});
  std::set<std::string> fn_names;
  for (std::size_t i = 0; i < voc.functions.size(); ++i) {
    const auto& f = voc.functions[i];
    const auto loc = where(&TheoryWithLocations::function_locs, i);
    if (f.arg_sorts.empty()) {
      throw ParseError("function '" + f.name + "' needs arguments; declare constants in a sort", loc);
    }
    if (voc.is_constant(f.name) || !fn_names.insert(f.name).second) {
      throw ParseError("duplicate object symbol '" + f.name + "'", loc);
    }
    for (const auto& s : f.arg_sorts) {
      if (!is_object_sort(voc, s)) throw ParseError("unknown object sort '" + s + "'", loc);
    }
    if (!voc.find_sort(f.result_sort)) {
      throw ParseError("unknown result sort '" + f.result_sort + "'", loc);
    }
  }
  std::set<std::string> action_names;
  for (std::size_t i = 0; i < voc.actions.size(); ++i) {
    const auto& a = voc.actions[i];
    const auto loc = where(&TheoryWithLocations::action_locs, i);
    if (!action_names.insert(a.name).second) throw ParseError("duplicate action '" + a.name + "'", loc);
    for (const auto& s : a.arg_sorts) {
      if (!is_object_sort(voc, s)) throw ParseError("unknown object sort '" + s + "'", loc);
    }
  }
  std::set<std::string> pred_names;
  for (std::size_t i = 0; i < voc.predicates.size(); ++i) {
    const auto& p = voc.predicates[i];
    const auto loc = where(&TheoryWithLocations::predicate_locs, i);
    if (p.name == kDoPredicate) throw ParseError("'do' is reserved", loc);
    if (!pred_names.insert(p.name).second) {
      throw ParseError("duplicate predicate '" + p.name + "'", loc);
    }
    for (const auto& s : p.arg_sorts) {
      if (s != kActionSort && !is_object_sort(voc, s)) {
        throw ParseError("unknown sort '" + s + "'", loc);
      }
    }
  }
}

void check_object_term(const Vocabulary& voc, const Term& t, std::string_view sort) {
  if (t.kind == Term::Kind::Variable) return;
  if (t.args.empty()) {
    if (voc.find_function(t.name)) {
      throw ParseError("function '" + t.name + "' applied to no arguments", {});
    }
    if (!voc.is_constant(t.name)) {
      if (voc.find_action(t.name)) {
        throw ParseError("action '" + t.name + "' used where an object is expected", {});
      }
      throw ParseError("unknown object constant '" + t.name + "'", {});
    }
    if (sort != kObjectSort) {
      const SortDecl* s = voc.find_sort(sort);
      if (std::find(s->members.begin(), s->members.end(), t.name) == s->members.end()) {
        throw ParseError("constant '" + t.name + "' is not of sort '" + std::string(sort) + "'", {});
      }
    }
    return;
  }
  const FunctionDecl* f = voc.find_function(t.name);
  if (!f) throw ParseError("unknown function symbol '" + t.name + "'", {});
  if (f->arg_sorts.size() != t.args.size()) {
    throw ParseError("function '" + t.name + "' expects " + std::to_string(f->arg_sorts.size()) +
                         " arguments",
                     {});
  }
  if (sort != kObjectSort && f->result_sort != sort) {
    throw ParseError("term '" + render_term(t) + "' is not of sort '" + std::string(sort) + "'", {});
  }
  for (std::size_t i = 0; i < t.args.size(); ++i) check_object_term(voc, t.args[i], f->arg_sorts[i]);
}

void check_action_term(const Vocabulary& voc, const Term& t) {
  if (t.kind == Term::Kind::Variable) return;
  const ActionDecl* a = voc.find_action(t.name);
  if (!a) throw ParseError("unknown action '" + t.name + "'", {});
  if (a->arg_sorts.size() != t.args.size()) {
    throw ParseError("action '" + t.name + "' expects " + std::to_string(a->arg_sorts.size()) +
                         " arguments",
                     {});
  }
  for (std::size_t i = 0; i < t.args.size(); ++i) check_object_term(voc, t.args[i], a->arg_sorts[i]);
}

void check_term_at(const Vocabulary& voc, const Term& t, std::string_view sort) {
  if (sort == kActionSort) {
    check_action_term(voc, t);
  } else {
    check_object_term(voc, t, sort);
  }
}

class SortInference {
 public:
  explicit SortInference(const Vocabulary& voc) : voc_(voc) {}

  void atom(const Atom& a) {
    check_atom(voc_, a);
    if (!a.time.variable.empty()) note(a.time.variable, VarKind::Time, "");
    if (a.is_action()) {
      term(a.args[0], kActionSort);
      return;
    }
    const PredicateDecl* p = voc_.find_predicate(a.predicate);
    for (std::size_t i = 0; i < a.args.size(); ++i) term(a.args[i], p->arg_sorts[i]);
  }

  void formula(const Formula& f) {
    switch (f.kind) {
      case Formula::Kind::Atom:
        atom(f.atom);
        break;
      case Formula::Kind::Distinct:
        distinct(f.terms[0], f.terms[1]);
        break;
      default:
        for (const auto& c : f.children) formula(c);
    }
  }

  VariableSorts result() && {
    for (auto& [name, d] : pending_) sorts_.try_emplace(name, VariableSort{d, {}});
    return std::move(sorts_);
  }

 private:
  void note(const std::string& var, VarKind kind, std::string_view object_sort) {
    auto [it, inserted] = sorts_.try_emplace(var, VariableSort{kind, {}});
    if (!inserted && it->second.kind != kind) {
      throw ParseError("variable '" + var + "' used with conflicting sorts", {});
    }
    if (kind == VarKind::Object && !object_sort.empty() && object_sort != kObjectSort) {
      it->second.object_sorts.insert(std::string(object_sort));
    }
    pending_.erase(var);
  }

  void term(const Term& t, std::string_view sort) {
    if (t.kind == Term::Kind::Variable) {
      note(t.name, sort == kActionSort ? VarKind::Action : VarKind::Object, sort);
      return;
    }
    if (sort == kActionSort) {
      const ActionDecl* a = voc_.find_action(t.name);
      for (std::size_t i = 0; i < t.args.size(); ++i) term(t.args[i], a->arg_sorts[i]);
    } else if (!t.args.empty()) {
      const FunctionDecl* f = voc_.find_function(t.name);
      for (std::size_t i = 0; i < t.args.size(); ++i) term(t.args[i], f->arg_sorts[i]);
    }
  }

  VarKind kind_of_ground(const Term& t) const {
    if (voc_.find_action(t.name) && !voc_.is_constant(t.name) && !voc_.find_function(t.name)) {
      return VarKind::Action;
    }
    return VarKind::Object;
  }

  // Both sides of `\=` share a kind; variables seen only here are objects
  // unless the other side fixes the kind.
  void distinct(const Term& a, const Term& b) {
    auto kind_of = [&](const Term& t) -> std::optional<VarKind> {
      if (t.kind == Term::Kind::Apply) return kind_of_ground(t);
      auto it = sorts_.find(t.name);
      if (it != sorts_.end()) return it->second.kind;
      return std::nullopt;
    };
    auto ka = kind_of(a);
    auto kb = kind_of(b);
    if (ka && kb && *ka != *kb) throw ParseError("'\\=' compares terms of different sorts", {});
    if ((ka && *ka == VarKind::Time) || (kb && *kb == VarKind::Time)) {
      throw ParseError("'\\=' is defined on object and action terms only", {});
    }
    const VarKind k = ka ? *ka : kb ? *kb : VarKind::Object;
    for (const Term* t : {&a, &b}) {
      if (t->kind == Term::Kind::Apply) {
        if (k == VarKind::Action) check_action_term(voc_, *t);
        else check_object_term(voc_, *t, kObjectSort);
      } else if (!sorts_.count(t->name)) {
        pending_[t->name] = k;
      }
    }
  }

  const Vocabulary& voc_;
  VariableSorts sorts_;
  std::map<std::string, VarKind> pending_;
};

bool in_sort(const Vocabulary& voc, const Term& t, const VariableSort& vs) {
  for (const auto& s : vs.object_sorts) {
    try {
      check_object_term(voc, t, s);
    } catch (const ParseError&) {
      return false;
    }
  }
  return true;
}

// Does the ground atom `g` match `pattern` under some well-sorted
// substitution?
bool matches(const Vocabulary& voc, const Atom& pattern, const VariableSorts& sorts, const Atom& g) {
  if (pattern.predicate != g.predicate || pattern.args.size() != g.args.size()) return false;
  std::map<std::string, Term> terms;
  std::map<std::string, int> times;
  std::function<bool(const Term&, const Term&)> match = [&](const Term& p, const Term& t) {
    if (p.kind == Term::Kind::Variable) {
      auto [it, inserted] = terms.try_emplace(p.name, t);
      if (!inserted) return it->second == t;
      auto s = sorts.find(p.name);
      return s == sorts.end() || in_sort(voc, t, s->second);
    }
    if (p.name != t.name || p.args.size() != t.args.size()) return false;
    for (std::size_t i = 0; i < p.args.size(); ++i) {
      if (!match(p.args[i], t.args[i])) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < g.args.size(); ++i) {
    if (!match(pattern.args[i], g.args[i])) return false;
  }
  const int t = g.time.offset;
  if (pattern.time.variable.empty()) return pattern.time.offset == t;
  if (t < pattern.time.offset) return false;
  auto [it, inserted] = times.try_emplace(pattern.time.variable, t - pattern.time.offset);
  return inserted || it->second == t - pattern.time.offset;
}

void check_ground_atom(const Vocabulary& voc, const Atom& a, std::string_view what) {
  if (!a.is_ground()) throw ParseError(std::string(what) + " '" + render_atom(a) + "' is not ground", {});
  check_atom(voc, a);
}

}  // namespace

void check_atom(const Vocabulary& voc, const Atom& a) {
  if (a.time.offset < 0) throw ParseError("negative time in '" + render_atom(a) + "'", {});
  if (a.is_action()) {
    if (a.args.size() != 1) throw ParseError("do(action, time) takes two arguments", {});
    check_action_term(voc, a.args[0]);
    return;
  }
  const PredicateDecl* p = voc.find_predicate(a.predicate);
  if (!p) throw ParseError("unknown predicate '" + a.predicate + "'", {});
  if (p->arg_sorts.size() != a.args.size()) {
    throw ParseError("predicate '" + a.predicate + "' expects " +
                         std::to_string(p->arg_sorts.size() + 1) + " arguments (including time)",
                     {});
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) check_term_at(voc, a.args[i], p->arg_sorts[i]);
}

VariableSorts infer_variable_sorts(const Vocabulary& vocabulary,
                                   const std::vector<const Formula*>& formulas,
                                   const std::vector<const Atom*>& atoms) {
  SortInference inf(vocabulary);
  for (const Atom* a : atoms) inf.atom(*a);
  for (const Formula* f : formulas) inf.formula(*f);
  return std::move(inf).result();
}

void validate_theory(const TheoryWithLocations& parsed) {
  const IclTheory& th = parsed.theory;
  const Vocabulary& voc = th.vocabulary;
  validate_vocabulary(voc, &parsed);
  if (th.horizon < 0) throw ParseError("negative horizon", {});

  std::vector<VariableSorts> clause_sorts;
  for (std::size_t i = 0; i < th.program.size(); ++i) {
    const Clause& c = th.program[i];
    at_location(loc_at(parsed.clause_locs, i), [&] {
      clause_sorts.push_back(infer_variable_sorts(voc, {&c.body}, {&c.head}));
    });
  }

  std::map<Atom, std::size_t, bool (*)(const Atom&, const Atom&)> seen(
      [](const Atom& a, const Atom& b) { return render_atom(a) < render_atom(b); });
  const Rational tolerance(1, 1000000000);
  bool any_prob = false, all_prob = true;
  for (std::size_t i = 0; i < th.choice_space.size(); ++i) {
    const Alternative& alt = th.choice_space[i];
    at_location(loc_at(parsed.choice_locs, i), [&] {
      if (alt.choices.empty()) throw ParseError("empty alternative", {});
      Rational sum = 0;
      for (const auto& c : alt.choices) {
        check_ground_atom(voc, c.atom, "atomic choice");
        if (c.atom.is_action()) throw ParseError("atomic choices must be fluent atoms", {});
        auto [it, inserted] = seen.emplace(c.atom, i);
        if (!inserted) {
          throw ParseError("atomic choice '" + render_atom(c.atom) + "' occurs in two alternatives" +
                               (it->second == i ? " (or twice in one)" : ""),
                           {});
        }
        if (c.probability) {
          any_prob = true;
          Rational p;
          try {
            p = parse_rational(*c.probability);
          } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), {});
          }
          if (p < 0 || p > 1) throw ParseError("probability outside [0,1]", {});
          sum += p;
        } else {
          all_prob = false;
        }
      }
      if (any_prob && all_prob && !within(sum, 1, tolerance)) {
        throw ParseError("probabilities of an alternative sum to " + to_decimal_string(sum) +
                             ", not 1",
                         {});
      }
      for (std::size_t k = 0; k < th.program.size(); ++k) {
        for (const auto& c : alt.choices) {
          if (matches(voc, th.program[k].head, clause_sorts[k], c.atom)) {
            throw ParseError("atomic choice '" + render_atom(c.atom) +
                                 "' coincides with the head of a clause instance",
                             {});
          }
        }
      }
    });
  }
  if (any_prob && !all_prob) {
    throw ParseError("probabilities must be given for every atomic choice or for none", {});
  }

  for (std::size_t i = 0; i < th.executions.size(); ++i) {
    at_location(loc_at(parsed.exec_locs, i), [&] {
      const Atom& e = th.executions[i];
      if (!e.is_action()) throw ParseError("exec expects a do(action, time) atom", {});
      check_ground_atom(voc, e, "execution");
    });
  }
}

void validate_theory(const IclTheory& theory) {
  TheoryWithLocations t;
  t.theory = theory;
  validate_theory(t);
}

IclTheory parse_theory(std::string_view source) {
  TheoryWithLocations parsed = parse_theory_raw(source);
  validate_theory(parsed);
  return std::move(parsed.theory);
}

namespace {

std::vector<Atom> conjunction_atoms(const Formula& f) {
  std::vector<const Atom*> ptrs;
  collect_atoms(f, ptrs);
  std::vector<Atom> out;
  for (const Atom* a : ptrs) {
    if (std::find(out.begin(), out.end(), *a) == out.end()) out.push_back(*a);
  }
  return out;
}

void check_total_choice(const IclTheory& theory, const std::vector<Atom>& total) {
  std::vector<int> hits(theory.choice_space.size(), 0);
  for (const Atom& a : total) {
    check_ground_atom(theory.vocabulary, a, "atomic choice");
    bool found = false;
    for (std::size_t i = 0; i < theory.choice_space.size() && !found; ++i) {
      for (const auto& c : theory.choice_space[i].choices) {
        if (c.atom == a) {
          ++hits[i];
          found = true;
          break;
        }
      }
    }
    if (!found) throw ParseError("'" + render_atom(a) + "' is not an atomic choice", {});
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] != 1) {
      throw ParseError("not a total choice: alternative " + std::to_string(i) + " is selected " +
                           std::to_string(hits[i]) + " times",
                       {});
    }
  }
}

}  // namespace

Query parse_query(std::string_view source, const IclTheory& theory) {
  const QueryWithLocations raw = parse_query_raw(source);
  const Vocabulary& voc = theory.vocabulary;
  if (raw.kind.empty()) throw ParseError("missing 'query <kind>.' statement", {});
  if (!raw.cause) throw ParseError("missing 'cause' statement", {});
  if (!raw.effect) throw ParseError("missing 'effect' statement", {});

  QueryCommon common;
  at_location(raw.cause_loc, [&] {
    if (!is_conjunction_of_atoms(*raw.cause)) {
      throw ParseError("cause must be a conjunction of atoms", {});
    }
  });
  at_location(raw.effect_loc, [&] { infer_variable_sorts(voc, {&*raw.cause, &*raw.effect}); });
  common.cause = conjunction_atoms(*raw.cause);
  common.effect = *raw.effect;
  if (!raw.executions.empty()) {
    common.executions = raw.executions;
    for (std::size_t i = 0; i < raw.executions.size(); ++i) {
      at_location(raw.exec_locs[i], [&] {
        if (!raw.executions[i].is_action()) throw ParseError("exec expects a do(action, time) atom", {});
        check_ground_atom(voc, raw.executions[i], "execution");
      });
    }
  }
  if (raw.exec_mode) {
    at_location(raw.mode_loc, [&] {
      if (*raw.exec_mode == "fixed") common.exec_mode = ExecMode::Fixed;
      else if (*raw.exec_mode == "overridable") common.exec_mode = ExecMode::Overridable;
      else throw ParseError("execution mode must be 'fixed' or 'overridable'", {});
    });
  }
  for (std::size_t i = 0; i < raw.totals.size(); ++i) {
    at_location(raw.total_locs[i], [&] { check_total_choice(theory, raw.totals[i]); });
  }
  if (raw.alpha && raw.kind != "partial") {
    throw ParseError("'alpha' applies to partial-explanation queries only", raw.alpha_loc);
  }

  if (raw.kind == "weak" || raw.kind == "actual") {
    if (raw.totals.size() != 1) {
      throw ParseError("cause queries take exactly one 'total' choice", raw.kind_loc);
    }
    CauseQuery q;
    static_cast<QueryCommon&>(q) = std::move(common);
    q.total_choice = raw.totals[0];
    q.mode = raw.kind == "weak" ? CauseMode::Weak : CauseMode::Actual;
    return q;
  }
  if (raw.kind == "explanation" || raw.kind == "partial") {
    if (raw.totals.empty()) {
      throw ParseError("explanation queries need at least one 'total' choice", raw.kind_loc);
    }
    if (raw.kind == "explanation") {
      ExplanationQuery q;
      static_cast<QueryCommon&>(q) = std::move(common);
      q.total_choices = raw.totals;
      return q;
    }
    PartialExplanationQuery q;
    static_cast<QueryCommon&>(q) = std::move(common);
    q.total_choices = raw.totals;
    if (raw.alpha) {
      at_location(raw.alpha_loc, [&] {
        Rational a;
        try {
          a = parse_rational(*raw.alpha);
        } catch (const std::invalid_argument& e) {
          throw ParseError(e.what(), {});
        }
        if (a < 0 || a > 1) throw ParseError("alpha outside [0,1]", {});
      });
      q.alpha = raw.alpha;
    }
    return q;
  }
  throw ParseError("unknown query kind '" + raw.kind + "' (weak, actual, explanation, partial)",
                   raw.kind_loc);
}

}  // namespace icl::lang
