#include "icl/ground.h"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace icl::ground {

using lang::Atom;
using lang::Formula;
using lang::Term;

namespace {

const std::vector<Term> kNoTerms;

template <typename F>
void product(const std::vector<const std::vector<Term>*>& ranges, F&& f) {
  std::vector<std::size_t> idx(ranges.size(), 0);
  for (const auto* r : ranges) {
    if (r->empty()) return;
  }
  std::vector<Term> tuple(ranges.size());
  for (;;) {
    for (std::size_t i = 0; i < ranges.size(); ++i) tuple[i] = (*ranges[i])[idx[i]];
    f(tuple);
    std::size_t k = ranges.size();
    while (k > 0) {
      --k;
      if (++idx[k] < ranges[k]->size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (ranges.empty()) return;
  }
}

const std::vector<Term>& arg_range(const HerbrandUniverse& u, std::string_view sort) {
  if (sort == lang::kActionSort) return u.actions;
  if (sort == lang::kObjectSort) return u.objects;
  return u.sort(sort);
}

// Calls f(sub) for each substitution; stops early when f returns false.
void for_each_substitution(const HerbrandUniverse& u, const lang::VariableSorts& sorts,
                           const std::function<bool(const Substitution&)>& f) {
  struct Slot {
    std::string name;
    bool time = false;
    std::vector<Term> terms;
  };
  std::vector<Slot> slots;
  for (const auto& [name, vs] : sorts) {
    Slot s{name, vs.kind == lang::VarKind::Time, {}};
    if (!s.time) {
      s.terms = u.range(vs);
      if (s.terms.empty()) return;
    }
    slots.push_back(std::move(s));
  }
  std::vector<std::size_t> idx(slots.size(), 0);
  auto size_of = [&](const Slot& s) {
    return s.time ? static_cast<std::size_t>(u.horizon + 1) : s.terms.size();
  };
  Substitution sub;
  for (;;) {
    sub.terms.clear();
    sub.times.clear();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i].time) sub.times[slots[i].name] = static_cast<int>(idx[i]);
      else sub.terms[slots[i].name] = slots[i].terms[idx[i]];
    }
    if (!f(sub)) return;
    std::size_t k = slots.size();
    for (;;) {
      if (k == 0) return;
      --k;
      if (++idx[k] < size_of(slots[k])) break;
      idx[k] = 0;
    }
  }
}

GroundFormula make_not(GroundFormula f) {
  if (f.kind == GroundFormula::Kind::True) return GroundFormula::truth(false);
  if (f.kind == GroundFormula::Kind::False) return GroundFormula::truth(true);
  GroundFormula n;
  n.kind = GroundFormula::Kind::Not;
  n.children.push_back(std::move(f));
  return n;
}

GroundFormula make_and(std::vector<GroundFormula> parts) {
  std::vector<GroundFormula> kept;
  for (auto& p : parts) {
    if (p.kind == GroundFormula::Kind::False) return GroundFormula::truth(false);
    if (p.kind != GroundFormula::Kind::True) kept.push_back(std::move(p));
  }
  if (kept.empty()) return GroundFormula::truth(true);
  if (kept.size() == 1) return std::move(kept.front());
  GroundFormula a;
  a.kind = GroundFormula::Kind::And;
  a.children = std::move(kept);
  return a;
}

void render_ground(const GroundProgram& p, const GroundFormula& f, std::ostream& os, bool nested) {
  switch (f.kind) {
    case GroundFormula::Kind::False:
      os << "false";
      break;
    case GroundFormula::Kind::True:
      os << "true";
      break;
    case GroundFormula::Kind::Atom:
      os << p.atom(f.atom).text;
      break;
    case GroundFormula::Kind::Not:
      os << '~';
      render_ground(p, f.children[0], os, true);
      break;
    case GroundFormula::Kind::And:
      if (nested) os << '(';
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) os << " & ";
        render_ground(p, f.children[i], os, true);
      }
      if (nested) os << ')';
      break;
  }
}

}  // namespace

const std::vector<Term>& HerbrandUniverse::sort(std::string_view name) const {
  if (name == lang::kObjectSort) return objects;
  auto it = sorts.find(name);
  return it == sorts.end() ? kNoTerms : it->second;
}

std::vector<Term> HerbrandUniverse::range(const lang::VariableSort& vs) const {
  if (vs.kind == lang::VarKind::Action) return actions;
  if (vs.kind == lang::VarKind::Time) throw std::logic_error("time variables have no term range");
  if (vs.object_sorts.empty()) return objects;
  std::vector<Term> out;
  const auto& first = sort(*vs.object_sorts.begin());
  for (const auto& t : first) {
    bool everywhere = true;
    for (const auto& s : vs.object_sorts) {
      const auto& r = sort(s);
      if (std::find(r.begin(), r.end(), t) == r.end()) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) out.push_back(t);
  }
  return out;
}

lang::Atom GroundAtom::to_atom() const {
  return lang::Atom{predicate, args, lang::TimeTerm::at(time)};
}

GroundFormula GroundFormula::truth(bool value) {
  GroundFormula f;
  f.kind = value ? Kind::True : Kind::False;
  return f;
}

GroundFormula GroundFormula::of(AtomId atom) {
  GroundFormula f;
  f.kind = Kind::Atom;
  f.atom = atom;
  return f;
}

void collect_atoms(const GroundFormula& f, std::vector<AtomId>& out) {
  if (f.kind == GroundFormula::Kind::Atom) {
    if (std::find(out.begin(), out.end(), f.atom) == out.end()) out.push_back(f.atom);
  }
  for (const auto& c : f.children) collect_atoms(c, out);
}

std::string Substitution::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  std::map<std::string, std::string> all;
  for (const auto& [k, v] : terms) all[k] = lang::render_term(v);
  for (const auto& [k, v] : times) all[k] = std::to_string(v);
  for (const auto& [k, v] : all) {
    if (!first) os << ", ";
    first = false;
    os << k << " -> " << v;
  }
  os << '}';
  return os.str();
}

Term apply(const Term& t, const Substitution& sub) {
  if (t.kind == Term::Kind::Variable) {
    auto it = sub.terms.find(t.name);
    return it == sub.terms.end() ? t : it->second;
  }
  Term out = t;
  for (auto& a : out.args) a = apply(a, sub);
  return out;
}

Atom apply(const Atom& a, const Substitution& sub) {
  Atom out = a;
  for (auto& t : out.args) t = apply(t, sub);
  if (!out.time.variable.empty()) {
    auto it = sub.times.find(out.time.variable);
    if (it != sub.times.end()) out.time = lang::TimeTerm::at(it->second + out.time.offset);
  }
  return out;
}

HerbrandUniverse build_universe(const lang::Vocabulary& voc, int horizon, std::size_t max_terms) {
  HerbrandUniverse u;
  u.horizon = horizon;
  auto add_object = [&](const Term& t) {
    if (std::find(u.objects.begin(), u.objects.end(), t) == u.objects.end()) u.objects.push_back(t);
    if (u.objects.size() > max_terms) throw GroundingError("Herbrand universe exceeds size cap");
  };
  for (const auto& s : voc.sorts) {
    auto& members = u.sorts[s.name];
    for (const auto& m : s.members) {
      members.push_back(Term::constant(m));
      add_object(members.back());
    }
  }
  for (int d = 0; d < voc.function_depth; ++d) {
    std::map<std::string, std::vector<Term>, std::less<>> snapshot = u.sorts;
    const std::vector<Term> objects = u.objects;
    auto range_of = [&](const std::string& sort) -> const std::vector<Term>& {
      if (sort == lang::kObjectSort) return objects;
      auto it = snapshot.find(sort);
      return it == snapshot.end() ? kNoTerms : it->second;
    };
    for (const auto& f : voc.functions) {
      std::vector<const std::vector<Term>*> ranges;
      for (const auto& s : f.arg_sorts) ranges.push_back(&range_of(s));
      auto& result = u.sorts[f.result_sort];
      product(ranges, [&](const std::vector<Term>& args) {
        Term t = Term::apply(f.name, args);
        if (std::find(result.begin(), result.end(), t) == result.end()) result.push_back(t);
        add_object(t);
      });
    }
  }
  for (const auto& a : voc.actions) {
    std::vector<const std::vector<Term>*> ranges;
    for (const auto& s : a.arg_sorts) ranges.push_back(&arg_range(u, s));
    product(ranges, [&](const std::vector<Term>& args) {
      u.actions.push_back(Term::apply(a.name, args));
      if (u.actions.size() > max_terms) throw GroundingError("action universe exceeds size cap");
    });
  }
  return u;
}

std::vector<Substitution> enumerate_substitutions(const HerbrandUniverse& universe,
                                                  const lang::VariableSorts& sorts) {
  std::vector<Substitution> out;
  for_each_substitution(universe, sorts, [&](const Substitution& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

AtomId GroundProgram::add_atom(GroundAtom atom) {
  const AtomId id = static_cast<AtomId>(atoms_.size());
  index_.emplace(atom.text, id);
  atoms_.push_back(std::move(atom));
  return id;
}

std::optional<AtomId> GroundProgram::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<AtomId> GroundProgram::find(const lang::Atom& a) const {
  if (!a.is_ground()) return std::nullopt;
  return find(lang::render_atom(a));
}

std::optional<std::pair<std::size_t, std::size_t>> GroundProgram::choice_position(AtomId id) const {
  auto it = choice_pos_.find(id);
  if (it == choice_pos_.end()) return std::nullopt;
  return it->second;
}

namespace {

// nullopt: some atom lies beyond the horizon.
std::optional<GroundFormula> try_ground(const GroundProgram& p, const Formula& f,
                                        const Substitution& sub, bool strict) {
  switch (f.kind) {
    case Formula::Kind::False:
      return GroundFormula::truth(false);
    case Formula::Kind::True:
      return GroundFormula::truth(true);
    case Formula::Kind::Atom: {
      const Atom g = apply(f.atom, sub);
      if (!g.is_ground()) throw GroundingError("'" + lang::render_atom(g) + "' is not ground");
      if (g.time.offset > p.horizon()) {
        if (strict) {
          throw GroundingError("'" + lang::render_atom(g) + "' lies beyond horizon " +
                               std::to_string(p.horizon()));
        }
        return std::nullopt;
      }
      auto id = p.find(g);
      if (!id) throw GroundingError("'" + lang::render_atom(g) + "' is not in the Herbrand base");
      return GroundFormula::of(*id);
    }
    case Formula::Kind::Distinct: {
      const Term a = apply(f.terms[0], sub);
      const Term b = apply(f.terms[1], sub);
      if (!a.is_ground() || !b.is_ground()) throw GroundingError("'\\=' over non-ground terms");
      return GroundFormula::truth(!(a == b));
    }
    case Formula::Kind::Not: {
      auto inner = try_ground(p, f.children[0], sub, strict);
      if (!inner) return std::nullopt;
      return make_not(std::move(*inner));
    }
    case Formula::Kind::And: {
      std::vector<GroundFormula> parts;
      for (const auto& c : f.children) {
        auto g = try_ground(p, c, sub, strict);
        if (!g) return std::nullopt;
        parts.push_back(std::move(*g));
      }
      return make_and(std::move(parts));
    }
  }
  return std::nullopt;
}

}  // namespace

GroundFormula GroundProgram::ground(const lang::Formula& f, const Substitution& sub) const {
  return *try_ground(*this, f, sub, true);
}

AtomId GroundProgram::ground(const lang::Atom& a, const Substitution& sub) const {
  return ground(Formula::of(a), sub).atom;
}

GroundProgram ground_theory(const lang::IclTheory& theory, const GroundOptions& options) {
  const auto& voc = theory.vocabulary;
  if (theory.horizon < 0) throw GroundingError("negative horizon");
  GroundProgram p;
  p.universe_ = build_universe(voc, theory.horizon, options.max_atoms);
  const HerbrandUniverse& u = p.universe_;

  auto add = [&](const std::string& pred, const std::vector<Term>& args, int t) {
    GroundAtom a{pred, args, t, ""};
    a.text = lang::render_atom(a.to_atom());
    p.add_atom(std::move(a));
    if (p.atoms_.size() > options.max_atoms) {
      throw GroundingError("Herbrand base exceeds " + std::to_string(options.max_atoms) + " atoms");
    }
  };
  for (const auto& pred : voc.predicates) {
    std::vector<const std::vector<Term>*> ranges;
    for (const auto& s : pred.arg_sorts) ranges.push_back(&arg_range(u, s));
    product(ranges, [&](const std::vector<Term>& args) {
      for (int t = 0; t <= theory.horizon; ++t) add(pred.name, args, t);
    });
  }
  for (const auto& a : u.actions) {
    for (int t = 0; t <= theory.horizon; ++t) add(std::string(lang::kDoPredicate), {a}, t);
  }

  for (std::size_t i = 0; i < theory.choice_space.size(); ++i) {
    const auto& alt = theory.choice_space[i];
    std::vector<AtomId> ids;
    std::vector<Rational> probs;
    for (std::size_t j = 0; j < alt.choices.size(); ++j) {
      const auto& c = alt.choices[j];
      if (c.atom.time.offset > theory.horizon) {
        throw GroundingError("atomic choice '" + lang::render_atom(c.atom) + "' lies beyond horizon");
      }
      auto id = p.find(c.atom);
      if (!id) throw GroundingError("atomic choice '" + lang::render_atom(c.atom) + "' is ill-sorted");
      ids.push_back(*id);
      p.choice_pos_[*id] = {i, j};
      if (theory.probabilistic()) probs.push_back(theory.probability(i, j));
    }
    p.alternatives_.push_back(std::move(ids));
    if (theory.probabilistic()) p.probabilities_.push_back(std::move(probs));
  }

  for (const auto& clause : theory.program) {
    const auto sorts = lang::infer_variable_sorts(voc, {&clause.body}, {&clause.head});
    for_each_substitution(u, sorts, [&](const Substitution& sub) {
      const Atom head = apply(clause.head, sub);
      if (head.time.offset > theory.horizon) return true;
      auto body = try_ground(p, clause.body, sub, false);
      if (!body || body->kind == GroundFormula::Kind::False) return true;
      auto id = p.find(head);
      if (!id) throw GroundingError("'" + lang::render_atom(head) + "' is not in the Herbrand base");
      GroundClause gc{*id, std::move(*body), {}};
      collect_atoms(gc.body, gc.body_atoms);
      p.clauses_.push_back(std::move(gc));
      if (p.clauses_.size() > options.max_clauses) {
        throw GroundingError("ground program exceeds " + std::to_string(options.max_clauses) +
                             " clauses");
      }
      return true;
    });
  }
  p.by_head_.assign(p.atoms_.size(), {});
  for (std::size_t i = 0; i < p.clauses_.size(); ++i) p.by_head_[p.clauses_[i].head].push_back(i);
  return p;
}

Acyclicity check_acyclic(const GroundProgram& program) {
  const std::size_t n = program.size();
  std::vector<std::vector<AtomId>> deps(n);  // head -> body atoms
  for (const auto& c : program.clauses()) {
    auto& d = deps[c.head];
    for (AtomId b : c.body_atoms) {
      if (std::find(d.begin(), d.end(), b) == d.end()) d.push_back(b);
    }
  }
  Acyclicity out;
  out.level.assign(n, -1);
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<char> state(n, 0);
  std::vector<AtomId> stack_atoms;
  struct Frame {
    AtomId atom;
    std::size_t next;
  };
  for (AtomId root = 0; root < n; ++root) {
    if (state[root]) continue;
    std::vector<Frame> stack{{root, 0}};
    state[root] = 1;
    stack_atoms.assign(1, root);
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < deps[f.atom].size()) {
        const AtomId b = deps[f.atom][f.next++];
        if (state[b] == 1) {
          // b is on the stack: the cycle is b -> ... -> f.atom -> b in
          // head-from-body direction.
          auto it = std::find(stack_atoms.begin(), stack_atoms.end(), b);
          std::vector<AtomId> down(it, stack_atoms.end());  // b, ..., f.atom (head to body)
          out.acyclic = false;
          out.level.clear();
          out.cycle.assign(down.rbegin(), down.rend());
          out.cycle.push_back(out.cycle.front());
          return out;
        }
        if (state[b] == 0) {
          state[b] = 1;
          stack.push_back({b, 0});
          stack_atoms.push_back(b);
        }
        continue;
      }
      int lvl = 0;
      for (AtomId b : deps[f.atom]) lvl = std::max(lvl, out.level[b] + 1);
      out.level[f.atom] = lvl;
      state[f.atom] = 2;
      stack.pop_back();
      stack_atoms.pop_back();
    }
  }
  out.order.resize(n);
  for (AtomId i = 0; i < n; ++i) out.order[i] = i;
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](AtomId a, AtomId b) { return out.level[a] < out.level[b]; });
  return out;
}

std::vector<AtomId> World::atoms() const {
  std::vector<AtomId> out;
  for (AtomId i = 0; i < truth_.size(); ++i) {
    if (truth_[i]) out.push_back(i);
  }
  return out;
}

TotalChoice make_total_choice(const GroundProgram& program, const std::vector<lang::Atom>& atoms) {
  TotalChoice tc;
  tc.atoms.assign(program.choice_space().size(), 0);
  std::vector<bool> filled(program.choice_space().size(), false);
  for (const auto& a : atoms) {
    auto id = program.find(a);
    if (!id) throw GroundingError("'" + lang::render_atom(a) + "' is not a ground atom of the theory");
    auto pos = program.choice_position(*id);
    if (!pos) throw GroundingError("'" + lang::render_atom(a) + "' is not an atomic choice");
    if (filled[pos->first]) {
      throw GroundingError("not a total choice: alternative " + std::to_string(pos->first) +
                           " selected twice");
    }
    filled[pos->first] = true;
    tc.atoms[pos->first] = *id;
  }
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) {
      throw GroundingError("not a total choice: alternative " + std::to_string(i) + " not selected");
    }
  }
  return tc;
}

std::vector<TotalChoice> all_total_choices(const GroundProgram& program) {
  std::vector<TotalChoice> out;
  const auto& cs = program.choice_space();
  std::vector<std::size_t> idx(cs.size(), 0);
  for (;;) {
    TotalChoice tc;
    for (std::size_t i = 0; i < cs.size(); ++i) tc.atoms.push_back(cs[i][idx[i]]);
    out.push_back(std::move(tc));
    std::size_t k = cs.size();
    for (;;) {
      if (k == 0) return out;
      --k;
      if (++idx[k] < cs[k].size()) break;
      idx[k] = 0;
    }
  }
}

World answer_set(const GroundProgram& program, const TotalChoice& choice) {
  const Acyclicity acyc = check_acyclic(program);
  if (!acyc.acyclic) throw GroundingError("answer sets are defined for acyclic programs only");
  if (choice.atoms.size() != program.choice_space().size()) {
    throw GroundingError("not a total choice");
  }
  World w(program.size());
  for (std::size_t i = 0; i < choice.atoms.size(); ++i) {
    const AtomId a = choice.atoms[i];
    auto pos = program.choice_position(a);
    if (!pos || pos->first != i) throw GroundingError("not a total choice");
    if (!program.clauses_with_head(a).empty()) {
      throw GroundingError("atomic choice '" + program.atom(a).text + "' heads a clause");
    }
    w.set(a, true);
  }
  for (AtomId p : acyc.order) {
    if (w.contains(p)) continue;
    for (std::size_t ci : program.clauses_with_head(p)) {
      if (world_satisfies(w, program.clauses()[ci].body)) {
        w.set(p, true);
        break;
      }
    }
  }
  return w;
}

bool world_satisfies(const World& world, const GroundFormula& f) {
  switch (f.kind) {
    case GroundFormula::Kind::False:
      return false;
    case GroundFormula::Kind::True:
      return true;
    case GroundFormula::Kind::Atom:
      return world.contains(f.atom);
    case GroundFormula::Kind::Not:
      return !world_satisfies(world, f.children[0]);
    case GroundFormula::Kind::And:
      return std::all_of(f.children.begin(), f.children.end(),
                         [&](const GroundFormula& c) { return world_satisfies(world, c); });
  }
  return false;
}

bool world_satisfies(const GroundProgram& program, const World& world, const lang::Formula& f) {
  return world_satisfies(world, program.ground(f));
}

std::string render_ground_program(const GroundProgram& program) {
  std::ostringstream os;
  os << "% " << program.size() << " ground atoms, " << program.clauses().size()
     << " ground clauses, horizon " << program.horizon() << "\n";
  for (const auto& alt : program.choice_space()) {
    os << "choice { ";
    for (std::size_t i = 0; i < alt.size(); ++i) os << (i ? ", " : "") << program.atom(alt[i]).text;
    os << " }.\n";
  }
  for (const auto& c : program.clauses()) {
    os << program.atom(c.head).text;
    if (c.body.kind != GroundFormula::Kind::True) {
      os << " <= ";
      render_ground(program, c.body, os, false);
    }
    os << ".\n";
  }
  return os.str();
}

}  // namespace icl::ground
