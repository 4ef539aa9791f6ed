#include <algorithm>
#include <cctype>
#include <sstream>

#include "icl/lang.h"

namespace icl::lang {

ParseError::ParseError(const std::string& message, SourceLocation location)
    : std::runtime_error(location.line > 0
                             ? std::to_string(location.line) + ":" + std::to_string(location.column) +
                                   ": " + message
                             : message),
      message_(message),
      location_(location) {}

Term Term::variable(std::string name) { return Term{Kind::Variable, std::move(name), {}}; }
Term Term::constant(std::string name) { return Term{Kind::Apply, std::move(name), {}}; }
Term Term::apply(std::string name, std::vector<Term> args) {
  return Term{Kind::Apply, std::move(name), std::move(args)};
}

bool Term::is_ground() const {
  if (kind == Kind::Variable) return false;
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
}

bool Atom::is_ground() const {
  return time.is_ground() &&
         std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
}

Formula Formula::truth(bool value) {
  Formula f;
  f.kind = value ? Kind::True : Kind::False;
  return f;
}

Formula Formula::of(lang::Atom a) {
  Formula f;
  f.kind = Kind::Atom;
  f.atom = std::move(a);
  return f;
}

Formula Formula::negation(Formula inner) {
  Formula f;
  f.kind = Kind::Not;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::conjunction(std::vector<Formula> fs) {
  if (fs.empty()) return truth(true);
  if (fs.size() == 1) return std::move(fs.front());
  Formula f;
  f.kind = Kind::And;
  f.children = std::move(fs);
  return f;
}

Formula Formula::disjunction(Formula a, Formula b) {
  std::vector<Formula> parts;
  parts.push_back(negation(std::move(a)));
  parts.push_back(negation(std::move(b)));
  return negation(conjunction(std::move(parts)));
}

Formula Formula::implication(Formula a, Formula b) {
  std::vector<Formula> parts;
  parts.push_back(negation(std::move(a)));
  parts.push_back(std::move(b));
  return negation(conjunction(std::move(parts)));
}

Formula Formula::distinct(Term a, Term b) {
  Formula f;
  f.kind = Kind::Distinct;
  f.terms = {std::move(a), std::move(b)};
  return f;
}

const SortDecl* Vocabulary::find_sort(std::string_view name) const {
  for (const auto& s : sorts) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const FunctionDecl* Vocabulary::find_function(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const ActionDecl* Vocabulary::find_action(std::string_view name) const {
  for (const auto& a : actions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const PredicateDecl* Vocabulary::find_predicate(std::string_view name) const {
  for (const auto& p : predicates) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

bool Vocabulary::is_constant(std::string_view name) const {
  for (const auto& s : sorts) {
    if (std::find(s.members.begin(), s.members.end(), name) != s.members.end()) return true;
  }
  return false;
}

bool IclTheory::probabilistic() const {
  if (choice_space.empty()) return false;
  for (const auto& alt : choice_space) {
    for (const auto& c : alt.choices) {
      if (!c.probability) return false;
    }
  }
  return true;
}

Rational IclTheory::probability(std::size_t alternative, std::size_t choice) const {
  const auto& p = choice_space.at(alternative).choices.at(choice).probability;
  if (!p) throw std::logic_error("theory has no probabilities");
  return parse_rational(*p);
}

std::string_view to_string(CauseMode mode) { return mode == CauseMode::Weak ? "weak" : "actual"; }

std::string_view to_string(ExecMode mode) {
  return mode == ExecMode::Fixed ? "fixed" : "overridable";
}

const QueryCommon& common(const Query& q) {
  return std::visit([](const auto& v) -> const QueryCommon& { return v; }, q);
}

bool is_conjunction_of_atoms(const Formula& f) {
  if (f.kind == Formula::Kind::Atom) return true;
  if (f.kind != Formula::Kind::And) return false;
  return std::all_of(f.children.begin(), f.children.end(), is_conjunction_of_atoms);
}

void collect_atoms(const Formula& f, std::vector<const Atom*>& out) {
  if (f.kind == Formula::Kind::Atom) out.push_back(&f.atom);
  for (const auto& c : f.children) collect_atoms(c, out);
}

bool is_core_formula(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::False:
    case Formula::Kind::True:
    case Formula::Kind::Atom:
    case Formula::Kind::Distinct:
      return f.children.empty();
    case Formula::Kind::Not:
      return f.children.size() == 1 && is_core_formula(f.children[0]);
    case Formula::Kind::And:
      return f.children.size() >= 2 &&
             std::all_of(f.children.begin(), f.children.end(), is_core_formula);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

const char* const kKeywords[] = {"sort",  "func",  "depth", "action", "pred",
                                 "choice", "exec", "horizon", "true", "false"};

bool is_plain_symbol(std::string_view name) {
  if (name.empty() || !std::islower(static_cast<unsigned char>(name[0]))) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return std::none_of(std::begin(kKeywords), std::end(kKeywords),
                      [&](const char* k) { return name == k; });
}

bool is_or_pattern(const Formula& f) {
  return f.kind == Formula::Kind::Not && f.children[0].kind == Formula::Kind::And &&
         f.children[0].children.size() == 2 &&
         f.children[0].children[0].kind == Formula::Kind::Not &&
         f.children[0].children[1].kind == Formula::Kind::Not;
}

int level(const Formula& f) {
  if (is_or_pattern(f)) return 1;
  if (f.kind == Formula::Kind::And) return 2;
  return 3;
}

void render(const Formula& f, int min_level, std::ostream& os) {
  const bool parens = level(f) < min_level;
  if (parens) os << '(';
  if (is_or_pattern(f)) {
    const auto& conj = f.children[0].children;
    render(conj[0].children[0], 1, os);
    os << " | ";
    render(conj[1].children[0], 2, os);
  } else {
    switch (f.kind) {
      case Formula::Kind::False:
        os << "false";
        break;
      case Formula::Kind::True:
        os << "true";
        break;
      case Formula::Kind::Atom:
        os << render_atom(f.atom);
        break;
      case Formula::Kind::Not:
        os << '~';
        render(f.children[0], 3, os);
        break;
      case Formula::Kind::And:
        for (std::size_t i = 0; i < f.children.size(); ++i) {
          if (i) os << " & ";
          render(f.children[i], 3, os);
        }
        break;
      case Formula::Kind::Distinct:
        os << render_term(f.terms[0]) << " \\= " << render_term(f.terms[1]);
        break;
    }
  }
  if (parens) os << ')';
}

std::string join_sorts(const std::vector<std::string>& sorts) {
  std::string out;
  for (std::size_t i = 0; i < sorts.size(); ++i) {
    if (i) out += ", ";
    out += render_symbol(sorts[i]);
  }
  return out;
}

}  // namespace

std::string render_symbol(std::string_view name) {
  if (is_plain_symbol(name)) return std::string(name);
  std::string out = "'";
  for (char c : name) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string render_term(const Term& term) {
  if (term.kind == Term::Kind::Variable) return term.name;
  std::string out = render_symbol(term.name);
  if (!term.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < term.args.size(); ++i) {
      if (i) out += ", ";
      out += render_term(term.args[i]);
    }
    out += ')';
  }
  return out;
}

std::string render_time(const TimeTerm& time) {
  if (time.variable.empty()) return std::to_string(time.offset);
  if (time.offset == 0) return time.variable;
  return time.variable + "+" + std::to_string(time.offset);
}

std::string render_atom(const Atom& atom) {
  std::string out = atom.is_action() ? std::string(kDoPredicate) : render_symbol(atom.predicate);
  out += '(';
  for (const auto& a : atom.args) {
    out += render_term(a);
    out += ", ";
  }
  out += render_time(atom.time);
  out += ')';
  return out;
}

std::string render_formula(const Formula& formula) {
  std::ostringstream os;
  render(formula, 0, os);
  return os.str();
}

std::string render_theory(const IclTheory& theory) {
  std::ostringstream os;
  const auto& voc = theory.vocabulary;
  for (const auto& s : voc.sorts) {
    os << "sort " << render_symbol(s.name) << " = {" << join_sorts(s.members) << "}.\n";
  }
  for (const auto& f : voc.functions) {
    os << "func " << render_symbol(f.name) << '(' << join_sorts(f.arg_sorts)
       << ") : " << render_symbol(f.result_sort) << ".\n";
  }
  if (voc.function_depth != 0) os << "depth " << voc.function_depth << ".\n";
  for (const auto& a : voc.actions) {
    os << "action " << render_symbol(a.name);
    if (!a.arg_sorts.empty()) os << '(' << join_sorts(a.arg_sorts) << ')';
    os << ".\n";
  }
  for (const auto& p : voc.predicates) {
    os << "pred " << render_symbol(p.name);
    if (!p.arg_sorts.empty()) os << '(' << join_sorts(p.arg_sorts) << ')';
    os << ".\n";
  }
  if (!theory.choice_space.empty()) os << '\n';
  for (const auto& alt : theory.choice_space) {
    os << "choice { ";
    for (std::size_t i = 0; i < alt.choices.size(); ++i) {
      if (i) os << ", ";
      os << render_atom(alt.choices[i].atom);
      if (alt.choices[i].probability) os << " : " << *alt.choices[i].probability;
    }
    os << " }.\n";
  }
  if (!theory.program.empty()) os << '\n';
  for (const auto& c : theory.program) {
    os << render_atom(c.head);
    if (c.body.kind != Formula::Kind::True) {
      os << " <= ";
      render(c.body, 0, os);
    }
    os << ".\n";
  }
  if (!theory.executions.empty()) os << '\n';
  for (const auto& e : theory.executions) os << "exec " << render_atom(e) << ".\n";
  os << "\nhorizon " << theory.horizon << ".\n";
  return os.str();
}

}  // namespace icl::lang
