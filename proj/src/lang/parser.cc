#include <cctype>
#include <optional>

#include "icl/lang.h"
#include "lang/internal.h"

namespace icl::lang {

namespace {

enum class Tok {
  Symbol,    // lowercase identifier or quoted name
  Variable,  // uppercase identifier
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Dot,
  Colon,
  Amp,
  Bar,
  Tilde,
  Plus,
  Slash,
  Equals,
  Arrow,     // <=
  NotEqual,  // \=
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  bool quoted = false;
  SourceLocation loc;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::islower(static_cast<unsigned char>(c))) {
        t.kind = Tok::Symbol;
        t.text = ident();
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Variable;
        t.text = ident();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Number;
        t.text = number();
      } else if (c == '\'') {
        t.kind = Tok::Symbol;
        t.quoted = true;
        t.text = quoted();
      } else {
        t.kind = punct(t.loc);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string ident() {
    std::string s;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      s += src_[pos_];
      advance();
    }
    return s;
  }

  std::string number() {
    std::string s;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      s += src_[pos_];
      advance();
    }
    // A dot is part of the number only when a digit follows it, so that
    // `horizon 2.` still ends the statement.
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      s += '.';
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        s += src_[pos_];
        advance();
      }
    }
    return s;
  }

  std::string quoted() {
    const SourceLocation start{line_, col_};
    advance();
    std::string s;
    for (;;) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw ParseError("unterminated quoted name", start);
      }
      char c = src_[pos_];
      if (c == '\'') {
        advance();
        break;
      }
      if (c == '\\' && pos_ + 1 < src_.size()) {
        advance();
        c = src_[pos_];
      }
      s += c;
      advance();
    }
    if (s.empty()) throw ParseError("empty quoted name", start);
    return s;
  }

  Tok punct(SourceLocation loc) {
    const char c = src_[pos_];
    const char next = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    auto one = [&](Tok k) {
      advance();
      return k;
    };
    switch (c) {
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case '{': return one(Tok::LBrace);
      case '}': return one(Tok::RBrace);
      case ',': return one(Tok::Comma);
      case '.': return one(Tok::Dot);
      case ':': return one(Tok::Colon);
      case '&': return one(Tok::Amp);
      case '|': return one(Tok::Bar);
      case '~': return one(Tok::Tilde);
      case '+': return one(Tok::Plus);
      case '/': return one(Tok::Slash);
      case '=': return one(Tok::Equals);
      case '<':
        if (next == '=') {
          advance();
          return one(Tok::Arrow);
        }
        break;
      case '\\':
        if (next == '=') {
          advance();
          return one(Tok::NotEqual);
        }
        break;
      default:
        break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", loc);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Argument before its sort is known: an object/action term or a time term.
struct RawTerm {
  enum class Kind { Variable, Apply, Numeral };
  Kind kind = Kind::Apply;
  std::string name;
  std::vector<RawTerm> args;
  int offset = 0;
  bool has_offset = false;
  SourceLocation loc;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == Tok::Symbol && !peek().quoted && peek().text == kw;
  }
  const Token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  const Token& expect(Tok k, std::string_view what) {
    if (!at(k)) fail(std::string("expected ") + std::string(what));
    return take();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    if (t.kind != Tok::End && t.text.empty()) found = "punctuation";
    throw ParseError(msg + ", found " + found, t.loc);
  }

  int parse_int(std::string_view what) {
    const Token& t = expect(Tok::Number, what);
    if (t.text.find('.') != std::string::npos) {
      throw ParseError(std::string("expected integer ") + std::string(what), t.loc);
    }
    return std::stoi(t.text);
  }

  std::string parse_symbol(std::string_view what) {
    return expect(Tok::Symbol, what).text;
  }

  // number ['/' number]
  std::string parse_probability() {
    std::string text = expect(Tok::Number, "probability").text;
    if (at(Tok::Slash)) {
      take();
      text += "/" + expect(Tok::Number, "denominator").text;
    }
    return text;
  }

  RawTerm parse_raw_term() {
    RawTerm t;
    t.loc = peek().loc;
    if (at(Tok::Variable)) {
      t.kind = RawTerm::Kind::Variable;
      t.name = take().text;
    } else if (at(Tok::Number)) {
      t.kind = RawTerm::Kind::Numeral;
      t.offset = parse_int("numeral");
    } else if (at(Tok::Symbol)) {
      t.kind = RawTerm::Kind::Apply;
      t.name = take().text;
      if (at(Tok::LParen)) {
        take();
        if (!at(Tok::RParen)) {
          t.args.push_back(parse_raw_term());
          while (at(Tok::Comma)) {
            take();
            t.args.push_back(parse_raw_term());
          }
        }
        expect(Tok::RParen, "')'");
      }
      return t;
    } else {
      fail("expected term");
    }
    while (at(Tok::Plus)) {
      take();
      t.offset += parse_int("time offset");
      t.has_offset = true;
    }
    return t;
  }

  static Term to_term(const RawTerm& raw) {
    switch (raw.kind) {
      case RawTerm::Kind::Variable:
        if (raw.has_offset) throw ParseError("time term in object or action position", raw.loc);
        return Term::variable(raw.name);
      case RawTerm::Kind::Numeral:
        throw ParseError("numeral in object or action position (quote it as a name)", raw.loc);
      case RawTerm::Kind::Apply: {
        std::vector<Term> args;
        for (const auto& a : raw.args) args.push_back(to_term(a));
        return Term::apply(raw.name, std::move(args));
      }
    }
    return {};
  }

  static TimeTerm to_time(const RawTerm& raw) {
    switch (raw.kind) {
      case RawTerm::Kind::Variable:
        return TimeTerm{raw.name, raw.offset};
      case RawTerm::Kind::Numeral:
        return TimeTerm::at(raw.offset);
      case RawTerm::Kind::Apply:
        throw ParseError("expected time term as last argument of '" + raw.name + "'", raw.loc);
    }
    return {};
  }

  static Atom to_atom(const RawTerm& raw) {
    if (raw.kind != RawTerm::Kind::Apply) throw ParseError("expected atom", raw.loc);
    if (raw.args.empty()) {
      throw ParseError("atom '" + raw.name + "' lacks its time argument", raw.loc);
    }
    Atom a;
    a.predicate = raw.name;
    for (std::size_t i = 0; i + 1 < raw.args.size(); ++i) a.args.push_back(to_term(raw.args[i]));
    a.time = to_time(raw.args.back());
    return a;
  }

  Atom parse_atom() { return to_atom(parse_raw_term()); }

  // formula := disjunction ['<=' formula]
  Formula parse_formula() {
    Formula f = parse_disjunction();
    if (at(Tok::Arrow)) {
      take();
      f = Formula::implication(std::move(f), parse_formula());
    }
    return f;
  }

  Formula parse_disjunction() {
    Formula f = parse_conjunction();
    while (at(Tok::Bar)) {
      take();
      f = Formula::disjunction(std::move(f), parse_conjunction());
    }
    return f;
  }

  Formula parse_conjunction() {
    std::vector<Formula> parts;
    parts.push_back(parse_unary());
    while (at(Tok::Amp)) {
      take();
      parts.push_back(parse_unary());
    }
    return Formula::conjunction(std::move(parts));
  }

  Formula parse_unary() {
    if (at(Tok::Tilde)) {
      take();
      return Formula::negation(parse_unary());
    }
    if (at(Tok::LParen)) {
      take();
      Formula f = parse_formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at_keyword("true") && peek(1).kind != Tok::LParen) {
      take();
      return Formula::truth(true);
    }
    if (at_keyword("false") && peek(1).kind != Tok::LParen) {
      take();
      return Formula::truth(false);
    }
    RawTerm raw = parse_raw_term();
    if (at(Tok::NotEqual)) {
      take();
      RawTerm rhs = parse_raw_term();
      return Formula::distinct(to_term(raw), to_term(rhs));
    }
    return Formula::of(to_atom(raw));
  }

  void end_statement() { expect(Tok::Dot, "'.'"); }

  std::vector<std::string> parse_sort_list() {
    std::vector<std::string> sorts;
    if (!at(Tok::LParen)) return sorts;
    take();
    if (!at(Tok::RParen)) {
      sorts.push_back(parse_symbol("sort name"));
      while (at(Tok::Comma)) {
        take();
        sorts.push_back(parse_symbol("sort name"));
      }
    }
    expect(Tok::RParen, "')'");
    return sorts;
  }

  std::vector<Atom> parse_atom_set() {
    expect(Tok::LBrace, "'{'");
    std::vector<Atom> atoms;
    if (!at(Tok::RBrace)) {
      atoms.push_back(parse_atom());
      while (at(Tok::Comma)) {
        take();
        atoms.push_back(parse_atom());
      }
    }
    expect(Tok::RBrace, "'}'");
    return atoms;
  }

  TheoryWithLocations parse_theory() {
    TheoryWithLocations out;
    IclTheory& th = out.theory;
    bool seen_horizon = false;
    bool seen_depth = false;
    while (!at(Tok::End)) {
      const SourceLocation loc = peek().loc;
      if (at_keyword("sort")) {
        take();
        SortDecl s;
        s.name = parse_symbol("sort name");
        expect(Tok::Equals, "'='");
        expect(Tok::LBrace, "'{'");
        if (!at(Tok::RBrace)) {
          s.members.push_back(parse_symbol("constant"));
          while (at(Tok::Comma)) {
            take();
            s.members.push_back(parse_symbol("constant"));
          }
        }
        expect(Tok::RBrace, "'}'");
        end_statement();
        out.sort_locs.push_back(loc);
        th.vocabulary.sorts.push_back(std::move(s));
      } else if (at_keyword("func")) {
        take();
        FunctionDecl f;
        f.name = parse_symbol("function name");
        f.arg_sorts = parse_sort_list();
        expect(Tok::Colon, "':'");
        f.result_sort = parse_symbol("result sort");
        end_statement();
        out.function_locs.push_back(loc);
        th.vocabulary.functions.push_back(std::move(f));
      } else if (at_keyword("depth")) {
        take();
        if (seen_depth) throw ParseError("duplicate depth declaration", loc);
        seen_depth = true;
        th.vocabulary.function_depth = parse_int("nesting depth");
        end_statement();
      } else if (at_keyword("action")) {
        take();
        ActionDecl a;
        a.name = parse_symbol("action name");
        a.arg_sorts = parse_sort_list();
        end_statement();
        out.action_locs.push_back(loc);
        th.vocabulary.actions.push_back(std::move(a));
      } else if (at_keyword("pred")) {
        take();
        PredicateDecl p;
        p.name = parse_symbol("predicate name");
        p.arg_sorts = parse_sort_list();
        end_statement();
        out.predicate_locs.push_back(loc);
        th.vocabulary.predicates.push_back(std::move(p));
      } else if (at_keyword("choice")) {
        take();
        expect(Tok::LBrace, "'{'");
        Alternative alt;
        auto one = [&] {
          AtomicChoice c;
          c.atom = parse_atom();
          if (at(Tok::Colon)) {
            take();
            c.probability = parse_probability();
          }
          alt.choices.push_back(std::move(c));
        };
        if (!at(Tok::RBrace)) {
          one();
          while (at(Tok::Comma)) {
            take();
            one();
          }
        }
        expect(Tok::RBrace, "'}'");
        end_statement();
        out.choice_locs.push_back(loc);
        th.choice_space.push_back(std::move(alt));
      } else if (at_keyword("exec")) {
        take();
        th.executions.push_back(parse_atom());
        end_statement();
        out.exec_locs.push_back(loc);
      } else if (at_keyword("horizon")) {
        take();
        if (seen_horizon) throw ParseError("duplicate horizon declaration", loc);
        seen_horizon = true;
        th.horizon = parse_int("horizon");
        end_statement();
      } else {
        Clause c;
        c.head = parse_atom();
        if (at(Tok::Arrow)) {
          take();
          c.body = parse_formula();
        } else {
          c.body = Formula::truth(true);
        }
        end_statement();
        out.clause_locs.push_back(loc);
        th.program.push_back(std::move(c));
      }
    }
    return out;
  }

  QueryWithLocations parse_query() {
    QueryWithLocations out;
    auto once = [&](bool& seen, std::string_view what, SourceLocation loc) {
      if (seen) throw ParseError("duplicate " + std::string(what) + " statement", loc);
      seen = true;
    };
    bool seen_kind = false, seen_cause = false, seen_effect = false, seen_mode = false,
         seen_alpha = false;
    while (!at(Tok::End)) {
      const SourceLocation loc = peek().loc;
      if (at_keyword("query")) {
        take();
        once(seen_kind, "query", loc);
        out.kind = parse_symbol("query kind");
        out.kind_loc = loc;
      } else if (at_keyword("cause")) {
        take();
        once(seen_cause, "cause", loc);
        out.cause = parse_formula();
        out.cause_loc = loc;
      } else if (at_keyword("effect")) {
        take();
        once(seen_effect, "effect", loc);
        out.effect = parse_formula();
        out.effect_loc = loc;
      } else if (at_keyword("total")) {
        take();
        out.totals.push_back(parse_atom_set());
        out.total_locs.push_back(loc);
      } else if (at_keyword("exec")) {
        take();
        out.executions.push_back(parse_atom());
        out.exec_locs.push_back(loc);
      } else if (at_keyword("mode")) {
        take();
        once(seen_mode, "mode", loc);
        out.exec_mode = parse_symbol("execution mode");
        out.mode_loc = loc;
      } else if (at_keyword("alpha")) {
        take();
        once(seen_alpha, "alpha", loc);
        out.alpha = parse_probability();
        out.alpha_loc = loc;
      } else {
        fail("expected query statement (query, cause, effect, total, exec, mode, alpha)");
      }
      end_statement();
    }
    return out;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

TheoryWithLocations parse_theory_raw(std::string_view source) {
  return Parser(source).parse_theory();
}

QueryWithLocations parse_query_raw(std::string_view source) {
  return Parser(source).parse_query();
}

}  // namespace icl::lang
