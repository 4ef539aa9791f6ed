#include <gtest/gtest.h>

#include "icl/compile.h"
#include "support.h"

namespace icl::compile {
namespace {

using lang::Atom;
using lang::Term;

lang::IclTheory fixture(const char* name) { return lang::parse_theory(testing::read_fixture(name)); }

Atom ground_atom(const std::string& pred, std::vector<Term> args, int t) { return Atom{pred, std::move(args), {"", t}}; }

TEST(Forward, MobileRobotVariables) {
  const auto ct = compile_picl(fixture("mobile_robot.icl"));
  const auto& m = ct.model;
  ASSERT_EQ(m.exogenous().size(), 2u);
  EXPECT_EQ(m.exogenous()[0].name, "U0");
  EXPECT_EQ(m.exogenous()[0].domain,
            (std::vector<std::string>{"fa(pickUp(o1), 0)", "su(pickUp(o1), 0)"}));
  for (const char* v : {"carrying(o1, 0)", "at(r1, p1, 1)", "do(moveTo(p1), 0)", "do(pickUp(o1), 1)"}) {
    EXPECT_TRUE(m.find_endogenous(v).has_value()) << v;
  }
  EXPECT_FALSE(m.find_endogenous("su(pickUp(o1), 0)").has_value());
  EXPECT_FALSE(m.find_endogenous("su(pickUp(o1), 1)").has_value());
  ASSERT_TRUE(ct.distribution.has_value());
  EXPECT_EQ(ct.distribution->probability({0, 0}), Rational(9, 100));
  EXPECT_EQ(m.endogenous_ids().size(), ct.program.size() - 4);
}

// F_at(r1,p1,1) = do(moveTo(p1),0) | (at(r1,p1,0) & ~do(moveTo(p2),0)).
TEST(Forward, MobileRobotMechanism) {
  const auto ct = compile_picl(fixture("mobile_robot.icl"));
  const auto& m = ct.model;
  const auto head = *m.find_endogenous("at(r1, p1, 1)");
  const auto move1 = *m.find_endogenous("do(moveTo(p1), 0)");
  const auto move2 = *m.find_endogenous("do(moveTo(p2), 0)");
  const auto at0 = *m.find_endogenous("at(r1, p1, 0)");
  std::vector<scm::Value> values(m.variables().size(), 0);
  for (int bits = 0; bits < 8; ++bits) {
    values[move1] = bits & 1;
    values[at0] = (bits >> 1) & 1;
    values[move2] = (bits >> 2) & 1;
    const bool want = (bits & 1) || (((bits >> 1) & 1) && !((bits >> 2) & 1));
    EXPECT_EQ(m.apply(head, {0, 0}, values), want ? 1 : 0) << bits;
  }
}

TEST(Forward, WorldMatchesAnswerSet) {
  const auto t = fixture("two_objects.icl");
  const auto ct = compile_picl(t);
  for (const auto& b : ground::all_total_choices(ct.program)) {
    const auto w = ground::answer_set(ct.program, b);
    const auto values = ct.model.solve(context_of_choice(ct, b));
    for (ground::AtomId a = 0; a < ct.program.size(); ++a) {
      const auto v = ct.variable(a);
      if (v) {
        ASSERT_EQ(values[*v] == 1, w.contains(a)) << ct.program.atom(a).text;
      }
    }
  }
}

// Against a hand-grounded reference, independent of the grounder.
TEST(Forward, RandomTheoriesMatchReference) {
  std::mt19937 rng(21);
  for (int i = 0; i < 100; ++i) {
    const auto pt = testing::random_theory(rng, i % 2 == 0);
    const auto ct = compile_picl(lang::parse_theory(pt.source()));
    const auto contexts = ct.model.all_contexts();
    for (const auto& u : contexts) {
      std::vector<int> choice(u.begin(), u.end());  // domain order is a, b
      const auto want = pt.world(choice);
      const auto values = ct.model.solve(u);
      for (scm::VarId v : ct.model.endogenous_ids()) {
        ASSERT_EQ(values[v] == 1, want.count(ct.model.variable(v).name) > 0)
            << ct.model.variable(v).name << "\n" << pt.source();
      }
    }
  }
}

TEST(Forward, TableCapFallsBackToRules) {
  CompileOptions small;
  small.table_cap = 2;
  const auto ct = compile_picl(fixture("mobile_robot.icl"), small);
  const auto full = compile_picl(fixture("mobile_robot.icl"));
  for (const auto& u : full.model.all_contexts()) EXPECT_EQ(ct.model.solve(u), full.model.solve(u));
}

TEST(Forward, CyclicTheoryRejected) { EXPECT_THROW(compile_picl(fixture("cyclic.icl")), CompileError); }

TEST(Execution, FixedAndOverridable) {
  const auto t = fixture("waiting_collector.icl");
  const auto fixed = compile_with_execution(t, std::nullopt, lang::ExecMode::Fixed);
  const auto wait = *fixed.model.find_endogenous("do(wait, 0)");
  EXPECT_FALSE(fixed.model.in_v(wait));
  EXPECT_EQ(*fixed.model.fixed_value(wait), 1);
  const auto over = compile_with_execution(t, std::nullopt, lang::ExecMode::Overridable);
  const auto wait2 = *over.model.find_endogenous("do(wait, 0)");
  EXPECT_TRUE(over.model.in_v(wait2));
  EXPECT_TRUE(over.model.mechanism(wait2).parents.empty());
  const auto u = context_of_choice(over, std::vector<Atom>{ground_atom("su", {Term::constant("pickUp")}, 0),
                                                           ground_atom("fa", {Term::constant("pickUp")}, 1)});
  EXPECT_EQ(over.model.solve(u)[wait2], 1);
  EXPECT_THROW(apply_execution(fixed, {ground_atom("do", {Term::constant("pickUp")}, 0)},
                               lang::ExecMode::Overridable),
               CompileError);
  EXPECT_THROW(apply_execution(fixed, {ground_atom("do", {Term::constant("pickUp")}, 5)}, lang::ExecMode::Fixed),
               CompileError);
}

TEST(Execution, DomainErrors) {
  const auto ct = compile_with_execution(fixture("waiting_collector.icl"), std::nullopt, lang::ExecMode::Fixed);
  const auto su = ct.program.find("su(pickUp, 0)");
  ASSERT_TRUE(su.has_value());
  EXPECT_THROW(to_assignment(ct, {*su}), DomainError);
  EXPECT_THROW(to_assignment(ct, {*ct.program.find("do(wait, 0)")}), DomainError);
  EXPECT_NO_THROW(to_assignment(ct, {*ct.program.find("carrying(1)")}));
}

TEST(Reverse, StoppingRobotClauses) {
  const auto doc = scm::read_model_json(testing::read_fixture("stopping_robot.json"));
  const auto t = reverse_compile(doc.model, doc.distribution);
  const auto ct = compile_picl(lang::parse_theory(lang::render_theory(t)));
  // Same true-point sets as CS <= Us=1, B1 <= CS, B2 <= CS, S <= B1 | B2.
  const auto& m = ct.model;
  const auto cs = *m.find_endogenous("'CS'(0)");
  const auto b1 = *m.find_endogenous("'B1'(0)");
  const auto b2 = *m.find_endogenous("'B2'(0)");
  const auto s = *m.find_endogenous("'S'(0)");
  for (int bits = 0; bits < 16; ++bits) {
    std::vector<scm::Value> v(m.variables().size(), 0);
    v[cs] = bits & 1;
    v[b1] = (bits >> 1) & 1;
    v[b2] = (bits >> 2) & 1;
    const scm::Context u{static_cast<scm::Value>((bits >> 3) & 1)};
    EXPECT_EQ(m.apply(cs, u, v), u[0]);
    EXPECT_EQ(m.apply(b1, u, v), v[cs]);
    EXPECT_EQ(m.apply(b2, u, v), v[cs]);
    EXPECT_EQ(m.apply(s, u, v), v[b1] | v[b2]);
  }
  EXPECT_EQ(ct.distribution->probability({1}), Rational(7, 10));
  EXPECT_EQ(ct.model.exogenous()[0].domain[1], "u('Us', '1', 0)");
}

TEST(Reverse, RejectsNonBinaryAndReservedNames) {
  std::vector<scm::Variable> u{{"U", {"0", "1"}}};
  scm::Mechanism m{{scm::VarRef{true, 0}}, std::vector<scm::Value>{0, 2}, {}};
  const auto ternary = scm::CausalModel::create(u, {{"X", {"0", "1", "2"}}}, {m});
  EXPECT_THROW(reverse_compile(ternary, std::nullopt), CompileError);
  scm::Mechanism id{{scm::VarRef{true, 0}}, std::vector<scm::Value>{0, 1}, {}};
  const auto reserved = scm::CausalModel::create(u, {{"u", {"0", "1"}}}, {id});
  EXPECT_THROW(reverse_compile(reserved, std::nullopt), CompileError);
}

TEST(Reverse, JointMustFactorise) {
  std::vector<scm::Variable> u{{"A", {"0", "1"}}, {"B", {"0", "1"}}};
  scm::Mechanism id{{scm::VarRef{true, 0}}, std::vector<scm::Value>{0, 1}, {}};
  const auto model = scm::CausalModel::create(u, {{"X", {"0", "1"}}}, {id});
  scm::Distribution corr;
  corr.kind = scm::Distribution::Kind::Joint;
  corr.joint = {{{0, 0}, Rational(1, 2)}, {{1, 1}, Rational(1, 2)}};
  EXPECT_THROW(reverse_compile(model, corr), CompileError);
  scm::Distribution indep;
  indep.kind = scm::Distribution::Kind::Joint;
  indep.joint = {{{0, 0}, Rational(1, 4)}, {{0, 1}, Rational(1, 4)}, {{1, 0}, Rational(1, 4)}, {{1, 1}, Rational(1, 4)}};
  EXPECT_NO_THROW(reverse_compile(model, indep));
}

}  // namespace
}  // namespace icl::compile
