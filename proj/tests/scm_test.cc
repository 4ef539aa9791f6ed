#include <gtest/gtest.h>

#include "icl/scm.h"
#include "support.h"

namespace icl::scm {
namespace {

ModelDocument stopping_robot() { return read_model_json(testing::read_fixture("stopping_robot.json")); }

VarId id(const CausalModel& m, const char* name) { return *m.find_endogenous(name); }

TEST(Model, StoppingRobot) {
  const auto doc = stopping_robot();
  const auto& m = doc.model;
  const auto v = evaluate(m, {1}, {id(m, "CS"), id(m, "B1"), id(m, "B2"), id(m, "S")});
  EXPECT_EQ(v, (std::vector<Value>{1, 1, 1, 1}));
  const auto sub = m.submodel({{id(m, "B2"), 0}});
  EXPECT_FALSE(sub.in_v(id(m, "B2")));
  EXPECT_EQ(evaluate(sub, {1}, {id(m, "S")}), std::vector<Value>{1});
  EXPECT_EQ(evaluate(m, {0}, {id(m, "S")}), std::vector<Value>{0});
}

TEST(Model, RejectsEvaluationOfRemovedVariables) {
  const auto& m = stopping_robot().model;
  const auto sub = m.submodel({{id(m, "B2"), 0}});
  EXPECT_THROW(evaluate(sub, {1}, {id(m, "B2")}), ModelError);
  EXPECT_THROW(sub.submodel({{id(m, "B2"), 1}}), ModelError);
  EXPECT_THROW(m.submodel({{id(m, "B2"), 2}}), ModelError);
  EXPECT_THROW(m.check_context({2}), ModelError);
}

TEST(Model, CreateValidates) {
  std::vector<Variable> u{{"U", {"0", "1"}}};
  Mechanism self;
  self.parents = {VarRef{false, 0}};
  self.table = std::vector<Value>{0, 1};
  EXPECT_THROW(CausalModel::create(u, {{"X", {"0", "1"}}}, {self}), ModelError);
  Mechanism bad_value;
  bad_value.parents = {VarRef{true, 0}};
  bad_value.table = std::vector<Value>{0, 2};
  EXPECT_THROW(CausalModel::create(u, {{"X", {"0", "1"}}}, {bad_value}), ModelError);
  EXPECT_THROW(CausalModel::create(u, {{"U", {"0"}}}, {Mechanism{{}, std::vector<Value>{0}, {}}}), ModelError);
  EXPECT_THROW(CausalModel::create(u, {{"X", {"a", "a"}}}, {Mechanism{{}, std::vector<Value>{0}, {}}}), ModelError);
}

TEST(Model, CyclesAreReported) {
  std::vector<Variable> endo{{"A", {"0", "1"}}, {"B", {"0", "1"}}};
  Mechanism a{{VarRef{false, 1}}, std::vector<Value>{0, 1}, {}};
  Mechanism b{{VarRef{false, 0}}, std::vector<Value>{1, 0}, {}};
  const auto m = CausalModel::create({}, endo, {a, b});
  EXPECT_FALSE(m.recursive());
  EXPECT_EQ(m.recursion().cycle.front(), m.recursion().cycle.back());
  EXPECT_THROW(m.solve({}), ModelError);
  // Intervening on one of them breaks the cycle.
  const auto sub = m.submodel({{0, 1}});
  EXPECT_TRUE(check_recursive(sub).recursive);
  EXPECT_EQ(evaluate(sub, {}, {1}), std::vector<Value>{0});
}

TEST(Model, RulesAgreeWithTables) {
  // S = B1 | B2 written as rules and as a table.
  std::vector<Variable> endo{{"B1", {"0", "1"}}, {"B2", {"0", "1"}}, {"S", {"0", "1"}}};
  std::vector<Variable> u{{"U1", {"0", "1"}}, {"U2", {"0", "1"}}};
  Mechanism b1{{VarRef{true, 0}}, std::vector<Value>{0, 1}, {}};
  Mechanism b2{{VarRef{true, 1}}, std::vector<Value>{0, 1}, {}};
  Mechanism by_rules{{VarRef{false, 0}, VarRef{false, 1}}, std::nullopt,
                     std::vector<Expr>{Expr::is({false, 0}, 1), Expr::is({false, 1}, 1)}};
  Mechanism by_table{{VarRef{false, 0}, VarRef{false, 1}}, std::vector<Value>{0, 1, 1, 1}, {}};
  const auto mr = CausalModel::create(u, endo, {b1, b2, by_rules});
  const auto mt = CausalModel::create(u, endo, {b1, b2, by_table});
  for (const auto& ctx : mr.all_contexts()) EXPECT_EQ(mr.solve(ctx), mt.solve(ctx));
}

TEST(Model, SolveMatchesReferenceOnRandomModels) {
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto pm = testing::random_model(rng, 6, 2, false);
    const auto m = pm.to_model();
    for (const auto& u : pm.contexts()) {
      const auto want = pm.solve(u);
      const auto got = m.solve(testing::to_context(u));
      ASSERT_EQ(std::vector<int>(got.begin(), got.end()), want);
    }
  }
}

// (M_{X=x})_{Y=y} = M_{X=x, Y=y} for disjoint X and Y.
TEST(Model, SubmodelsCompose) {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto pm = testing::random_model(rng, 6, 2, false);
    const auto m = pm.to_model();
    const int n = static_cast<int>(pm.endo_sizes.size());
    std::vector<std::pair<VarId, Value>> xs, ys;
    for (int v = 0; v < n; ++v) {
      const int r = std::uniform_int_distribution<int>(0, 2)(rng);
      const Value val = static_cast<Value>(std::uniform_int_distribution<int>(0, pm.endo_sizes[v] - 1)(rng));
      if (r == 1) xs.emplace_back(v, val);
      if (r == 2) ys.emplace_back(v, val);
    }
    auto both = xs;
    both.insert(both.end(), ys.begin(), ys.end());
    const auto nested = m.submodel(xs).submodel(ys);
    const auto flat = m.submodel(both);
    std::vector<int> ov(n, -1);
    for (const auto& [v, val] : both) ov[v] = val;
    for (const auto& u : pm.contexts()) {
      const auto a = nested.solve(testing::to_context(u));
      ASSERT_EQ(a, flat.solve(testing::to_context(u)));
      ASSERT_EQ(std::vector<int>(a.begin(), a.end()), pm.solve(u, ov));
    }
  }
}

TEST(Events, EvaluateAndCheck) {
  const auto& m = stopping_robot().model;
  const Expr s = Expr::is({false, id(m, "S")}, 1);
  EXPECT_TRUE(event_truth(m, {1}, s));
  EXPECT_FALSE(event_truth(m, {0}, s));
  EXPECT_TRUE(event_truth(m, {0}, Expr::negation(s)));
  EXPECT_THROW(check_event(m, Expr::is({true, 0}, 1)), ModelError);
  EXPECT_THROW(check_event(m, Expr::is({false, id(m, "S")}, 2)), ModelError);
  EXPECT_THROW(check_event(m.submodel({{id(m, "S"), 1}}), s), ModelError);
  EXPECT_EQ(render_expr(m, Expr::negation(s)), "~(S = 1)");
}

TEST(Distribution, ProductAndJoint) {
  const auto doc = stopping_robot();
  ASSERT_TRUE(doc.distribution.has_value());
  ProbCausalModel pm{doc.model, *doc.distribution};
  EXPECT_EQ(doc.distribution->probability({1}), Rational(7, 10));
  EXPECT_EQ(context_probability(pm, [&](const Context& u) { return event_truth(pm.model, u, Expr::is({false, id(pm.model, "S")}, 1)); }),
            Rational(7, 10));
  Distribution bad;
  bad.marginals = {{Rational(1, 2), Rational(1, 3)}};
  EXPECT_THROW(check_distribution(doc.model, bad), ModelError);
  Distribution joint;
  joint.kind = Distribution::Kind::Joint;
  joint.joint = {{{0}, Rational(1, 4)}, {{1}, Rational(3, 4)}};
  EXPECT_NO_THROW(check_distribution(doc.model, joint));
  EXPECT_EQ(joint.probability({1}), Rational(3, 4));
}

TEST(Json, RoundTrip) {
  const auto doc = stopping_robot();
  const auto text = write_model_json(doc.model, doc.distribution);
  const auto again = read_model_json(text);
  EXPECT_EQ(write_model_json(again.model, again.distribution), text);
  for (const auto& u : doc.model.all_contexts()) EXPECT_EQ(doc.model.solve(u), again.model.solve(u));
}

TEST(Json, RandomRoundTrip) {
  std::mt19937 rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto pm = testing::random_model(rng, 5, 2, false);
    const auto m = pm.to_model();
    const auto again = read_model_json(write_model_json(m)).model;
    for (const auto& u : m.all_contexts()) ASSERT_EQ(m.solve(u), again.solve(u));
  }
}

TEST(Json, SubmodelKeepsOnlyV) {
  const auto& m = stopping_robot().model;
  const auto sub = m.submodel({{id(m, "B2"), 0}});
  const auto again = read_model_json(write_model_json(sub)).model;
  EXPECT_FALSE(again.find_endogenous("B2").has_value());
  EXPECT_EQ(evaluate(again, {1}, {*again.find_endogenous("S")}), std::vector<Value>{1});
}

TEST(Json, RejectsMalformed) {
  EXPECT_THROW(read_model_json("{"), ModelError);
  EXPECT_THROW(read_model_json(R"({"exogenous": [], "endogenous": [], "extra": 1})"), ModelError);
  EXPECT_THROW(read_model_json(R"({"exogenous": [], "endogenous": [{"name": "X", "domain": ["0","1"],
      "parents": ["Y"], "table": []}]})"),
               ModelError);
}

TEST(Dot, ListsEdges) {
  const auto dot = to_dot(stopping_robot().model);
  EXPECT_NE(dot.find("\"B1\" -> \"S\""), std::string::npos);
  EXPECT_NE(dot.find("\"Us\" -> \"CS\""), std::string::npos);
}

}  // namespace
}  // namespace icl::scm
