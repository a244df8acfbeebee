#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "themis/actors.hpp"
#include "themis/error.hpp"

using namespace themis;
using namespace themis::actors;

namespace {

Goal goal(Coefficients expr, double target, Penalize pen, double weight = 1.0) {
  Goal g;
  g.expression = std::move(expr);
  g.target = target;
  g.penalize = pen;
  g.weight = weight;
  return g;
}

LinearConstraint cap(Coefficients c, Relation rel, double rhs) {
  LinearConstraint lc;
  lc.coefficients = std::move(c);
  lc.relation = rel;
  lc.rhs = rhs;
  return lc;
}

}  // namespace

TEST_SUITE("actors") {
  TEST_CASE("simplex status on small programs") {
    lp::Problem pb;
    pb.objective = {3, 5};
    pb.rows = {{{1, 0}, lp::Relation::le, 4}, {{0, 2}, lp::Relation::le, 12}, {{3, 2}, lp::Relation::le, 18}};
    auto s = lp::solve(pb);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(36.0));
    CHECK(s.x[0] == doctest::Approx(2.0));
    CHECK(s.x[1] == doctest::Approx(6.0));

    pb.rows.push_back({{1, 1}, lp::Relation::ge, 100});
    CHECK(lp::solve(pb).status == lp::Status::infeasible);

    lp::Problem open;
    open.objective = {1, 1};
    open.rows = {{{1, -1}, lp::Relation::le, 1}};
    CHECK(lp::solve(open).status == lp::Status::unbounded);

    lp::Problem shifted;
    shifted.objective = {1};
    shifted.maximize = false;
    shifted.bounds = {{-3.0, 5.0}};
    const auto m = lp::solve(shifted);
    REQUIRE(m.status == lp::Status::optimal);
    CHECK(m.x[0] == doctest::Approx(-3.0));
  }

  TEST_CASE("simplex agrees with the vertex oracle on random bounded programs") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    int optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 2 + gen() % 2;
      lp::Problem pb;
      pb.maximize = gen() % 2 == 0;
      for (std::size_t j = 0; j < n; ++j) pb.objective.push_back(u(gen));
      const std::size_t m = 2 + gen() % 3;
      for (std::size_t i = 0; i < m; ++i) {
        lp::Row r;
        for (std::size_t j = 0; j < n; ++j) r.coefficients.push_back(u(gen));
        r.relation = static_cast<lp::Relation>(gen() % 3 == 0 ? 2 : 0);
        r.rhs = u(gen) + 3.0;
        pb.rows.push_back(r);
      }
      pb.bounds.assign(n, lp::Bound{0.0, 10.0});
      const auto want = oracle::vertex_optimum(pb);
      const auto got = lp::solve(pb);
      if (!want) {
        CHECK(got.status == lp::Status::infeasible);
        ++infeasible;
      } else {
        REQUIRE(got.status == lp::Status::optimal);
        CHECK(std::abs(got.objective - *want) < 1e-6);
        ++optimal;
      }
    }
    CHECK(optimal > 10);
    CHECK(infeasible > 0);
  }

  TEST_CASE("named LP wrapper respects bounds") {
    const auto r = solve_lp({{"x", 1.0}, {"y", 2.0}}, {cap({{"x", 1}, {"y", 1}}, Relation::le, 5)},
                            {{"y", VariableBound{0.0, 3.0}}});
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(r.values.at("y") == doctest::Approx(3.0));
    CHECK(r.values.at("x") == doctest::Approx(2.0));
    CHECK(r.objective_value == doctest::Approx(8.0));
  }

  TEST_CASE("two capped variables reach 80 percent of a goal of ten") {
    GoalProgram gp;
    gp.actor_id = "a";
    gp.decision_variables = {"x", "y"};
    gp.goals = {goal({{"x", 1}, {"y", 1}}, 10, Penalize::under)};
    gp.constraints = {cap({{"x", 1}}, Relation::le, 4), cap({{"y", 1}}, Relation::le, 4)};
    const auto r = solve_goal_program(gp);
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(std::abs(r.attainment - 0.8) < 1e-9);
    CHECK(r.deviations[0].under == doctest::Approx(2.0));
    CHECK(r.deviations[0].over == 0.0);
  }

  TEST_CASE("goal rows balance and attainment stays in range") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 40; ++trial) {
      GoalProgram gp;
      gp.actor_id = "r";
      gp.decision_variables = {"x", "y"};
      for (int g = 0; g < 2; ++g)
        gp.goals.push_back(goal({{"x", u(gen)}, {"y", u(gen)}}, 10.0 * u(gen), static_cast<Penalize>(gen() % 3), u(gen)));
      gp.constraints = {cap({{"x", u(gen)}, {"y", u(gen)}}, Relation::le, 10.0 * u(gen))};
      const auto r = solve_goal_program(gp);
      REQUIRE(r.status == lp::Status::optimal);
      CHECK(r.attainment >= 0.0);
      CHECK(r.attainment <= 1.0);
      for (std::size_t g = 0; g < 2; ++g) {
        double achieved = 0.0;
        for (const auto& [id, c] : gp.goals[g].expression) achieved += c * r.variable_values.at(id);
        const auto& d = r.deviations[g];
        CHECK(std::abs(achieved + d.under - d.over - gp.goals[g].target) < 1e-7);
        CHECK(d.under >= 0.0);
        CHECK(d.over >= 0.0);
      }
    }
  }

  TEST_CASE("infeasible goal program attains nothing") {
    GoalProgram gp;
    gp.actor_id = "stuck";
    gp.decision_variables = {"x"};
    gp.goals = {goal({{"x", 1}}, 5, Penalize::both)};
    gp.constraints = {cap({{"x", 1}}, Relation::ge, 3), cap({{"x", 1}}, Relation::le, 2)};
    const auto r = solve_goal_program(gp);
    CHECK(r.status == lp::Status::infeasible);
    CHECK(r.attainment == 0.0);
    CHECK(r.deviations.size() == 1);
  }

  TEST_CASE("constraints bind to projected means") {
    ActorSpec a;
    a.id = "gov";
    a.actor_type = ActorType::parse("A");
    a.goals = {goal({{"gdp", 1}}, 500, Penalize::under)};
    LinearConstraint c = cap({{"gdp", 1}}, Relation::le, 0);
    c.rhs_from = RhsBinding{"gdp", 0.5, 100.0};
    a.constraints = {c};
    const auto gp = build_goal_program(a, {{"gdp", {400.0, 10.0}}}, 2049);
    REQUIRE(gp.constraints.size() == 1);
    CHECK(gp.constraints[0].rhs == doctest::Approx(300.0));
    CHECK_FALSE(gp.constraints[0].rhs_from);
    const auto r = solve_goal_program(gp);
    CHECK(r.attainment == doctest::Approx(1.0 - 200.0 / 500.0));
    CHECK_THROWS_AS(build_goal_program(a, {}, 2049), ValidationError);
  }

  TEST_CASE("ranking orders by attainment then id") {
    std::vector<AttainmentResult> rs(3);
    rs[0].actor_id = "b";
    rs[0].attainment = 0.5;
    rs[1].actor_id = "a";
    rs[1].attainment = 0.5;
    rs[2].actor_id = "c";
    rs[2].attainment = 0.9;
    const auto ranked = rank_actors(rs);
    CHECK(ranked[0].first == "c");
    CHECK(ranked[1].first == "a");
    CHECK(ranked[2].first == "b");
    CHECK_THROWS_AS(rank_actors({}), ValidationError);
  }

  TEST_CASE("bundled actors solve against their own projections") {
    const auto m = test::bundled_model();
    std::map<std::string, bbn::Projection> state;
    for (const auto& p : m.parameters) state[p.id] = {100.0, 1.0};
    for (const auto& a : m.actors) {
      const auto r = solve_goal_program(build_goal_program(a, state, 2049));
      CHECK(r.status == lp::Status::optimal);
      CHECK(r.attainment >= 0.0);
      CHECK(r.attainment <= 1.0);
    }
  }
}
