#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "themis/bbn.hpp"
#include "themis/lp.hpp"
#include "themis/model.hpp"

namespace themis::actors {

struct GoalProgram {
  std::string actor_id;
  int horizon_year = 0;
  std::vector<std::string> decision_variables;  // first-appearance order
  std::vector<Goal> goals;
  std::vector<LinearConstraint> constraints;  // right-hand sides instantiated
  std::map<std::string, VariableBound> bounds;
  Coefficients objective;  // the actor's linear objective, reported only
};

/// Instantiates constraint right-hand sides from the projected means at the
/// horizon year. Every parameter a constraint touches needs a state entry.
GoalProgram build_goal_program(const ActorSpec& actor, const std::map<std::string, bbn::Projection>& domain_state,
                               int horizon_year);

struct LpResult {
  lp::Status status = lp::Status::infeasible;
  std::map<std::string, double> values;
  double objective_value = 0.0;
};

/// Linear program over named variables; unlisted variables are bounded below
/// by 0 and unbounded above.
LpResult solve_lp(const Coefficients& objective, const std::vector<LinearConstraint>& constraints,
                  const std::map<std::string, VariableBound>& bounds = {}, bool maximize = true);

struct Deviation {
  double under = 0.0;
  double over = 0.0;
};

struct AttainmentResult {
  std::string actor_id;
  lp::Status status = lp::Status::infeasible;
  std::map<std::string, double> variable_values;
  std::vector<Deviation> deviations;  // one per goal
  double weighted_deviation = 0.0;    // sum of w * penalised deviation / max(|target|, 1)
  double attainment = 0.0;
  double objective_value = 0.0;  // actor objective evaluated at the solution
};

AttainmentResult solve_goal_program(const GoalProgram& gp);

/// Descending attainment, ties by actor id.
std::vector<std::pair<std::string, double>> rank_actors(const std::vector<AttainmentResult>& results);

nlohmann::json to_json(const AttainmentResult& r);

}  // namespace themis::actors
