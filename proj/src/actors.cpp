#include "themis/actors.hpp"

#include <algorithm>
#include <cmath>

#include "themis/error.hpp"

namespace themis::actors {

using nlohmann::json;

namespace {

void note(std::vector<std::string>& order, const std::string& id) {
  if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
}

lp::Relation convert(Relation r) {
  switch (r) {
    case Relation::le: return lp::Relation::le;
    case Relation::eq: return lp::Relation::eq;
    case Relation::ge: return lp::Relation::ge;
  }
  return lp::Relation::le;
}

}  // namespace

GoalProgram build_goal_program(const ActorSpec& actor, const std::map<std::string, bbn::Projection>& domain_state,
                               int horizon_year) {
  GoalProgram gp;
  gp.actor_id = actor.id;
  gp.horizon_year = horizon_year;
  gp.goals = actor.goals;
  gp.bounds = actor.bounds;
  gp.objective = actor.objective_coefficients;

  auto state_of = [&](const std::string& id) -> const bbn::Projection& {
    auto it = domain_state.find(id);
    if (it == domain_state.end())
      throw ValidationError("actor '" + actor.id + "' needs a projection of '" + id + "' for year " +
                            std::to_string(horizon_year));
    return it->second;
  };

  for (const auto& c : actor.constraints) {
    LinearConstraint inst = c;
    for (const auto& [id, _] : c.coefficients) state_of(id);
    if (c.rhs_from) {
      inst.rhs = c.rhs_from->scale * state_of(c.rhs_from->parameter).mean + c.rhs_from->offset;
      inst.rhs_from.reset();
    }
    gp.constraints.push_back(std::move(inst));
  }

  for (const auto& g : gp.goals)
    for (const auto& [id, _] : g.expression) note(gp.decision_variables, id);
  for (const auto& c : gp.constraints)
    for (const auto& [id, _] : c.coefficients) note(gp.decision_variables, id);
  for (const auto& [id, _] : gp.objective) note(gp.decision_variables, id);
  for (const auto& [id, _] : gp.bounds) note(gp.decision_variables, id);
  for (const auto& g : gp.goals)
    if (!(g.weight > 0.0)) throw ValidationError("goal weights must be > 0 (actor '" + actor.id + "')");
  return gp;
}

LpResult solve_lp(const Coefficients& objective, const std::vector<LinearConstraint>& constraints,
                  const std::map<std::string, VariableBound>& bounds, bool maximize) {
  std::vector<std::string> vars;
  for (const auto& [id, _] : objective) note(vars, id);
  for (const auto& c : constraints)
    for (const auto& [id, _] : c.coefficients) note(vars, id);
  for (const auto& [id, _] : bounds) note(vars, id);

  auto col = [&](const std::string& id) {
    return static_cast<std::size_t>(std::find(vars.begin(), vars.end(), id) - vars.begin());
  };
  lp::Problem pb;
  pb.maximize = maximize;
  pb.objective.assign(vars.size(), 0.0);
  for (const auto& [id, v] : objective) pb.objective[col(id)] = v;
  for (const auto& c : constraints) {
    if (c.rhs_from) throw ValidationError("constraint right-hand side is not instantiated");
    lp::Row row;
    row.coefficients.assign(vars.size(), 0.0);
    for (const auto& [id, v] : c.coefficients) row.coefficients[col(id)] = v;
    row.relation = convert(c.relation);
    row.rhs = c.rhs;
    pb.rows.push_back(std::move(row));
  }
  pb.bounds.assign(vars.size(), lp::Bound{});
  for (const auto& [id, b] : bounds) pb.bounds[col(id)] = {b.lower, b.upper};

  auto sol = lp::solve(pb);
  LpResult out;
  out.status = sol.status;
  if (sol.status == lp::Status::optimal) {
    for (std::size_t j = 0; j < vars.size(); ++j) out.values[vars[j]] = sol.x[j];
    out.objective_value = sol.objective;
  }
  return out;
}

AttainmentResult solve_goal_program(const GoalProgram& gp) {
  const std::size_t nx = gp.decision_variables.size();
  const std::size_t ng = gp.goals.size();
  auto col = [&](const std::string& id) {
    auto it = std::find(gp.decision_variables.begin(), gp.decision_variables.end(), id);
    if (it == gp.decision_variables.end()) throw ValidationError("variable '" + id + "' is not declared");
    return static_cast<std::size_t>(it - gp.decision_variables.begin());
  };

  // Columns: decision variables, then (under, over) per goal.
  lp::Problem pb;
  pb.maximize = false;
  pb.objective.assign(nx + 2 * ng, 0.0);
  pb.bounds.assign(nx + 2 * ng, lp::Bound{});
  for (const auto& [id, b] : gp.bounds) pb.bounds[col(id)] = {b.lower, b.upper};
  double weight_sum = 0.0;
  for (std::size_t g = 0; g < ng; ++g) {
    const Goal& goal = gp.goals[g];
    const double norm = goal.weight / std::max(std::abs(goal.target), 1.0);
    if (goal.penalize != Penalize::over) pb.objective[nx + 2 * g] = norm;
    if (goal.penalize != Penalize::under) pb.objective[nx + 2 * g + 1] = norm;
    weight_sum += goal.weight;

    lp::Row row;
    row.coefficients.assign(nx + 2 * ng, 0.0);
    for (const auto& [id, v] : goal.expression) row.coefficients[col(id)] += v;
    row.coefficients[nx + 2 * g] = 1.0;
    row.coefficients[nx + 2 * g + 1] = -1.0;
    row.relation = lp::Relation::eq;
    row.rhs = goal.target;
    pb.rows.push_back(std::move(row));
  }
  for (const auto& c : gp.constraints) {
    if (c.rhs_from) throw ValidationError("constraint right-hand side is not instantiated");
    lp::Row row;
    row.coefficients.assign(nx + 2 * ng, 0.0);
    for (const auto& [id, v] : c.coefficients) row.coefficients[col(id)] += v;
    row.relation = convert(c.relation);
    row.rhs = c.rhs;
    pb.rows.push_back(std::move(row));
  }

  AttainmentResult out;
  out.actor_id = gp.actor_id;
  auto sol = lp::solve(pb);
  out.status = sol.status;
  if (sol.status != lp::Status::optimal) {
    out.attainment = 0.0;
    out.deviations.assign(ng, Deviation{});
    return out;
  }
  for (std::size_t j = 0; j < nx; ++j) out.variable_values[gp.decision_variables[j]] = sol.x[j];
  double weighted = 0.0;
  for (std::size_t g = 0; g < ng; ++g) {
    const Goal& goal = gp.goals[g];
    const double tiny = 1e-9 * std::max(std::abs(goal.target), 1.0);
    Deviation d{sol.x[nx + 2 * g], sol.x[nx + 2 * g + 1]};
    if (std::abs(d.under) < tiny) d.under = 0.0;
    if (std::abs(d.over) < tiny) d.over = 0.0;
    const double penalised = (goal.penalize != Penalize::over ? d.under : 0.0) +
                             (goal.penalize != Penalize::under ? d.over : 0.0);
    weighted += goal.weight * penalised / std::max(std::abs(goal.target), 1.0);
    out.deviations.push_back(d);
  }
  out.weighted_deviation = weighted;
  out.attainment = 1.0 - std::min(1.0, weighted / weight_sum);
  for (const auto& [id, c] : gp.objective) out.objective_value += c * out.variable_values[id];
  return out;
}

std::vector<std::pair<std::string, double>> rank_actors(const std::vector<AttainmentResult>& results) {
  if (results.empty()) throw ValidationError("no actors to rank");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : results) out.emplace_back(r.actor_id, r.attainment);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

json to_json(const AttainmentResult& r) {
  json devs = json::array();
  for (const auto& d : r.deviations) devs.push_back({{"under", d.under}, {"over", d.over}});
  return {{"actor_id", r.actor_id},
          {"status", lp::to_string(r.status)},
          {"variable_values", r.variable_values},
          {"deviations", devs},
          {"weighted_deviation", r.weighted_deviation},
          {"attainment", r.attainment},
          {"objective_value", r.objective_value}};
}

}  // namespace themis::actors
