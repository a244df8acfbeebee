#include <algorithm>

#include "themis/error.hpp"
#include "themis/scenario.hpp"

namespace themis::scenario {

using nlohmann::json;

namespace {

constexpr const char* kRunFormat = "themis.run/1";

json projections_json(const TrendMap& m) {
  json j = json::object();
  for (const auto& [id, p] : m) j[id] = {{"mean", p.mean}, {"std", p.std}};
  return j;
}

actors::AttainmentResult attainment_from_json(const json& j) {
  actors::AttainmentResult r;
  r.actor_id = j.at("actor_id").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  r.status = status == "optimal" ? lp::Status::optimal
             : status == "unbounded" ? lp::Status::unbounded
                                     : lp::Status::infeasible;
  r.variable_values = j.at("variable_values").get<std::map<std::string, double>>();
  for (const auto& d : j.at("deviations")) r.deviations.push_back({d.at("under").get<double>(), d.at("over").get<double>()});
  r.weighted_deviation = j.at("weighted_deviation").get<double>();
  r.attainment = j.at("attainment").get<double>();
  r.objective_value = j.at("objective_value").get<double>();
  return r;
}

YearResult year_from_json(const json& j) {
  YearResult y;
  y.year = j.at("year").get<int>();
  y.p_intervention_mean = j.at("p_intervention_mean").get<double>();
  y.ci_lo = j.at("p_intervention_ci").at(0).get<double>();
  y.ci_hi = j.at("p_intervention_ci").at(1).get<double>();
  y.scenario_probabilities = j.at("scenario_probabilities").get<std::map<std::string, double>>();
  y.samples_used = j.at("samples_used").get<int>();
  y.root_priors = j.at("root_priors").get<std::map<std::string, std::map<std::string, double>>>();
  y.attainments = j.at("attainments").get<std::map<std::string, double>>();
  for (const auto& [id, p] : j.at("projections").items())
    y.projections[id] = {p.at("mean").get<double>(), p.at("std").get<double>()};
  return y;
}

}  // namespace

json to_json(const YearResult& y) {
  return {{"year", y.year},
          {"p_intervention_mean", y.p_intervention_mean},
          {"p_intervention_ci", {y.ci_lo, y.ci_hi}},
          {"scenario_probabilities", y.scenario_probabilities},
          {"samples_used", y.samples_used},
          {"root_priors", y.root_priors},
          {"attainments", y.attainments},
          {"projections", projections_json(y.projections)}};
}

json to_json(const PipelineRun& run) {
  json j;
  j["format"] = kRunFormat;
  j["run_id"] = run.run_id;
  j["parent_run_id"] = run.parent_run_id ? json(*run.parent_run_id) : json(nullptr);
  j["model_fingerprint"] = run.model_fingerprint;
  j["region_name"] = run.region_name;
  j["seed"] = run.config.seed;
  j["config"] = to_json(run.config);
  j["theory"] = run.theory;
  j["horizon_years"] = run.horizon_years;
  j["base_year"] = run.base_year;
  j["key_variables"] = analysis::to_json(run.key_variables);
  j["sign_matrix"] = analysis::to_json(run.sign_matrix);
  j["trends"] = json::array();
  for (const auto& t : run.trends) j["trends"].push_back(analysis::to_json(t));
  j["trend_overrides"] = json::array();
  for (const auto& o : run.trend_overrides) {
    json oj = {{"parameter", o.parameter}};
    oj["slope"] = o.slope ? json(*o.slope) : json(nullptr);
    oj["intercept"] = o.intercept ? json(*o.intercept) : json(nullptr);
    j["trend_overrides"].push_back(oj);
  }
  j["attainments"] = run.attainments;
  j["actor_results"] = json::array();
  for (const auto& r : run.actor_results) j["actor_results"].push_back(actors::to_json(r));
  j["actor_ranking"] = json::array();
  for (const auto& [id, a] : run.actor_ranking) j["actor_ranking"].push_back({{"actor_id", id}, {"attainment", a}});
  j["per_year"] = json::array();
  for (const auto& y : run.per_year) j["per_year"].push_back(to_json(y));
  j["edits"] = run.edits;
  j["stages_executed"] = run.stages_executed;
  if (run.started) j["started"] = *run.started;
  if (run.finished) j["finished"] = *run.finished;
  j["model"] = run.model ? themis::to_json(*run.model) : json(nullptr);
  return j;
}

PipelineRun run_from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string()) != kRunFormat)
    throw ParseError("not a run record (expected format '" + std::string(kRunFormat) + "')", "/format");
  try {
    PipelineRun run;
    run.run_id = j.at("run_id").get<std::string>();
    if (!j.at("parent_run_id").is_null()) run.parent_run_id = j.at("parent_run_id").get<std::string>();
    run.model_fingerprint = j.at("model_fingerprint").get<std::string>();
    run.region_name = j.at("region_name").get<std::string>();
    run.config = run_config_from_json(j.at("config"));
    run.theory = j.at("theory").get<std::string>();
    run.horizon_years = j.at("horizon_years").get<int>();
    run.base_year = j.at("base_year").get<int>();
    run.key_variables = analysis::key_variables_from_json(j.at("key_variables"));
    run.sign_matrix = analysis::sign_matrix_from_json(j.at("sign_matrix"));
    for (const auto& t : j.at("trends")) run.trends.push_back(analysis::trend_from_json(t));
    for (const auto& o : j.at("trend_overrides")) {
      TrendOverride ov;
      ov.parameter = o.at("parameter").get<std::string>();
      if (!o.at("slope").is_null()) ov.slope = o.at("slope").get<double>();
      if (!o.at("intercept").is_null()) ov.intercept = o.at("intercept").get<double>();
      run.trend_overrides.push_back(ov);
    }
    run.attainments = j.at("attainments").get<std::map<std::string, double>>();
    for (const auto& r : j.at("actor_results")) run.actor_results.push_back(attainment_from_json(r));
    for (const auto& r : j.at("actor_ranking"))
      run.actor_ranking.emplace_back(r.at("actor_id").get<std::string>(), r.at("attainment").get<double>());
    for (const auto& y : j.at("per_year")) run.per_year.push_back(year_from_json(y));
    run.edits = j.at("edits");
    run.stages_executed = j.at("stages_executed").get<std::vector<std::string>>();
    if (j.contains("started")) run.started = j.at("started").get<std::string>();
    if (j.contains("finished")) run.finished = j.at("finished").get<std::string>();
    if (!j.at("model").is_null()) run.model = std::make_shared<const RegionModel>(model_from_json(j.at("model")));
    return run;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed run record: ") + e.what());
  }
}

json to_json(const InterventionReport& rep) {
  json j;
  j["run_id"] = rep.run_id;
  j["index_series"] = json::array();
  for (const auto& [year, v] : rep.index_series) j["index_series"].push_back({{"year", year}, {"index", v}});
  j["tripwire_threshold"] = rep.tripwire_threshold;
  j["tripwire_years"] = rep.tripwire_years;
  j["top_drivers"] = json::object();
  for (const auto& [year, drivers] : rep.top_drivers) {
    json list = json::array();
    for (const auto& d : drivers) {
      json sweep = json::array();
      for (const auto& p : d.sweep) sweep.push_back({{"p_root", p.p_root}, {"p_intervention", p.p_intervention}});
      list.push_back({{"root", d.root}, {"delta", d.delta}, {"sweep", sweep}});
    }
    j["top_drivers"][std::to_string(year)] = list;
  }
  return j;
}

}  // namespace themis::scenario
