#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "themis/actors.hpp"
#include "themis/analysis.hpp"
#include "themis/bbn.hpp"
#include "themis/model.hpp"

namespace themis::scenario {

using TrendMap = std::map<std::string, bbn::Projection>;

// ---------------------------------------------------------------------------
// Theories

using Theory = std::function<TrendMap(const RegionModel&, const TrendMap&)>;

/// Name -> trend transformation. `trend_baseline` and
/// `bernstein_four_factor` are always present.
class TheoryRegistry {
 public:
  static TheoryRegistry& global();

  void add(const std::string& name, Theory theory);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  TrendMap apply(const std::string& name, const RegionModel& model, const TrendMap& trends) const;

 private:
  TheoryRegistry();
  std::map<std::string, Theory> theories_;
};

TrendMap apply_theory(const std::string& theory, const RegionModel& model, const TrendMap& trends);

/// The four factor names looked up under metadata.bernstein.factors.
inline const std::vector<std::string> kBernsteinFactors = {"property_rights", "scientific_rationalism",
                                                           "capital_markets", "communication_transport"};

/// Parameters the Bernstein theory reads (GDP plus any parameter-backed factors).
std::vector<std::string> bernstein_parameters(const RegionModel& model);

// ---------------------------------------------------------------------------
// Aggregation

struct ScenarioOutcome {
  double weight = 1.0;
  double p_intervention = 0.0;
};

double aggregate_scenarios(const std::map<std::string, ScenarioOutcome>& per_scenario);

// ---------------------------------------------------------------------------
// Runs

struct RunConfig {
  std::uint64_t seed = 0;
  int samples = 1000;
  double variance_threshold = 0.90;
  std::size_t max_vars = 7;
  double r_threshold = 0.3;
  double tripwire = 0.5;
  std::optional<int> horizon_years;  // overrides the model's horizon
  int trend_window = 20;
  bool timestamps = false;  // record wall-clock start/finish in the run
  unsigned threads = 0;     // 0: hardware concurrency; never changes results
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j, const RunConfig& defaults = {});

/// A missing intercept keeps the fitted line through the centroid of the fit
/// window; a missing slope keeps the fitted slope.
struct TrendOverride {
  std::string parameter;
  std::optional<double> slope;
  std::optional<double> intercept;
};

struct YearResult {
  int year = 0;
  double p_intervention_mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::map<std::string, double> scenario_probabilities;
  int samples_used = 0;
  // Mean prior of every root per scenario, used for driver analysis.
  std::map<std::string, std::map<std::string, double>> root_priors;
  std::map<std::string, double> attainments;
  TrendMap projections;
};

struct PipelineRun {
  std::string run_id;
  std::string model_fingerprint;
  std::string region_name;
  RunConfig config;
  std::string theory;
  int horizon_years = 0;
  int base_year = 0;
  analysis::KeyVariableSet key_variables;
  analysis::SignMatrix sign_matrix;
  std::vector<analysis::TrendModel> trends;
  std::vector<TrendOverride> trend_overrides;
  std::vector<actors::AttainmentResult> actor_results;  // final horizon year
  std::map<std::string, double> attainments;            // final horizon year
  std::vector<std::pair<std::string, double>> actor_ranking;
  std::vector<YearResult> per_year;
  std::optional<std::string> parent_run_id;
  nlohmann::json edits = nlohmann::json::array();
  std::vector<std::string> stages_executed;
  std::optional<std::string> started;
  std::optional<std::string> finished;
  // The effective model (after edits); kept in memory for what-if runs.
  std::shared_ptr<const RegionModel> model;
};

/// Full pipeline: analysis, trend fits, then per horizon year theory,
/// actor programs and Monte Carlo inference. Stage failures are rethrown as
/// StageError carrying the stage name.
PipelineRun run_pipeline(const RegionModel& model, const RunConfig& config);

/// Parameters that need a fitted trend: the key variables plus everything
/// actor constraints, root mappings and the active theory refer to.
std::vector<std::string> trend_parameters(const RegionModel& model, const analysis::KeyVariableSet& keys);

/// One Monte Carlo estimate of P(intervention) for a single year, exposed for
/// convergence studies. Returns per-sample aggregated probabilities.
std::vector<double> sample_year(const RegionModel& model, const TrendMap& projections,
                                const std::map<std::string, double>& attainments, std::uint64_t seed, int year,
                                int samples, unsigned threads = 1);

struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Sample mean with a 90% normal-approximation interval, clamped to [0, 1].
Interval summarize(const std::vector<double>& samples);

// ---------------------------------------------------------------------------
// Reports

struct Driver {
  std::string root;
  double delta = 0.0;  // max - min of the weighted intervention probability over the sweep
  // p_root from the first scenario holding the root, p_intervention aggregated over scenarios.
  std::vector<bbn::SensitivityPoint> sweep;
};

struct InterventionReport {
  std::string run_id;
  std::vector<std::pair<int, double>> index_series;
  double tripwire_threshold = 0.5;
  std::vector<int> tripwire_years;
  std::map<int, std::vector<Driver>> top_drivers;
};

inline const std::vector<double> kDriverDeltas = {-0.2, -0.1, 0.0, 0.1, 0.2};

InterventionReport compute_intervention_index(const PipelineRun& run, double tripwire);

/// Weighted sweep of one root's prior across every network. Throws
/// ValidationError when no network has it as a binary root.
Driver sweep_root(const std::vector<bbn::ScenarioNetwork>& nets, const std::string& root,
                  const std::vector<double>& deltas = kDriverDeltas);

/// Networks of a run with root priors set to the given year's mean priors.
std::vector<bbn::ScenarioNetwork> networks_for_year(const PipelineRun& run, int year);

// ---------------------------------------------------------------------------
// What-if

struct Edit {
  enum class Kind { add_actor, remove_actor, override_trend, set_theory, override_root_mapping, set_tripwire };
  Kind kind = Kind::set_tripwire;
  std::optional<ActorSpec> actor;
  std::string id;  // actor id, parameter id, theory name or node id
  std::string scenario;  // for root mapping overrides; empty means every scenario holding the node
  std::optional<double> slope;
  std::optional<double> intercept;
  std::optional<bbn::RootMapping> root_mapping;
  double tripwire = 0.5;
};

Edit edit_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json to_json(const Edit& e);

/// Applies the edits to a copy of the parent and re-executes only the stages
/// downstream of the earliest one touched.
PipelineRun what_if(const PipelineRun& parent, const std::vector<Edit>& edits);

// ---------------------------------------------------------------------------
// Serialisation (run.json)

nlohmann::json to_json(const PipelineRun& run);
PipelineRun run_from_json(const nlohmann::json& j);
nlohmann::json to_json(const InterventionReport& report);
nlohmann::json to_json(const YearResult& y);

}  // namespace themis::scenario
