#include "themis/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <set>
#include <thread>

#include "themis/error.hpp"
#include "themis/random.hpp"

namespace themis::scenario {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Theories

namespace {

double factor_score(const json& spec, const std::string& name, const TrendMap& trends) {
  const std::string path = "/metadata/bernstein/factors/" + name;
  double score = 0.0;
  if (spec.contains("score")) {
    score = spec.at("score").get<double>();
  } else if (spec.contains("parameter")) {
    const auto id = spec.at("parameter").get<std::string>();
    const double reference = spec.value("reference", 1.0);
    if (!(reference > 0.0)) throw ValidationError("factor reference must be > 0", path + "/reference");
    auto it = trends.find(id);
    if (it == trends.end()) throw ValidationError("no projection for factor parameter '" + id + "'", path);
    score = it->second.mean / reference;
  } else {
    throw ValidationError("factor '" + name + "' needs a score or a parameter", path);
  }
  return std::clamp(score, 0.01, 1.0);
}

const json& bernstein_spec(const RegionModel& model) {
  if (!model.metadata.is_object() || !model.metadata.contains("bernstein"))
    throw ValidationError("bernstein_four_factor needs metadata.bernstein", "/metadata/bernstein");
  const json& b = model.metadata.at("bernstein");
  if (!b.contains("factors") || !b.at("factors").is_object())
    throw ValidationError("bernstein_four_factor needs metadata.bernstein.factors", "/metadata/bernstein/factors");
  for (const auto& f : kBernsteinFactors)
    if (!b.at("factors").contains(f))
      throw ValidationError("missing factor mapping '" + f + "'", "/metadata/bernstein/factors/" + f);
  return b;
}

TrendMap bernstein(const RegionModel& model, const TrendMap& trends) {
  const json& b = bernstein_spec(model);
  const std::string gdp = b.value("gdp", std::string("gdp"));
  double product = 1.0;
  for (const auto& f : kBernsteinFactors) product *= factor_score(b.at("factors").at(f), f, trends);
  TrendMap out = trends;
  auto it = out.find(gdp);
  if (it == out.end()) throw ValidationError("no projection for GDP parameter '" + gdp + "'", "/metadata/bernstein/gdp");
  it->second.mean *= std::pow(product, 0.25);
  return out;
}

}  // namespace

TheoryRegistry::TheoryRegistry() {
  theories_["trend_baseline"] = [](const RegionModel&, const TrendMap& t) { return t; };
  theories_["bernstein_four_factor"] = bernstein;
}

TheoryRegistry& TheoryRegistry::global() {
  static TheoryRegistry registry;
  return registry;
}

void TheoryRegistry::add(const std::string& name, Theory theory) {
  if (name.empty()) throw ValidationError("theory name must be non-empty");
  theories_[name] = std::move(theory);
}

bool TheoryRegistry::contains(const std::string& name) const { return theories_.count(name) > 0; }

std::vector<std::string> TheoryRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : theories_) out.push_back(name);
  return out;
}

TrendMap TheoryRegistry::apply(const std::string& name, const RegionModel& model, const TrendMap& trends) const {
  auto it = theories_.find(name);
  if (it == theories_.end()) throw ValidationError("unknown theory '" + name + "'", "/theory");
  return it->second(model, trends);
}

TrendMap apply_theory(const std::string& theory, const RegionModel& model, const TrendMap& trends) {
  return TheoryRegistry::global().apply(theory, model, trends);
}

std::vector<std::string> bernstein_parameters(const RegionModel& model) {
  const json& b = bernstein_spec(model);
  std::vector<std::string> out{b.value("gdp", std::string("gdp"))};
  for (const auto& f : kBernsteinFactors) {
    const json& spec = b.at("factors").at(f);
    if (!spec.contains("score") && spec.contains("parameter")) out.push_back(spec.at("parameter").get<std::string>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation and summaries

double aggregate_scenarios(const std::map<std::string, ScenarioOutcome>& per_scenario) {
  if (per_scenario.empty()) throw ValidationError("no scenarios to aggregate");
  double num = 0.0, den = 0.0;
  for (const auto& [id, o] : per_scenario) {
    if (!(o.weight > 0.0)) throw ValidationError("scenario '" + id + "' weight must be > 0");
    num += o.weight * o.p_intervention;
    den += o.weight;
  }
  return num / den;
}

Interval summarize(const std::vector<double>& samples) {
  if (samples.empty()) throw ValidationError("no samples to summarise");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double half = 1.6448536269514722 * sd / std::sqrt(n);
  Interval out;
  out.mean = std::clamp(mean, 0.0, 1.0);
  out.lo = std::clamp(mean - half, 0.0, out.mean);
  out.hi = std::clamp(mean + half, out.mean, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Config

json to_json(const RunConfig& c) {
  json j = {{"seed", c.seed},
            {"samples", c.samples},
            {"variance_threshold", c.variance_threshold},
            {"max_vars", c.max_vars},
            {"r_threshold", c.r_threshold},
            {"tripwire", c.tripwire},
            {"trend_window", c.trend_window}};
  j["horizon_years"] = c.horizon_years ? json(*c.horizon_years) : json(nullptr);
  return j;
}

RunConfig run_config_from_json(const json& j, const RunConfig& defaults) {
  if (!j.is_object()) throw ValidationError("config must be an object", "/config");
  RunConfig c = defaults;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("samples")) c.samples = j.at("samples").get<int>();
    if (j.contains("variance_threshold")) c.variance_threshold = j.at("variance_threshold").get<double>();
    if (j.contains("max_vars")) c.max_vars = j.at("max_vars").get<std::size_t>();
    if (j.contains("r_threshold")) c.r_threshold = j.at("r_threshold").get<double>();
    if (j.contains("tripwire")) c.tripwire = j.at("tripwire").get<double>();
    if (j.contains("trend_window")) c.trend_window = j.at("trend_window").get<int>();
    if (j.contains("horizon_years") && !j.at("horizon_years").is_null())
      c.horizon_years = j.at("horizon_years").get<int>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("timestamps")) c.timestamps = j.at("timestamps").get<bool>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what(), "/config");
  }
  return c;
}

namespace {

void check_config(const RunConfig& c) {
  if (c.samples < 1) throw ValidationError("samples must be >= 1", "/config/samples");
  if (c.horizon_years && *c.horizon_years < 1) throw ValidationError("horizon must be >= 1", "/config/horizon_years");
  if (!(c.tripwire >= 0.0 && c.tripwire <= 1.0)) throw ValidationError("tripwire must be in [0, 1]", "/config/tripwire");
  if (!(c.variance_threshold > 0.0 && c.variance_threshold <= 1.0))
    throw ValidationError("variance_threshold must be in (0, 1]", "/config/variance_threshold");
  if (!(c.r_threshold > 0.0 && c.r_threshold < 1.0))
    throw ValidationError("r_threshold must be in (0, 1)", "/config/r_threshold");
  if (c.max_vars < 1) throw ValidationError("max_vars must be >= 1", "/config/max_vars");
  if (c.trend_window < 2) throw ValidationError("trend_window must be >= 2", "/config/trend_window");
}

const std::vector<std::string> kStages = {"validate", "analysis", "trends", "projection", "actors", "inference"};

std::size_t stage_index(const std::string& s) {
  return static_cast<std::size_t>(std::find(kStages.begin(), kStages.end(), s) - kStages.begin());
}

template <class F>
void run_stage(const std::string& name, PipelineRun& run, F&& f) {
  try {
    f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
  run.stages_executed.push_back(name);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> mapped_parameters(const RegionModel& model) {
  std::set<std::string> out;
  for (const auto& net : model.scenarios)
    for (const auto& node : net.nodes)
      if (node.root_mapping && node.root_mapping->kind == bbn::RootMapping::Kind::parameter_trend)
        out.insert(node.root_mapping->source);
  return {out.begin(), out.end()};
}

struct YearSamples {
  std::vector<double> aggregated;
  std::map<std::string, double> scenario_means;
  std::map<std::string, std::map<std::string, double>> root_prior_means;
};

YearSamples sample_year_detail(const RegionModel& model, const TrendMap& projections,
                               const std::map<std::string, double>& attainments, std::uint64_t seed, int year,
                               int samples, unsigned threads) {
  if (model.scenarios.empty()) throw ValidationError("model has no scenario networks", "/scenario_template");
  if (samples < 1) throw ValidationError("samples must be >= 1");
  const auto sources = mapped_parameters(model);
  struct Source {
    bbn::Projection projection;
    double lower, upper;
  };
  std::vector<Source> drawn;
  for (const auto& id : sources) {
    auto it = projections.find(id);
    if (it == projections.end()) throw ValidationError("no projection for parameter '" + id + "'");
    const auto* def = model.find_parameter(id);
    const double inf = std::numeric_limits<double>::infinity();
    drawn.push_back({it->second, def && def->lower ? *def->lower : -inf, def && def->upper ? *def->upper : inf});
  }

  const std::size_t ns = model.scenarios.size();
  std::vector<std::vector<std::string>> roots(ns);
  for (std::size_t k = 0; k < ns; ++k)
    for (const auto& node : model.scenarios[k].nodes)
      if (node.is_root() && node.states.size() == 2) roots[k].push_back(node.id);

  // Per sample: one probability per scenario followed by the root priors.
  std::size_t width = ns;
  for (const auto& r : roots) width += r.size();
  std::vector<double> cells(static_cast<std::size_t>(samples) * width, 0.0);

  auto work = [&](int from, int to) {
    for (int s = from; s < to; ++s) {
      rng::Stream stream(seed, {static_cast<std::uint64_t>(static_cast<std::int64_t>(year)),
                                static_cast<std::uint64_t>(s)});
      TrendMap draw;
      for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto& src = drawn[i];
        draw[sources[i]] = {stream.truncated_normal(src.projection.mean, src.projection.std, src.lower, src.upper),
                            0.0};
      }
      double* row = &cells[static_cast<std::size_t>(s) * width];
      std::size_t col = ns;
      for (std::size_t k = 0; k < ns; ++k) {
        const auto net = bbn::map_roots(model.scenarios[k], draw, attainments);
        row[k] = bbn::intervention_probability(net);
        for (const auto& r : roots[k]) row[col++] = bbn::root_prior(net, r);
      }
    }
  };

  unsigned nthreads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(samples));
  if (nthreads <= 1) {
    work(0, samples);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    const int chunk = (samples + static_cast<int>(nthreads) - 1) / static_cast<int>(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
      const int from = static_cast<int>(t) * chunk, to = std::min(samples, from + chunk);
      pool.emplace_back([&, t, from, to] {
        try {
          work(from, to);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  YearSamples out;
  out.aggregated.resize(static_cast<std::size_t>(samples));
  std::vector<double> sums(width, 0.0);
  double wsum = 0.0;
  for (const auto& net : model.scenarios) wsum += net.weight;
  for (int s = 0; s < samples; ++s) {
    const double* row = &cells[static_cast<std::size_t>(s) * width];
    double agg = 0.0;
    for (std::size_t k = 0; k < ns; ++k) agg += model.scenarios[k].weight * row[k];
    out.aggregated[static_cast<std::size_t>(s)] = agg / wsum;
    for (std::size_t c = 0; c < width; ++c) sums[c] += row[c];
  }
  std::size_t col = ns;
  for (std::size_t k = 0; k < ns; ++k) {
    const auto& id = model.scenarios[k].id;
    out.scenario_means[id] = sums[k] / samples;
    auto& priors = out.root_prior_means[id];
    for (const auto& r : roots[k]) priors[r] = sums[col++] / samples;
  }
  return out;
}

void apply_override(analysis::TrendModel& t, const TrendOverride& o) {
  if (o.slope) {
    const double centroid = t.slope * t.mean_year + t.intercept;
    t.slope = *o.slope;
    t.intercept = centroid - t.slope * t.mean_year;
  }
  if (o.intercept) t.intercept = *o.intercept;
}

std::string compute_run_id(const PipelineRun& run) {
  json basis = {{"model", run.model_fingerprint}, {"config", to_json(run.config)}, {"edits", run.edits}};
  basis["parent"] = run.parent_run_id ? json(*run.parent_run_id) : json(nullptr);
  return fnv1a_hex(basis.dump());
}

// Runs every stage from `from` onwards against the effective model held in `run`.
void execute(PipelineRun& run, std::size_t from) {
  const RegionModel& model = *run.model;
  const RunConfig& cfg = run.config;

  if (from <= stage_index("validate"))
    run_stage("validate", run, [&] {
      check_config(cfg);
      validate(model);
      run.base_year = model.last_observed_year();
      run.horizon_years = cfg.horizon_years.value_or(model.horizon_years);
      run.theory = model.theory;
      run.region_name = model.region_name;
      run.model_fingerprint = fingerprint(model);
    });

  if (from <= stage_index("analysis"))
    run_stage("analysis", run, [&] {
      const auto panel = analysis::standardize(model.series);
      const auto result = analysis::pca(panel);
      run.key_variables = analysis::select_key_variables(result, panel, cfg.variance_threshold, cfg.max_vars);
      run.sign_matrix = analysis::estimate_signs(panel, run.key_variables,
                                                 model.adjacency ? &*model.adjacency : nullptr, cfg.r_threshold);
    });

  if (from <= stage_index("trends"))
    run_stage("trends", run, [&] {
      auto needed = trend_parameters(model, run.key_variables);
      for (const auto& o : run.trend_overrides) needed.push_back(o.parameter);
      std::sort(needed.begin(), needed.end());
      needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
      std::vector<analysis::TrendModel> fits;
      for (const auto& id : needed) {
        auto cached = std::find_if(run.trends.begin(), run.trends.end(),
                                   [&](const analysis::TrendModel& t) { return t.parameter == id; });
        if (cached != run.trends.end()) {
          fits.push_back(*cached);
          continue;
        }
        const auto* series = model.find_series(id);
        if (!series) throw ValidationError("no observed series for '" + id + "', which needs a trend");
        fits.push_back(analysis::fit_trend(*series, cfg.trend_window));
      }
      for (const auto& o : run.trend_overrides)
        for (auto& t : fits)
          if (t.parameter == o.parameter) apply_override(t, o);
      run.trends = std::move(fits);
    });

  if (from <= stage_index("projection"))
    run_stage("projection", run, [&] {
      run.theory = model.theory;
      run.per_year.clear();
      for (int k = 1; k <= run.horizon_years; ++k) {
        YearResult y;
        y.year = run.base_year + k;
        TrendMap raw;
        for (const auto& t : run.trends) raw[t.parameter] = analysis::extrapolate(t, y.year);
        y.projections = apply_theory(model.theory, model, raw);
        run.per_year.push_back(std::move(y));
      }
    });

  if (from <= stage_index("actors"))
    run_stage("actors", run, [&] {
      run.actor_results.clear();
      for (auto& y : run.per_year) {
        y.attainments.clear();
        std::vector<actors::AttainmentResult> results;
        for (const auto& actor : model.actors) {
          auto r = actors::solve_goal_program(actors::build_goal_program(actor, y.projections, y.year));
          y.attainments[actor.id] = r.attainment;
          results.push_back(std::move(r));
        }
        if (&y == &run.per_year.back()) run.actor_results = std::move(results);
      }
      run.attainments = run.per_year.empty() ? std::map<std::string, double>{} : run.per_year.back().attainments;
      run.actor_ranking = run.actor_results.empty() ? std::vector<std::pair<std::string, double>>{}
                                                    : actors::rank_actors(run.actor_results);
    });

  if (from <= stage_index("inference"))
    run_stage("inference", run, [&] {
      for (auto& y : run.per_year) {
        auto detail = sample_year_detail(model, y.projections, y.attainments, cfg.seed, y.year, cfg.samples,
                                         cfg.threads);
        const auto ci = summarize(detail.aggregated);
        y.p_intervention_mean = ci.mean;
        y.ci_lo = ci.lo;
        y.ci_hi = ci.hi;
        y.samples_used = cfg.samples;
        y.scenario_probabilities = std::move(detail.scenario_means);
        y.root_priors = std::move(detail.root_prior_means);
      }
    });
}

}  // namespace

std::vector<std::string> trend_parameters(const RegionModel& model, const analysis::KeyVariableSet& keys) {
  std::set<std::string> out(keys.selected.begin(), keys.selected.end());
  for (const auto& actor : model.actors)
    for (const auto& c : actor.constraints) {
      for (const auto& [id, _] : c.coefficients) out.insert(id);
      if (c.rhs_from) out.insert(c.rhs_from->parameter);
    }
  for (const auto& id : mapped_parameters(model)) out.insert(id);
  if (model.theory == "bernstein_four_factor")
    for (const auto& id : bernstein_parameters(model)) out.insert(id);
  return {out.begin(), out.end()};
}

std::vector<double> sample_year(const RegionModel& model, const TrendMap& projections,
                                const std::map<std::string, double>& attainments, std::uint64_t seed, int year,
                                int samples, unsigned threads) {
  return sample_year_detail(model, projections, attainments, seed, year, samples, threads).aggregated;
}

PipelineRun run_pipeline(const RegionModel& model, const RunConfig& config) {
  PipelineRun run;
  run.config = config;
  run.model = std::make_shared<const RegionModel>(model);
  if (config.timestamps) run.started = utc_now();
  execute(run, 0);
  run.run_id = compute_run_id(run);
  if (config.timestamps) run.finished = utc_now();
  return run;
}

// ---------------------------------------------------------------------------
// Reports

std::vector<bbn::ScenarioNetwork> networks_for_year(const PipelineRun& run, int year) {
  if (!run.model) throw ValidationError("run has no model attached");
  auto it = std::find_if(run.per_year.begin(), run.per_year.end(), [&](const YearResult& y) { return y.year == year; });
  if (it == run.per_year.end()) throw ValidationError("year " + std::to_string(year) + " is outside the run");
  std::vector<bbn::ScenarioNetwork> out = run.model->scenarios;
  for (auto& net : out) {
    auto priors = it->root_priors.find(net.id);
    if (priors == it->root_priors.end()) continue;
    for (const auto& [root, p] : priors->second) bbn::set_root_prior(net, root, p);
  }
  return out;
}

Driver sweep_root(const std::vector<bbn::ScenarioNetwork>& nets, const std::string& root,
                  const std::vector<double>& deltas) {
  Driver d;
  d.root = root;
  d.sweep.assign(deltas.size(), {});
  std::vector<double> num(deltas.size(), 0.0);
  double den = 0.0;
  bool seen = false;
  for (const auto& net : nets) {
    den += net.weight;
    auto node = std::find_if(net.nodes.begin(), net.nodes.end(), [&](const bbn::BbnNode& n) { return n.id == root; });
    if (node == net.nodes.end() || !node->is_root() || node->states.size() != 2) {
      const double p = bbn::intervention_probability(net);
      for (auto& v : num) v += net.weight * p;
      continue;
    }
    const auto points = bbn::sensitivity(net, root, deltas);
    for (std::size_t i = 0; i < points.size(); ++i) {
      num[i] += net.weight * points[i].p_intervention;
      if (!seen) d.sweep[i].p_root = points[i].p_root;
    }
    seen = true;
  }
  if (!seen) throw ValidationError("'" + root + "' is not a binary root of any scenario");
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    d.sweep[i].p_intervention = num[i] / den;
    lo = std::min(lo, d.sweep[i].p_intervention);
    hi = std::max(hi, d.sweep[i].p_intervention);
  }
  d.delta = hi - lo;
  return d;
}

InterventionReport compute_intervention_index(const PipelineRun& run, double tripwire) {
  if (!(tripwire >= 0.0 && tripwire <= 1.0)) throw ValidationError("tripwire must be in [0, 1]", "/tripwire");
  InterventionReport rep;
  rep.run_id = run.run_id;
  rep.tripwire_threshold = tripwire;
  for (const auto& y : run.per_year) {
    rep.index_series.emplace_back(y.year, y.p_intervention_mean);
    if (y.p_intervention_mean >= tripwire) rep.tripwire_years.push_back(y.year);
  }
  for (int year : rep.tripwire_years) {
    const auto nets = networks_for_year(run, year);
    std::vector<std::string> roots;
    for (const auto& net : nets)
      for (const auto& node : net.nodes)
        if (node.is_root() && node.states.size() == 2 &&
            std::find(roots.begin(), roots.end(), node.id) == roots.end())
          roots.push_back(node.id);

    std::vector<Driver> drivers;
    for (const auto& root : roots) {
      Driver d = sweep_root(nets, root);
      drivers.push_back(std::move(d));
    }
    std::stable_sort(drivers.begin(), drivers.end(), [](const Driver& a, const Driver& b) {
      if (a.delta != b.delta) return a.delta > b.delta;
      return a.root < b.root;
    });
    rep.top_drivers[year] = std::move(drivers);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// What-if

namespace {

const std::vector<std::pair<Edit::Kind, std::string>> kEditKinds = {
    {Edit::Kind::add_actor, "add_actor"},
    {Edit::Kind::remove_actor, "remove_actor"},
    {Edit::Kind::override_trend, "override_trend"},
    {Edit::Kind::set_theory, "set_theory"},
    {Edit::Kind::override_root_mapping, "override_root_mapping"},
    {Edit::Kind::set_tripwire, "set_tripwire"}};

}  // namespace

Edit edit_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError("edit must be an object", path);
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ValidationError("edit needs a kind", path + "/kind");
  const auto kind = j.at("kind").get<std::string>();
  auto k = std::find_if(kEditKinds.begin(), kEditKinds.end(), [&](const auto& e) { return e.second == kind; });
  if (k == kEditKinds.end()) throw ValidationError("unknown edit kind '" + kind + "'", path + "/kind");
  Edit e;
  e.kind = k->first;
  auto need_string = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
      throw ValidationError(std::string("edit needs '") + key + "'", path + "/" + key);
    return j.at(key).get<std::string>();
  };
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number", path + "/" + key);
    return j.at(key).get<double>();
  };
  switch (e.kind) {
    case Edit::Kind::add_actor:
      if (!j.contains("actor")) throw ValidationError("edit needs 'actor'", path + "/actor");
      e.actor = actor_from_json(j.at("actor"), path + "/actor");
      e.id = e.actor->id;
      break;
    case Edit::Kind::remove_actor:
      e.id = need_string("actor_id");
      break;
    case Edit::Kind::override_trend:
      e.id = need_string("parameter");
      e.slope = number("slope");
      e.intercept = number("intercept");
      if (!e.slope && !e.intercept) throw ValidationError("override_trend needs a slope or an intercept", path);
      break;
    case Edit::Kind::set_theory:
      e.id = need_string("theory");
      break;
    case Edit::Kind::override_root_mapping:
      e.id = need_string("node");
      if (j.contains("scenario")) e.scenario = need_string("scenario");
      if (!j.contains("root_mapping")) throw ValidationError("edit needs 'root_mapping'", path + "/root_mapping");
      e.root_mapping = bbn::root_mapping_from_json(j.at("root_mapping"), path + "/root_mapping");
      break;
    case Edit::Kind::set_tripwire: {
      auto t = number("tripwire");
      if (!t) throw ValidationError("edit needs 'tripwire'", path + "/tripwire");
      if (!(*t >= 0.0 && *t <= 1.0)) throw ValidationError("tripwire must be in [0, 1]", path + "/tripwire");
      e.tripwire = *t;
      break;
    }
  }
  return e;
}

json to_json(const Edit& e) {
  auto k = std::find_if(kEditKinds.begin(), kEditKinds.end(), [&](const auto& p) { return p.first == e.kind; });
  json j = {{"kind", k->second}};
  switch (e.kind) {
    case Edit::Kind::add_actor: j["actor"] = to_json(*e.actor); break;
    case Edit::Kind::remove_actor: j["actor_id"] = e.id; break;
    case Edit::Kind::override_trend:
      j["parameter"] = e.id;
      if (e.slope) j["slope"] = *e.slope;
      if (e.intercept) j["intercept"] = *e.intercept;
      break;
    case Edit::Kind::set_theory: j["theory"] = e.id; break;
    case Edit::Kind::override_root_mapping:
      j["node"] = e.id;
      if (!e.scenario.empty()) j["scenario"] = e.scenario;
      j["root_mapping"] = bbn::to_json(*e.root_mapping);
      break;
    case Edit::Kind::set_tripwire: j["tripwire"] = e.tripwire; break;
  }
  return j;
}

PipelineRun what_if(const PipelineRun& parent, const std::vector<Edit>& edits) {
  if (!parent.model) throw ValidationError("run has no model attached");
  PipelineRun child = parent;
  child.parent_run_id = parent.run_id;
  child.stages_executed.clear();
  child.edits = json::array();
  child.started.reset();
  child.finished.reset();
  if (child.config.timestamps) child.started = utc_now();

  RegionModel m = *parent.model;
  std::size_t from = kStages.size();
  auto touch = [&](const std::string& stage) { from = std::min(from, stage_index(stage)); };

  for (std::size_t i = 0; i < edits.size(); ++i) {
    const Edit& e = edits[i];
    const std::string path = "/edits/" + std::to_string(i);
    switch (e.kind) {
      case Edit::Kind::add_actor:
        if (!e.actor) throw ValidationError("add_actor needs an actor", path + "/actor");
        if (m.find_actor(e.actor->id)) throw ValidationError("actor '" + e.actor->id + "' already exists", path);
        m.actors.push_back(*e.actor);
        touch("actors");
        break;
      case Edit::Kind::remove_actor: {
        auto it = std::find_if(m.actors.begin(), m.actors.end(), [&](const ActorSpec& a) { return a.id == e.id; });
        if (it == m.actors.end()) throw ValidationError("unknown actor '" + e.id + "'", path + "/actor_id");
        m.actors.erase(it);
        touch("actors");
        break;
      }
      case Edit::Kind::override_trend:
        if (!m.find_parameter(e.id)) throw ValidationError("unknown parameter '" + e.id + "'", path + "/parameter");
        if (!m.find_series(e.id)) throw ValidationError("parameter '" + e.id + "' has no series", path + "/parameter");
        child.trend_overrides.push_back({e.id, e.slope, e.intercept});
        touch("trends");
        break;
      case Edit::Kind::set_theory:
        if (!TheoryRegistry::global().contains(e.id)) throw ValidationError("unknown theory '" + e.id + "'", path + "/theory");
        m.theory = e.id;
        touch("projection");
        break;
      case Edit::Kind::override_root_mapping: {
        bool found = false;
        for (auto& net : m.scenarios) {
          if (!e.scenario.empty() && net.id != e.scenario) continue;
          for (auto& node : net.nodes)
            if (node.id == e.id) {
              if (!node.is_root()) throw ValidationError("node '" + e.id + "' is not a root", path + "/node");
              node.root_mapping = e.root_mapping;
              if (e.root_mapping->kind == bbn::RootMapping::Kind::constant)
                node.cpt = {e.root_mapping->p, 1.0 - e.root_mapping->p};
              found = true;
            }
        }
        if (!found) throw ValidationError("unknown node '" + e.id + "'", path + "/node");
        touch("inference");
        break;
      }
      case Edit::Kind::set_tripwire:
        child.config.tripwire = e.tripwire;
        break;
    }
    child.edits.push_back(to_json(e));
  }

  try {
    validate(m);
  } catch (const Error& e) {
    throw StageError("validate", e);
  }
  if (from < kStages.size()) {
    const auto needed = trend_parameters(m, child.key_variables);
    for (const auto& id : needed)
      if (std::none_of(child.trends.begin(), child.trends.end(),
                       [&](const analysis::TrendModel& t) { return t.parameter == id; }))
        touch("trends");
  }
  child.model = std::make_shared<const RegionModel>(std::move(m));
  child.model_fingerprint = fingerprint(*child.model);
  if (from < kStages.size()) execute(child, from);
  child.run_id = compute_run_id(child);
  if (child.config.timestamps) child.finished = utc_now();
  return child;
}

}  // namespace themis::scenario
