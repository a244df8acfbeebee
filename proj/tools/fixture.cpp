// Regenerates the bundled Country X files under data/ from the synthetic
// generator. The root-mapping thresholds and one CPT entry are solved so the
// final horizon year lands on the demo target.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "themis/analysis.hpp"
#include "themis/bbn.hpp"
#include "themis/error.hpp"
#include "themis/model.hpp"
#include "themis/synth.hpp"

using namespace themis;
using nlohmann::json;

namespace {

constexpr std::uint64_t kPanelSeed = 7;
constexpr int kHorizon = 25;
constexpr int kTrendWindow = 20;
constexpr double kTarget = 0.62;
constexpr double kDogmatismPrior = 0.70;
constexpr double kWaterPrior = 0.75;

double round_to(double v, double step) { return std::round(v / step) * step; }

// E[trend_probability] under N(mean, std) truncated to [lo, hi] (Simpson).
double expected_prior(const bbn::RootMapping& m, bbn::Projection p, double lo, double hi) {
  if (p.std <= 0.0) return bbn::trend_probability(m, std::clamp(p.mean, lo, hi));
  const double a = std::max(lo, p.mean - 10.0 * p.std), b = std::min(hi, p.mean + 10.0 * p.std);
  const int n = 20000;
  const double h = (b - a) / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double z = (x - p.mean) / p.std;
    const double pdf = std::exp(-0.5 * z * z);
    num += w * pdf * bbn::trend_probability(m, x);
    den += w * pdf;
  }
  return num / den;
}

double solve_threshold(bbn::RootMapping m, bbn::Projection p, double lo, double hi, double target) {
  // The expected prior is monotone in the threshold.
  double a = p.mean - 50.0 * m.scale, b = p.mean + 50.0 * m.scale;
  auto f = [&](double t) {
    m.threshold = t;
    return expected_prior(m, p, lo, hi) - target;
  };
  const double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if ((f(mid) > 0) == (fa > 0)) a = mid; else b = mid;
  }
  return 0.5 * (a + b);
}

bbn::BbnNode node(std::string id, std::vector<std::string> parents, std::vector<double> cpt) {
  bbn::BbnNode n;
  n.id = std::move(id);
  n.parents = std::move(parents);
  n.cpt = std::move(cpt);
  return n;
}

std::vector<double> binary_rows(std::initializer_list<double> p_true) {
  std::vector<double> out;
  for (double p : p_true) {
    out.push_back(p);
    out.push_back(1.0 - p);
  }
  return out;
}

bbn::ScenarioNetwork crisis_network() {
  bbn::ScenarioNetwork net;
  net.id = "country_x_crisis";
  net.description =
      "Religious dogmatism and water shortage leading to civil unrest. CPT values are calibrated, not from "
      "published data.";
  net.intervention_node = "intervention";

  auto dogma = node("religious_dogmatism", {}, binary_rows({kDogmatismPrior}));
  auto water = node("water_shortage", {}, binary_rows({kWaterPrior}));
  net.nodes.push_back(dogma);
  net.nodes.push_back(water);
  net.nodes.push_back(node("status_of_women_low", {"religious_dogmatism"}, binary_rows({0.75, 0.30})));
  net.nodes.push_back(node("mass_migration", {"water_shortage"}, binary_rows({0.70, 0.25})));
  net.nodes.push_back(node("disease", {"water_shortage"}, binary_rows({0.60, 0.15})));
  net.nodes.push_back(node("education_low", {"mass_migration"}, binary_rows({0.65, 0.30})));

  // Noisy-OR over the four causes, first parent most significant.
  const std::vector<double> activation = {0.35, 0.30, 0.20, 0.25};
  std::vector<double> gdp;
  for (int row = 0; row < 16; ++row) {
    double none = 1.0 - 0.05;
    for (int k = 0; k < 4; ++k)
      if (((row >> (3 - k)) & 1) == 0) none *= 1.0 - activation[static_cast<std::size_t>(k)];  // state 0 is "true"
    gdp.push_back(round_to(1.0 - none, 1e-6));
    gdp.push_back(1.0 - gdp.back());
  }
  net.nodes.push_back(
      node("gdp_below_threshold", {"religious_dogmatism", "mass_migration", "status_of_women_low", "education_low"},
           gdp));
  net.nodes.push_back(node("civil_unrest", {"gdp_below_threshold"}, binary_rows({0.90, 0.20})));
  net.nodes.push_back(node("intervention", {"civil_unrest"}, binary_rows({0.80, 0.25})));
  return net;
}

AdjacencyMatrix cluster_adjacency() {
  const auto& profiles = synth::country_x_profiles();
  std::vector<std::string> ids;
  for (const auto& p : profiles) ids.push_back(p.definition.id);
  AdjacencyMatrix adj(ids);
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t j = 0; j < profiles.size(); ++j)
      if (profiles[i].cluster == profiles[j].cluster || (profiles[i].key && profiles[j].key)) adj.set(i, j, true);
  return adj;
}

Goal goal(std::string name, std::string param, double target, double weight, Penalize pen) {
  Goal g;
  g.name = std::move(name);
  g.expression = {{std::move(param), 1.0}};
  g.target = target;
  g.weight = weight;
  g.penalize = pen;
  return g;
}

LinearConstraint bound_by_projection(const std::string& param, Relation rel, double scale = 1.0, double offset = 0.0) {
  LinearConstraint c;
  c.coefficients = {{param, 1.0}};
  c.relation = rel;
  c.rhs_from = RhsBinding{param, scale, offset};
  return c;
}

std::vector<ActorSpec> country_x_actors() {
  ActorSpec a;
  a.id = "ruling_faction";
  a.actor_type = ActorType::parse("A");
  a.objective_coefficients = {{"gdp", 1.0}, {"population", 1.0}};
  a.goals = {goal("wealth-share", "gdp", 430.0, 2.0, Penalize::under),
             goal("population-share", "population", 34.0, 1.0, Penalize::under)};
  a.constraints = {bound_by_projection("gdp", Relation::le), bound_by_projection("population", Relation::le)};
  a.metadata = {{"description", "Increase the wealth and population of its supporters"}};

  ActorSpec b;
  b.id = "clerical_council";
  b.actor_type = ActorType::parse("B");
  b.objective_coefficients = {{"religious_education", 1.0}, {"status_of_women", -1.0}};
  b.goals = {goal("religious-schooling", "religious_education", 30.0, 2.0, Penalize::under),
             goal("status-of-women-cap", "status_of_women", 45.0, 1.0, Penalize::over)};
  b.constraints = {bound_by_projection("religious_education", Relation::le),
                   bound_by_projection("status_of_women", Relation::ge)};
  b.metadata = {{"description", "Expand religious schooling and hold back the status of women"}};

  ActorSpec c;
  c.id = "reform_ministry";
  c.actor_type = ActorType::parse("C");
  c.objective_coefficients = {{"literacy", 1.0}, {"potable_water", 0.01}};
  c.goals = {goal("literacy", "literacy", 80.0, 1.0, Penalize::under),
             goal("water-supply", "potable_water", 1500.0, 1.0, Penalize::under)};
  c.constraints = {bound_by_projection("literacy", Relation::le, 1.02),
                   bound_by_projection("potable_water", Relation::le, 1.0, 40.0)};
  c.metadata = {{"description", "Raise literacy and secure the water supply"}};
  return {a, b, c};
}

}  // namespace

int main(int argc, char** argv) try {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  RegionModel m;
  m.region_name = "Country X";
  m.horizon_years = kHorizon;
  m.parameters = synth::country_x_parameters();
  m.series = synth::country_x_panel(kPanelSeed);
  m.adjacency = cluster_adjacency();
  m.actors = country_x_actors();
  json factors = json::object();
  for (const char* f : {"property_rights", "scientific_rationalism", "capital_markets", "communication_transport"})
    factors[f] = {{"score", 1.0}};
  m.metadata = {{"description", "Synthetic Country X panel; all values are invented."},
                {"synthetic_seed", kPanelSeed},
                {"adjacency", "within-cluster pairs and all pairs of key variables"},
                {"bernstein", {{"gdp", "gdp"}, {"factors", factors}}}};

  const int final_year = m.last_observed_year() + kHorizon;
  auto projection = [&](const std::string& id) {
    return analysis::extrapolate(analysis::fit_trend(*m.find_series(id), kTrendWindow), final_year);
  };
  auto bounds = [&](const std::string& id) {
    const auto* d = m.find_parameter(id);
    const double inf = std::numeric_limits<double>::infinity();
    return std::pair{d->lower.value_or(-inf), d->upper.value_or(inf)};
  };

  auto net = crisis_network();
  struct Root {
    const char* node;
    const char* parameter;
    double scale;
    bbn::Direction dir;
    double prior;
  };
  for (const Root& r : {Root{"religious_dogmatism", "religious_education", 1.0, bbn::Direction::above, kDogmatismPrior},
                        Root{"water_shortage", "potable_water", 40.0, bbn::Direction::below, kWaterPrior}}) {
    const auto p = projection(r.parameter);
    const auto [lo, hi] = bounds(r.parameter);
    auto mapping = bbn::RootMapping::trend(r.parameter, 0.0, r.scale, r.dir);
    mapping.threshold = round_to(solve_threshold(mapping, p, lo, hi, r.prior), 1e-4);
    net.node(r.node).root_mapping = mapping;
    std::printf("%-20s %s %d: mean %.4f std %.4f threshold %.4f expected prior %.6f\n", r.node, r.parameter,
                final_year, p.mean, p.std, mapping.threshold, expected_prior(mapping, p, lo, hi));
  }

  // P(intervention) is linear in P(intervention | unrest).
  auto& top = net.node("intervention");
  const double p_unrest = bbn::enumerate_joint(net, "civil_unrest").marginal[0];
  const double q = top.cpt[2];
  const double a = round_to((kTarget - q * (1.0 - p_unrest)) / p_unrest, 1e-6);
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("calibration needs P(intervention | unrest) outside [0, 1]");
  top.cpt[0] = a;
  top.cpt[1] = 1.0 - a;
  std::printf("P(civil_unrest) %.6f  P(intervention | unrest) %.6f  P(intervention) %.9f\n", p_unrest, a,
              bbn::enumerate_joint(net, "intervention").marginal[0]);

  m.scenarios = {net};
  validate(m);
  save_region_model(m, dir / "country_x.model.json");
  std::ofstream(dir / "country_x.network.json") << bbn::to_json(net).dump(2) << "\n";
  std::ofstream(dir / "country_x.series.csv") << synth::to_csv(m.series, m.parameters);
  std::printf("wrote %s\n", (dir / "country_x.model.json").c_str());
  return 0;
} catch (const std::exception& e) {
  std::cerr << "fixture: " << e.what() << "\n";
  return 1;
}
