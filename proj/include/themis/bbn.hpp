#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace themis::bbn {

enum class Direction { below, above };

/// How a root event's prior is derived from the projected world state.
struct RootMapping {
  enum class Kind { parameter_trend, actor_attainment, constant };

  Kind kind = Kind::constant;
  std::string source;  // parameter id or actor id; empty for constant
  double threshold = 0.0;
  double scale = 1.0;
  Direction direction = Direction::below;
  bool invert = false;
  double p = 0.5;

  static RootMapping trend(std::string parameter, double threshold, double scale, Direction dir) {
    RootMapping m;
    m.kind = Kind::parameter_trend;
    m.source = std::move(parameter);
    m.threshold = threshold;
    m.scale = scale;
    m.direction = dir;
    return m;
  }
  static RootMapping attainment(std::string actor, bool invert) {
    RootMapping m;
    m.kind = Kind::actor_attainment;
    m.source = std::move(actor);
    m.invert = invert;
    return m;
  }
  static RootMapping fixed(double p) {
    RootMapping m;
    m.kind = Kind::constant;
    m.p = p;
    return m;
  }

  bool operator==(const RootMapping&) const = default;
};

/// One event. `cpt` is row-major: one row per parent-state combination
/// (first declared parent most significant), each row a distribution over
/// `states`. A root has a single row: its prior.
struct BbnNode {
  std::string id;
  std::vector<std::string> states{"true", "false"};
  std::vector<std::string> parents;
  std::vector<double> cpt;
  std::optional<RootMapping> root_mapping;

  bool is_root() const { return parents.empty(); }
  bool operator==(const BbnNode&) const = default;
};

struct ScenarioNetwork {
  std::string id = "scenario";
  double weight = 1.0;
  std::string description;
  std::vector<BbnNode> nodes;
  std::string intervention_node;

  std::size_t index_of(const std::string& node_id) const;  // throws ValidationError
  const BbnNode& node(const std::string& node_id) const { return nodes[index_of(node_id)]; }
  BbnNode& node(const std::string& node_id) { return nodes[index_of(node_id)]; }

  /// parent -> child pairs in node declaration order.
  std::vector<std::pair<std::string, std::string>> edges() const;

  bool operator==(const ScenarioNetwork&) const = default;
};

using Evidence = std::map<std::string, std::string>;

struct PosteriorReport {
  std::string query_node;
  std::vector<std::string> states;
  std::vector<double> marginal;  // empty when the evidence has zero probability
  Evidence evidence;
  double evidence_probability = 1.0;
  bool consistent = true;

  double probability(const std::string& state) const;
};

/// Verifies identifiers, acyclicity, CPT shape and row normalisation, root
/// mapping placement and the intervention node. Throws ValidationError.
void validate_network(const ScenarioNetwork& net);

/// Node ids in a topological order; throws ValidationError listing a cycle.
std::vector<std::string> topological_order(const ScenarioNetwork& net);

/// Logistic function.
double logistic(double x);

/// Probability a trend mapping assigns to a projected mean.
double trend_probability(const RootMapping& mapping, double projected_mean);

struct Projection {
  double mean = 0.0;
  double std = 0.0;
};

/// Replaces the prior of every mapped root using projected parameter means and
/// actor attainments. The first state of a mapped root receives p.
ScenarioNetwork map_roots(const ScenarioNetwork& net, const std::map<std::string, Projection>& trends,
                          const std::map<std::string, double>& attainments);

/// Sets a binary root's prior so that its first state has probability p.
void set_root_prior(ScenarioNetwork& net, const std::string& root, double p);

/// Probability of the first state of a binary root.
double root_prior(const ScenarioNetwork& net, const std::string& root);

/// Exact posterior by variable elimination. When `order` is empty the
/// elimination order is chosen by the min-degree heuristic on the moral
/// graph; otherwise the given order is used (ids not needed are skipped).
PosteriorReport infer(const ScenarioNetwork& net, const std::string& query, const Evidence& evidence = {},
                      std::span<const std::string> order = {});

/// Brute-force posterior by summing the full joint distribution.
/// Throws DomainError when the joint has more than 2^20 configurations.
PosteriorReport enumerate_joint(const ScenarioNetwork& net, const std::string& query,
                                const Evidence& evidence = {});

inline constexpr std::size_t kMaxJointStates = std::size_t{1} << 20;

/// P(first state of the intervention node) with no evidence.
double intervention_probability(const ScenarioNetwork& net);

struct SensitivityPoint {
  double p_root = 0.0;
  double p_intervention = 0.0;
};

/// Shifts a root's prior by each delta (clamped to [0,1]) and re-infers the
/// intervention node. Throws ValidationError for non-root ids.
std::vector<SensitivityPoint> sensitivity(const ScenarioNetwork& net, const std::string& root,
                                          std::span<const double> deltas);

// JSON fixture format.
nlohmann::json to_json(const ScenarioNetwork& net);
ScenarioNetwork network_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json to_json(const RootMapping& m);
RootMapping root_mapping_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json to_json(const PosteriorReport& r);

}  // namespace themis::bbn
