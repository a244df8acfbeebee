#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "themis/bbn.hpp"

namespace themis {

inline constexpr int kFormatVersion = 1;

struct ParameterDefinition {
  std::string id;
  std::string domain;
  std::string units;
  std::string display_name;
  // Physical bounds used to truncate Monte Carlo draws.
  std::optional<double> lower;
  std::optional<double> upper;

  bool operator==(const ParameterDefinition&) const = default;
};

struct Observation {
  int year = 0;
  double value = 0.0;
  bool operator==(const Observation&) const = default;
};

struct ParameterSeries {
  std::string parameter;
  std::vector<Observation> observations;  // years strictly increasing

  bool operator==(const ParameterSeries&) const = default;
};

/// Boolean relatedness over an ordered variable list. Diagonal always true.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::vector<std::string> variables);

  const std::vector<std::string>& variables() const { return variables_; }
  std::size_t size() const { return variables_.size(); }
  bool related(std::size_t i, std::size_t j) const { return cells_[i * variables_.size() + j] != 0; }
  bool related(const std::string& a, const std::string& b) const;
  void set(std::size_t i, std::size_t j, bool value);
  std::optional<std::size_t> index_of(const std::string& id) const;
  std::size_t count_related() const;

  bool operator==(const AdjacencyMatrix&) const = default;

 private:
  std::vector<std::string> variables_;
  std::vector<std::uint8_t> cells_;
};

struct ActorType {
  enum class Kind { A, B, C, other };
  Kind kind = Kind::A;
  std::string name;  // label for `other`

  static ActorType parse(const std::string& s);
  std::string label() const;
  bool operator==(const ActorType&) const = default;
};

enum class Penalize { under, over, both };
enum class Relation { le, eq, ge };

using Coefficients = std::map<std::string, double>;

struct Goal {
  std::string name;
  Coefficients expression;
  double target = 0.0;
  double weight = 1.0;
  Penalize penalize = Penalize::both;

  bool operator==(const Goal&) const = default;
};

/// Right-hand side bound to a projected parameter: rhs = scale * mean + offset.
struct RhsBinding {
  std::string parameter;
  double scale = 1.0;
  double offset = 0.0;
  bool operator==(const RhsBinding&) const = default;
};

struct LinearConstraint {
  Coefficients coefficients;
  Relation relation = Relation::le;
  double rhs = 0.0;
  std::optional<RhsBinding> rhs_from;

  bool operator==(const LinearConstraint&) const = default;
};

struct VariableBound {
  double lower = 0.0;
  std::optional<double> upper;
  bool operator==(const VariableBound&) const = default;
};

struct ActorSpec {
  std::string id;
  ActorType actor_type;
  Coefficients objective_coefficients;
  std::vector<Goal> goals;
  std::vector<LinearConstraint> constraints;
  std::map<std::string, VariableBound> bounds;
  nlohmann::json metadata = nlohmann::json::object();

  bool operator==(const ActorSpec&) const = default;
};

struct RegionModel {
  int format_version = kFormatVersion;
  std::string region_name;
  int horizon_years = 25;
  std::string theory = "trend_baseline";
  std::vector<ParameterDefinition> parameters;
  std::vector<ParameterSeries> series;
  std::optional<AdjacencyMatrix> adjacency;
  std::vector<ActorSpec> actors;
  // The first network is the primary scenario template; further entries are
  // alternative scenarios aggregated by weight.
  std::vector<bbn::ScenarioNetwork> scenarios;
  nlohmann::json metadata = nlohmann::json::object();

  const ParameterDefinition* find_parameter(const std::string& id) const;
  const ParameterSeries* find_series(const std::string& id) const;
  const ActorSpec* find_actor(const std::string& id) const;
  std::vector<std::string> domains() const;  // in first-appearance order
  int last_observed_year() const;

  bool operator==(const RegionModel&) const = default;
};

// Document (de)serialisation. Errors carry a JSON-pointer path.
nlohmann::json to_json(const RegionModel& model);
RegionModel model_from_json(const nlohmann::json& doc);

/// Throws ValidationError naming the first offending path.
void validate(const RegionModel& model);

RegionModel load_region_model(const std::filesystem::path& path);
void save_region_model(const RegionModel& model, const std::filesystem::path& path);

/// Merges rows of a `parameter_id,domain,year,value` CSV into a copy of the
/// model. Throws ValidationError / ParseError naming the line.
RegionModel ingest_series(const RegionModel& model, const std::filesystem::path& csv);
RegionModel ingest_series_text(const RegionModel& model, const std::string& csv_text);

/// 64-bit FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string fingerprint(const RegionModel& model);
std::string fnv1a_hex(const std::string& bytes);

std::string to_string(Relation r);
std::string to_string(Penalize p);

nlohmann::json to_json(const ActorSpec& actor);
ActorSpec actor_from_json(const nlohmann::json& j, const std::string& path = "");

}  // namespace themis
