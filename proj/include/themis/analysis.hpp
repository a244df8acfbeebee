#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "themis/linalg.hpp"
#include "themis/model.hpp"

namespace themis::analysis {

struct StandardizedPanel {
  std::vector<std::string> variables;
  std::vector<int> years;
  linalg::Matrix values;  // years x variables, z-scores
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<bool> constant;

  std::size_t index_of(const std::string& id) const;  // throws ValidationError
};

/// Restricts the series to the years they all share (optionally clipped to
/// [first, last]) and converts each column to z-scores with the sample
/// standard deviation. Constant columns are flagged and zeroed.
StandardizedPanel standardize(const std::vector<ParameterSeries>& series,
                              std::optional<std::pair<int, int>> years = std::nullopt);

struct PcaResult {
  std::vector<std::string> variables;
  linalg::Matrix covariance;
  std::vector<double> eigenvalues;  // descending, clamped at 0
  linalg::Matrix components;        // column k is the loading vector of component k
  std::vector<double> explained_variance_ratio;
  int sweeps = 0;
};

PcaResult pca(const StandardizedPanel& panel);

/// Eigen-analysis of an already-formed covariance matrix.
PcaResult pca_from_covariance(const linalg::Matrix& covariance, std::vector<std::string> variables = {});

struct Nomination {
  std::string variable;
  std::size_t component = 0;
  double loading = 0.0;
  double explained = 0.0;  // explained variance ratio of the nominating component
};

struct KeyVariableSet {
  std::vector<std::string> selected;
  std::vector<Nomination> trace;  // one entry per selected variable
  std::size_t components_retained = 0;

  bool contains(const std::string& id) const;
};

/// Keeps the shortest prefix of components reaching `variance_threshold`;
/// each retained component nominates its largest-|loading| variable (earliest
/// variable wins ties). Duplicates are dropped and the list truncated.
KeyVariableSet select_key_variables(const PcaResult& pca, const StandardizedPanel& panel,
                                    double variance_threshold = 0.90, std::size_t max_vars = 7);

/// Builds a key set directly from ids, for callers that fix the variables.
KeyVariableSet fixed_key_variables(std::vector<std::string> ids);

enum class Sign { self, plus, minus, none };

/// `1`, `+`, `-`, `x`.
char glyph(Sign s);
Sign sign_from_glyph(char c);
std::string to_string(Sign s);

struct SignEvidence {
  double r = 0.0;
  std::size_t pairs = 0;
  bool insufficient = false;
  bool excluded = false;  // adjacency rules the pair out
};

struct SignMatrix {
  std::vector<std::string> variables;
  std::vector<Sign> entries;          // row-major, row = cause, column = effect
  std::vector<SignEvidence> evidence;  // same layout

  std::size_t size() const { return variables.size(); }
  Sign at(std::size_t i, std::size_t j) const { return entries[i * variables.size() + j]; }
  const SignEvidence& evidence_at(std::size_t i, std::size_t j) const { return evidence[i * variables.size() + j]; }
};

/// Pearson correlation between x_i(t) - x_i(t-1) and x_j(t+1) - x_j(t) over
/// runs of consecutive panel years. Pairs outside `adjacency` are `none`.
SignMatrix estimate_signs(const StandardizedPanel& panel, const KeyVariableSet& keys,
                          const AdjacencyMatrix* adjacency = nullptr, double r_threshold = 0.3);

/// Relatedness from contemporaneous |correlation| >= min_abs_corr.
AdjacencyMatrix estimate_adjacency(const StandardizedPanel& panel, double min_abs_corr = 0.5);

struct TrendModel {
  std::string parameter;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_std = 0.0;
  int first_year = 0;
  int last_year = 0;
  std::size_t n = 0;
  double mean_year = 0.0;
  double sxx = 0.0;  // sum of squared year deviations
};

/// Straight-line OLS over the observations, optionally limited to the last
/// `window` years of the series.
TrendModel fit_trend(const ParameterSeries& series, std::optional<int> window = std::nullopt);

bbn::Projection extrapolate(const TrendModel& trend, int target_year);

// Serialisation used by the run record.
nlohmann::json to_json(const KeyVariableSet& keys);
nlohmann::json to_json(const SignMatrix& signs);
nlohmann::json to_json(const TrendModel& trend);
KeyVariableSet key_variables_from_json(const nlohmann::json& j);
SignMatrix sign_matrix_from_json(const nlohmann::json& j);
TrendModel trend_from_json(const nlohmann::json& j);

/// Human-readable table: one row per cause, glyph cells.
std::string format_sign_table(const SignMatrix& signs);

}  // namespace themis::analysis
