#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "themis/model.hpp"

namespace themis::synth {

/// The seven key variables, in sign-table row order.
inline const std::array<std::string, 7> kKeyVariables = {
    "migration", "gdp", "literacy", "religious_education", "level_of_health", "status_of_women", "potable_water"};

struct ParameterProfile {
  ParameterDefinition definition;
  double level = 0.0;   // typical value
  double spread = 1.0;  // one standard deviation in physical units
  int cluster = 0;      // index into kKeyVariables
  bool key = false;
  double orientation = 1.0;  // +1 moves with its key, -1 against
};

/// The 25 Country X parameters in roster order.
const std::vector<ParameterProfile>& country_x_profiles();
std::vector<ParameterDefinition> country_x_parameters();

/// Long panel whose key variables carry the reference lagged sign pattern.
/// Keys are six-year moving sums of a vector moving-average process driven by
/// 14 standard normal shocks; other parameters are noisy copies of their key.
std::vector<ParameterSeries> sign_panel(std::uint64_t seed, int length = 200, int first_year = 1825);

/// Short panel (>= 19 years) built so that correlation PCA isolates one
/// cluster per key variable: keys are mutually uncorrelated, each dependent
/// correlates with its key only, and within-cluster noise sums to zero.
std::vector<ParameterSeries> country_x_panel(std::uint64_t seed, int first_year = 2005, int length = 20);

/// `parameter_id,domain,year,value` rows for the given series.
std::string to_csv(const std::vector<ParameterSeries>& series, const std::vector<ParameterDefinition>& parameters);

}  // namespace themis::synth
