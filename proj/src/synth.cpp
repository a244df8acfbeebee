#include "themis/synth.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "themis/error.hpp"
#include "themis/random.hpp"

namespace themis::synth {

namespace {

constexpr int kLags = 4;
constexpr int kShocks = 14;
constexpr int kWindow = 6;

// Moving-average coefficients, kTheta[lag][key][shock]. The lag-1 block
// restricted to the first seven shocks follows the sign pattern column by
// column; everything else was tuned numerically so the population lagged
// correlations of differenced keys sit near +/-0.5 on signed cells and near 0
// on the others.
constexpr double kTheta[kLags + 1][7][kShocks] = {
    {
        {0.680678, -0.050028, 0.037722, -0.328822, 0.000522, -0.010202, 0.066961, 0.329302, -0.083172, 0.720059, 0.156050, 0.172293, -0.110303, 0.038790},
        {-0.288656, 0.959703, -0.184047, -0.142255, 0.038167, 0.106415, 0.080309, -0.949888, 1.484207, -0.368719, -0.800898, 0.077652, -0.105999, 0.262662},
        {-0.292098, 0.058448, 0.793131, -0.184991, 0.072492, 0.105672, 0.014784, 0.097319, 0.330959, -0.457477, -0.115943, -0.181656, -0.169077, -0.407867},
        {-1.187209, -0.558514, -0.018220, 1.546445, 0.188827, 0.011387, 0.018044, -0.339163, -0.522146, -1.394727, -0.470607, -0.732149, 0.457918, -0.200957},
        {-0.447278, 0.060855, -0.931236, 0.512997, 0.013855, -0.113829, 0.123186, -0.717940, 0.072997, -0.283034, 0.023545, -0.210527, 0.010808, 0.282505},
        {-0.726084, 0.437507, -0.039864, 0.371941, 0.177029, 0.105773, 0.041850, -0.916098, 1.112463, -1.021521, -0.444444, -0.304777, -0.094777, -0.075234},
        {0.180550, 0.210670, -0.483168, -0.008017, 0.130247, -0.035471, 0.010722, -0.488921, 0.836294, -0.006296, 0.229520, -0.301549, -0.358211, -0.144847},
    },
    {
        {-0.605182, -0.953457, 1.287230, 0.417377, 0.000000, 0.000000, 0.000000, 0.927343, -1.181529, -0.707741, -0.214717, -0.206748, 0.440598, -0.324831},
        {-0.432471, 0.965133, 0.231382, -0.815943, 0.000000, 0.117905, 0.178901, -0.757036, 1.291584, -0.326703, -0.262688, 0.147204, -0.432288, -0.020295},
        {-1.814009, 0.420824, -0.679141, 1.328591, 0.012204, 0.000319, 0.000000, -1.229481, -0.133466, -1.720842, -1.089168, -0.175783, 0.667306, 0.485991},
        {0.000000, -0.467412, 0.000000, -0.205808, 0.000000, -0.033773, 0.000000, 0.925734, -1.927477, 0.280757, 1.110038, 0.051248, -0.210356, -0.832749},
        {-0.062298, 0.197688, 0.631499, 0.000000, 0.479324, 0.254580, 0.000174, -0.517710, 1.808672, -0.827446, 0.357972, -1.071127, -0.926568, -1.308762},
        {0.000000, 1.455991, 0.897477, -1.332451, 0.000000, 0.387030, 0.000000, -0.345014, 1.529930, -0.054893, -0.564323, 0.434615, -0.524630, -0.359544},
        {0.358782, 0.709674, 0.000000, 0.000000, 0.339785, 0.131151, 0.338331, -0.862446, 1.835111, 0.035788, -0.245382, -0.483593, -0.694924, -0.381658},
    },
    {
        {-1.498608, -0.337494, -0.807709, 1.271565, -0.250568, -0.028917, -0.082166, 0.396383, -2.836960, -0.724799, -0.583856, 0.589734, 1.439173, 0.716684},
        {-0.840782, 1.448754, -0.484037, 0.239635, 0.084087, 0.239143, 0.212235, -1.899571, 2.470279, -1.014008, -1.194589, -0.239645, -0.274820, 0.208740},
        {0.308387, 0.376845, -0.073261, -1.130699, -0.064930, -0.055318, -0.231295, -0.183508, 0.574405, 0.282965, 1.165543, -0.188855, -1.087260, -0.830073},
        {0.899914, -1.289556, -0.668806, 0.530056, 0.132848, -0.802721, -0.304251, -0.590841, 0.528655, -0.050722, 1.209859, -1.151916, -0.819284, -0.264828},
        {-0.406656, 1.159346, -0.223504, 0.128539, 0.414140, 0.095116, 0.463798, -1.301376, 1.161915, -0.883740, -0.772368, -0.145617, -0.389305, -0.258518},
        {-1.103233, 0.773227, -0.527693, 0.057300, -0.337021, -0.269577, 0.046590, -1.657519, 1.150178, -1.083490, -1.054615, 0.156419, 0.077561, 0.995037},
        {-0.945805, 0.090912, 1.445602, -0.242804, 0.278364, 0.140885, 0.438861, -0.018604, 0.361740, -1.261184, -0.451529, -0.405967, -0.272563, -0.934786},
    },
    {
        {1.397253, -1.083183, -0.330366, -0.664265, -0.163461, -0.492358, -0.758207, 0.630248, -0.414121, 1.092266, 2.053684, -0.413620, -0.939875, -0.523492},
        {-0.030622, 1.318347, 0.437017, -0.882087, 0.146256, 0.393712, 0.129523, -0.700662, 1.504113, -0.189403, -0.456910, 0.108916, -0.764735, -0.498733},
        {0.644231, 0.112550, -0.575193, 0.132868, 0.234640, -0.298231, 0.038571, -1.296329, 2.027849, -0.143922, 0.045893, -0.750531, -0.737096, -0.010202},
        {0.458578, -0.623321, 0.165294, -0.420790, 0.202026, -0.176089, 0.214716, 0.857860, -0.651412, 0.478631, 0.648798, -0.013652, 0.023914, -0.381074},
        {-0.461086, 0.193499, 0.269551, -0.887174, -0.115097, -0.443654, 0.112187, -1.079916, 1.551856, -0.902301, 0.565252, -0.650571, -1.259241, -0.561060},
        {-0.663459, 0.938055, -0.262719, -0.556028, -0.293900, 0.341584, -0.029547, -0.355808, 0.610107, 0.029863, -0.249194, 0.354458, -0.017778, 0.109968},
        {-1.880606, 0.668639, -0.891372, 0.955259, -0.056485, -0.117992, 0.265861, -1.357650, -0.273984, -1.607125, -1.082988, -0.013409, 0.521826, 0.404810},
    },
    {
        {0.845315, -0.536483, -0.249822, 0.161111, 0.212406, -0.217473, -0.019280, 0.176750, 0.269766, 0.512171, 0.395447, -0.277104, -0.019270, 0.035520},
        {-0.746883, 0.641540, -0.094381, 0.071158, -0.085961, 0.026175, 0.186683, -1.017986, 1.034277, -0.797611, -0.534167, -0.164873, -0.222833, 0.095015},
        {-0.265482, 0.352615, 0.211912, -0.416282, 0.083723, 0.077686, 0.264235, -0.128050, 0.421801, -0.155423, -0.168417, 0.059006, -0.164939, -0.202864},
        {0.051325, -0.529220, -0.061762, 0.271244, -0.071185, -0.235927, 0.077378, 0.223265, -0.399336, 0.039792, 0.259212, -0.119997, 0.158577, 0.117704},
        {-0.494183, 0.481075, -0.370546, 0.164804, 0.086624, 0.133438, 0.335721, -0.561795, 0.615276, -0.440109, -0.622424, -0.067012, 0.219481, 0.103307},
        {0.831569, 0.349093, -0.184021, 0.054692, 0.140783, 0.281628, -0.184904, -0.190110, 0.793871, 0.624582, -0.233882, -0.005904, -0.186202, 0.047201},
        {0.784341, -0.058176, 0.021595, -1.054657, -0.038080, -0.190281, -0.446433, -0.050175, 0.677275, 0.345935, 1.273979, -0.335191, -1.226136, -0.693820},
    },
};

ParameterProfile profile(std::string id, std::string domain, std::string units, std::string name, double level,
                         double spread, int cluster, bool key, double orientation, std::optional<double> lower,
                         std::optional<double> upper) {
  ParameterProfile p;
  p.definition = {std::move(id), std::move(domain), std::move(units), std::move(name), lower, upper};
  p.level = level;
  p.spread = spread;
  p.cluster = cluster;
  p.key = key;
  p.orientation = orientation;
  return p;
}

enum Cluster { M, G, L, R, H, S, W };

std::vector<ParameterProfile> build_profiles() {
  const std::optional<double> zero = 0.0;
  const std::optional<double> hundred = 100.0;
  const std::optional<double> none;
  return {
      profile("population", "Demography", "million persons", "Population", 32.0, 1.5, M, false, 1, zero, none),
      profile("growth", "Demography", "% per year", "Growth", 2.4, 0.25, M, false, -1, none, none),
      profile("migration", "Demography", "thousand net emigrants per year", "Migration", 85.0, 12.0, M, true, 1, none,
              none),
      profile("ethnicity", "Demography", "fractionalization index", "Ethnicity", 0.62, 0.03, M, false, 1, zero, 1.0),
      profile("labor_force", "Economic", "million persons", "Labor force", 11.5, 0.6, G, false, 1, zero, none),
      profile("gdp", "Economic", "billion USD, constant prices", "GDP", 410.0, 22.0, G, true, 1, zero, none),
      profile("unemployment", "Economic", "% of labor force", "Unemployment", 14.0, 1.5, G, false, -1, zero, hundred),
      profile("wealth_distribution", "Economic", "Gini index", "Wealth distribution", 44.0, 2.0, G, false, -1, zero,
              hundred),
      profile("trade_distribution", "Economic", "% of GDP", "Trade distribution", 38.0, 3.0, G, false, 1, zero, none),
      profile("primary_education", "Educational", "% enrolment", "Primary education", 88.0, 2.5, L, false, 1, zero,
              hundred),
      profile("secondary_education", "Educational", "% enrolment", "Secondary education", 54.0, 3.0, L, false, 1,
              zero, hundred),
      profile("tertiary_education", "Educational", "% enrolment", "Tertiary education", 12.0, 1.2, L, false, 1, zero,
              hundred),
      profile("literacy", "Educational", "% of adults", "Literacy", 71.0, 2.5, L, true, 1, zero, hundred),
      profile("scientists", "Educational", "per million people", "Number of scientists", 180.0, 15.0, R, false, -1,
              zero, none),
      profile("phds", "Educational", "doctorates awarded per year", "Number of Ph.D.'s", 950.0, 80.0, R, false, -1,
              zero, none),
      profile("religious_education", "Sociological", "% of pupils in religious schools", "Religious education", 22.0,
              2.5, R, true, 1, zero, hundred),
      profile("level_of_health", "Healthcare", "health index (0-100)", "Level of health", 61.0, 2.5, H, true, 1, zero,
              hundred),
      profile("health_care_coverage", "Healthcare", "% of population", "Coverage of health care", 58.0, 3.0, H,
              false, 1, zero, hundred),
      profile("life_expectancy", "Healthcare", "years", "Life expectancy", 66.0, 1.2, H, false, 1, zero, none),
      profile("interaction_frequency", "Sociological", "contacts per person per week",
              "Frequency of human interactions", 14.0, 1.2, S, false, 1, zero, none),
      profile("interaction_level", "Sociological", "interaction index (0-10)", "Level of human interactions", 5.2,
              0.35, S, false, 1, zero, 10.0),
      profile("status_of_women", "Sociological", "gender development index (0-100)", "Status of women", 48.0, 3.0, S,
              true, 1, zero, hundred),
      profile("arable_land", "Resources", "% of land area", "Arable land", 21.0, 1.2, W, false, 1, zero, hundred),
      profile("total_land", "Resources", "thousand km^2", "Total land", 640.0, 6.0, W, false, 1, zero, none),
      profile("potable_water", "Resources", "m^3 per person per year", "Potable water", 1450.0, 90.0, W, true, 1,
              zero, none),
  };
}

// Key -> dependent correlation per cluster. With s dependents the cluster's
// leading eigenvalue is 1 + s*rho^2; these give 2.6, 3.2, 2.9, 2.3, 2.0, 1.8,
// 1.6 so no two clusters tie.
constexpr double kClusterRho2[7] = {0.5333333333333333, 0.55, 0.6333333333333333, 0.65, 0.5, 0.4, 0.3};

// Correlation of each key with calendar time in the short panel.
constexpr double kTrendWeight[7] = {0.45, -0.30, -0.25, 0.50, -0.30, -0.30, -0.45};

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Modified Gram-Schmidt against `basis` (already orthonormal), then normalise.
bool orthonormalize(Vec& v, const std::vector<Vec>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) {
      const double c = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
    }
  const double norm = std::sqrt(dot(v, v));
  if (norm < 1e-8) return false;
  for (double& x : v) x /= norm;
  return true;
}

std::vector<ParameterSeries> to_series(const std::vector<ParameterProfile>& profiles, const std::vector<Vec>& z,
                                       int first_year) {
  std::vector<ParameterSeries> out;
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    ParameterSeries s;
    s.parameter = profiles[p].definition.id;
    for (std::size_t t = 0; t < z[p].size(); ++t)
      s.observations.push_back({first_year + static_cast<int>(t), profiles[p].level + profiles[p].spread * z[p][t]});
    out.push_back(std::move(s));
  }
  return out;
}

int key_slot(const std::vector<ParameterProfile>& profiles, int cluster) {
  for (std::size_t p = 0; p < profiles.size(); ++p)
    if (profiles[p].key && profiles[p].cluster == cluster) return static_cast<int>(p);
  throw DomainError("cluster without key variable");
}

}  // namespace

const std::vector<ParameterProfile>& country_x_profiles() {
  static const std::vector<ParameterProfile> profiles = build_profiles();
  return profiles;
}

std::vector<ParameterDefinition> country_x_parameters() {
  std::vector<ParameterDefinition> out;
  for (const auto& p : country_x_profiles()) out.push_back(p.definition);
  return out;
}

std::vector<ParameterSeries> sign_panel(std::uint64_t seed, int length, int first_year) {
  if (length < 4) throw ValidationError("sign panel needs at least 4 years");
  const auto& profiles = country_x_profiles();
  const int n = length;
  const int total = n + kWindow + kLags;

  rng::Stream shocks(seed, {0x5167});
  std::vector<std::array<double, kShocks>> e(static_cast<std::size_t>(total));
  for (auto& row : e)
    for (double& x : row) x = shocks.normal();

  std::vector<std::array<double, 7>> y(static_cast<std::size_t>(total - kLags));
  for (int t = kLags; t < total; ++t) {
    auto& out = y[static_cast<std::size_t>(t - kLags)];
    out.fill(0.0);
    for (int l = 0; l <= kLags; ++l)
      for (int i = 0; i < 7; ++i)
        for (int k = 0; k < kShocks; ++k) out[i] += kTheta[l][i][k] * e[static_cast<std::size_t>(t - l)][k];
  }

  std::vector<Vec> keys(7, Vec(static_cast<std::size_t>(n), 0.0));
  for (int t = 0; t < n; ++t)
    for (int u = 0; u < kWindow; ++u)
      for (int i = 0; i < 7; ++i) keys[i][t] += y[static_cast<std::size_t>(t + u)][i];
  for (auto& k : keys) {
    double mean = 0.0;
    for (double v : k) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : k) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1));
    for (double& v : k) v = (v - mean) / sd;
  }

  rng::Stream noise(seed, {0x4e6f});
  std::vector<Vec> z(profiles.size());
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    const auto& pr = profiles[p];
    const Vec& key = keys[pr.cluster];
    if (pr.key) {
      z[p] = key;
      continue;
    }
    const double rho = std::sqrt(kClusterRho2[pr.cluster]);
    z[p].resize(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) z[p][t] = pr.orientation * (rho * key[t] + std::sqrt(1 - rho * rho) * noise.normal());
  }
  return to_series(profiles, z, first_year);
}

std::vector<ParameterSeries> country_x_panel(std::uint64_t seed, int first_year, int length) {
  const auto& profiles = country_x_profiles();
  const std::size_t n = static_cast<std::size_t>(length);
  // constant + trend + 6 key directions + 11 within-cluster noise directions
  if (length < 19) throw ValidationError("Country X panel needs at least 19 years");
  const double scale = std::sqrt(static_cast<double>(n - 1));  // unit vector -> unit sample variance

  std::vector<Vec> basis;
  basis.push_back(Vec(n, 1.0 / std::sqrt(static_cast<double>(n))));
  Vec trend(n);
  for (std::size_t t = 0; t < n; ++t) trend[t] = static_cast<double>(t);
  orthonormalize(trend, basis);
  basis.push_back(trend);

  rng::Stream draws(seed, {0x4358});
  while (basis.size() < 19) {
    // Random walks give smooth, series-like directions.
    Vec v(n);
    double level = 0.0;
    for (double& x : v) x = (level += draws.normal());
    if (orthonormalize(v, basis)) basis.push_back(std::move(v));
  }

  // Orthogonal 7x7 rotation whose first column is the trend weighting.
  std::vector<Vec> rot;
  {
    Vec first(kTrendWeight, kTrendWeight + 7);
    orthonormalize(first, {});
    rot.push_back(first);
    while (rot.size() < 7) {
      Vec v(7);
      for (double& x : v) x = draws.normal();
      if (orthonormalize(v, rot)) rot.push_back(std::move(v));
    }
  }

  std::vector<Vec> keys(7, Vec(n, 0.0));
  for (int k = 0; k < 7; ++k)
    for (int l = 0; l < 7; ++l)
      for (std::size_t t = 0; t < n; ++t) keys[k][t] += rot[l][k] * basis[1 + l][t] * scale;

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t p = 0; p < profiles.size(); ++p)
    if (!profiles[p].key) members[profiles[p].cluster].push_back(p);

  std::vector<Vec> z(profiles.size());
  std::size_t next_noise = 8;
  for (const auto& [cluster, deps] : members) {
    const std::size_t s = deps.size();
    if (s < 2) throw DomainError("each cluster needs at least two dependents");
    // Helmert contrasts: s points in s-1 dimensions, equal norm, summing to zero.
    std::vector<Vec> v(s, Vec(n, 0.0));
    for (std::size_t j = 1; j < s; ++j) {
      const Vec& u = basis[next_noise++];
      const double norm = std::sqrt(static_cast<double>(j * (j + 1)));
      for (std::size_t m = 0; m < s; ++m) {
        double h = m < j ? 1.0 : (m == j ? -static_cast<double>(j) : 0.0);
        h /= norm;
        for (std::size_t t = 0; t < n; ++t) v[m][t] += h * u[t];
      }
    }
    const double stretch = std::sqrt(static_cast<double>(s) / static_cast<double>(s - 1)) * scale;
    const double rho = std::sqrt(kClusterRho2[cluster]);
    const Vec& key = keys[cluster];
    for (std::size_t m = 0; m < s; ++m) {
      const auto& pr = profiles[deps[m]];
      Vec& out = z[deps[m]];
      out.resize(n);
      for (std::size_t t = 0; t < n; ++t)
        out[t] = pr.orientation * (rho * key[t] + std::sqrt(1 - rho * rho) * stretch * v[m][t]);
    }
  }
  for (int k = 0; k < 7; ++k) z[static_cast<std::size_t>(key_slot(profiles, k))] = keys[k];
  return to_series(profiles, z, first_year);
}

std::string to_csv(const std::vector<ParameterSeries>& series, const std::vector<ParameterDefinition>& parameters) {
  std::ostringstream out;
  out << "parameter_id,domain,year,value\n";
  for (const auto& s : series) {
    std::string domain;
    for (const auto& p : parameters)
      if (p.id == s.parameter) domain = p.domain;
    for (const auto& o : s.observations) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", o.value);
      out << s.parameter << ',' << domain << ',' << o.year << ',' << buf << '\n';
    }
  }
  return out.str();
}

}  // namespace themis::synth
