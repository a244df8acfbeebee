#include "themis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "themis/error.hpp"

namespace themis::analysis {

using nlohmann::json;

std::size_t StandardizedPanel::index_of(const std::string& id) const {
  auto it = std::find(variables.begin(), variables.end(), id);
  if (it == variables.end()) throw ValidationError("variable '" + id + "' is not in the panel");
  return static_cast<std::size_t>(it - variables.begin());
}

StandardizedPanel standardize(const std::vector<ParameterSeries>& series, std::optional<std::pair<int, int>> years) {
  if (series.empty()) throw DomainError("no series to standardize");
  std::set<int> common;
  for (const auto& o : series.front().observations)
    if (!years || (o.year >= years->first && o.year <= years->second)) common.insert(o.year);
  for (std::size_t s = 1; s < series.size(); ++s) {
    std::set<int> here;
    for (const auto& o : series[s].observations)
      if (common.count(o.year)) here.insert(o.year);
    common = std::move(here);
  }
  if (common.empty()) throw DomainError("series share no common years");
  if (common.size() < 2) throw DomainError("fewer than 2 common years");

  StandardizedPanel panel;
  panel.years.assign(common.begin(), common.end());
  const std::size_t n = panel.years.size();
  const std::size_t m = series.size();
  panel.values = linalg::Matrix(n, m);
  panel.means.resize(m);
  panel.stds.resize(m);
  panel.constant.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    panel.variables.push_back(series[c].parameter);
    std::vector<double> col;
    col.reserve(n);
    for (const auto& o : series[c].observations)
      if (common.count(o.year)) col.push_back(o.value);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const bool flat = std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); }) ||
                      sd <= 1e-12 * std::max(1.0, std::abs(mean));
    panel.means[c] = mean;
    panel.stds[c] = flat ? 0.0 : sd;
    panel.constant[c] = flat;
    for (std::size_t r = 0; r < n; ++r) panel.values(r, c) = flat ? 0.0 : (col[r] - mean) / sd;
  }
  return panel;
}

PcaResult pca_from_covariance(const linalg::Matrix& covariance, std::vector<std::string> variables) {
  const std::size_t n = covariance.rows();
  if (n == 0 || covariance.cols() != n) throw ValidationError("covariance must be a non-empty square matrix");
  if (variables.empty())
    for (std::size_t i = 0; i < n; ++i) variables.push_back("v" + std::to_string(i));
  auto eig = linalg::jacobi_eigen(covariance);
  PcaResult out;
  out.variables = std::move(variables);
  out.covariance = covariance;
  out.components = eig.vectors;
  out.sweeps = eig.sweeps;
  out.eigenvalues = eig.values;
  double total = 0.0;
  for (auto& v : out.eigenvalues) {
    if (v < 0.0) v = 0.0;
    total += v;
  }
  if (total <= 0.0) throw DomainError("covariance has no variance");
  for (double v : out.eigenvalues) out.explained_variance_ratio.push_back(v / total);
  return out;
}

PcaResult pca(const StandardizedPanel& panel) {
  const std::size_t n = panel.years.size();
  const std::size_t m = panel.variables.size();
  if (m < 2) throw ValidationError("PCA needs at least 2 variables");
  if (n < 2) throw ValidationError("PCA needs at least 2 years");
  if (std::all_of(panel.constant.begin(), panel.constant.end(), [](bool b) { return b; }))
    throw DomainError("every column of the panel is constant");
  linalg::Matrix cov(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += panel.values(r, i) * panel.values(r, j);
      cov(i, j) = cov(j, i) = s / static_cast<double>(n - 1);
    }
  return pca_from_covariance(cov, panel.variables);
}

bool KeyVariableSet::contains(const std::string& id) const {
  return std::find(selected.begin(), selected.end(), id) != selected.end();
}

KeyVariableSet select_key_variables(const PcaResult& result, const StandardizedPanel& panel, double variance_threshold,
                                    std::size_t max_vars) {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw ValidationError("variance_threshold must be in (0, 1]");
  if (max_vars < 1) throw ValidationError("max_vars must be >= 1");
  if (result.variables != panel.variables) throw ValidationError("PCA result does not belong to this panel");

  const std::size_t m = result.eigenvalues.size();
  std::size_t retained = 0;
  double cumulative = 0.0;
  while (retained < m) {
    cumulative += result.explained_variance_ratio[retained];
    ++retained;
    if (cumulative >= variance_threshold - 1e-12) break;
  }

  KeyVariableSet keys;
  keys.components_retained = retained;
  for (std::size_t k = 0; k < retained && keys.selected.size() < max_vars; ++k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (std::abs(result.components(i, k)) > std::abs(result.components(best, k)) + 1e-12) best = i;
    const std::string& id = result.variables[best];
    if (keys.contains(id)) continue;
    keys.selected.push_back(id);
    keys.trace.push_back({id, k, result.components(best, k), result.explained_variance_ratio[k]});
  }
  return keys;
}

KeyVariableSet fixed_key_variables(std::vector<std::string> ids) {
  KeyVariableSet keys;
  for (auto& id : ids) {
    if (keys.contains(id)) continue;
    keys.trace.push_back({id, 0, 0.0, 0.0});
    keys.selected.push_back(std::move(id));
  }
  return keys;
}

char glyph(Sign s) {
  switch (s) {
    case Sign::self: return '1';
    case Sign::plus: return '+';
    case Sign::minus: return '-';
    case Sign::none: return 'x';
  }
  return '?';
}

Sign sign_from_glyph(char c) {
  switch (c) {
    case '1': return Sign::self;
    case '+': return Sign::plus;
    case '-': return Sign::minus;
    case 'x':
    case 'X':
    case '.': return Sign::none;
  }
  throw ParseError(std::string("unknown sign glyph '") + c + "'");
}

std::string to_string(Sign s) {
  switch (s) {
    case Sign::self: return "self";
    case Sign::plus: return "plus";
    case Sign::minus: return "minus";
    case Sign::none: return "none";
  }
  return "?";
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

SignMatrix estimate_signs(const StandardizedPanel& panel, const KeyVariableSet& keys, const AdjacencyMatrix* adjacency,
                          double r_threshold) {
  if (!(r_threshold > 0.0 && r_threshold < 1.0)) throw ValidationError("r_threshold must be in (0, 1)");
  const std::size_t k = keys.selected.size();
  std::vector<std::size_t> cols;
  for (const auto& id : keys.selected) cols.push_back(panel.index_of(id));

  // Indices t where years t-1, t, t+1 are consecutive calendar years.
  std::vector<std::size_t> anchors;
  for (std::size_t t = 1; t + 1 < panel.years.size(); ++t)
    if (panel.years[t] - panel.years[t - 1] == 1 && panel.years[t + 1] - panel.years[t] == 1) anchors.push_back(t);

  SignMatrix out;
  out.variables = keys.selected;
  out.entries.assign(k * k, Sign::none);
  out.evidence.assign(k * k, SignEvidence{});
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t cell = i * k + j;
      if (i == j) {
        out.entries[cell] = Sign::self;
        out.evidence[cell].r = 1.0;
        continue;
      }
      SignEvidence& ev = out.evidence[cell];
      if (adjacency) {
        auto ai = adjacency->index_of(keys.selected[i]);
        auto aj = adjacency->index_of(keys.selected[j]);
        if (ai && aj && !adjacency->related(*ai, *aj)) {
          ev.excluded = true;
          continue;
        }
      }
      ev.pairs = anchors.size();
      if (anchors.size() < 3) {
        ev.insufficient = true;
        continue;
      }
      std::vector<double> cause, effect;
      cause.reserve(anchors.size());
      effect.reserve(anchors.size());
      for (std::size_t t : anchors) {
        cause.push_back(panel.values(t, cols[i]) - panel.values(t - 1, cols[i]));
        effect.push_back(panel.values(t + 1, cols[j]) - panel.values(t, cols[j]));
      }
      ev.r = pearson(cause, effect);
      if (ev.r >= r_threshold)
        out.entries[cell] = Sign::plus;
      else if (ev.r <= -r_threshold)
        out.entries[cell] = Sign::minus;
    }
  }
  return out;
}

AdjacencyMatrix estimate_adjacency(const StandardizedPanel& panel, double min_abs_corr) {
  AdjacencyMatrix adj(panel.variables);
  const std::size_t m = panel.variables.size();
  const std::size_t n = panel.years.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      if (panel.constant[i] || panel.constant[j]) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += panel.values(r, i) * panel.values(r, j);
      const bool rel = std::abs(s / static_cast<double>(n - 1)) >= min_abs_corr;
      adj.set(i, j, rel);
      adj.set(j, i, rel);
    }
  return adj;
}

TrendModel fit_trend(const ParameterSeries& series, std::optional<int> window) {
  std::vector<Observation> obs = series.observations;
  if (window && !obs.empty()) {
    if (*window < 2) throw ValidationError("trend window must be >= 2 years");
    const int last = obs.back().year;
    obs.erase(std::remove_if(obs.begin(), obs.end(), [&](const Observation& o) { return o.year <= last - *window; }),
              obs.end());
  }
  if (obs.size() < 2) throw DomainError("trend for '" + series.parameter + "' needs at least 2 observations");
  std::set<int> distinct;
  for (const auto& o : obs) distinct.insert(o.year);
  if (distinct.size() < 2) throw DomainError("trend for '" + series.parameter + "' has all years identical");

  TrendModel t;
  t.parameter = series.parameter;
  t.n = obs.size();
  t.first_year = obs.front().year;
  t.last_year = obs.back().year;
  for (const auto& o : obs) {
    t.first_year = std::min(t.first_year, o.year);
    t.last_year = std::max(t.last_year, o.year);
  }
  const double n = static_cast<double>(t.n);
  double my = 0.0, mv = 0.0;
  for (const auto& o : obs) {
    my += o.year;
    mv += o.value;
  }
  my /= n;
  mv /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& o : obs) {
    sxx += (o.year - my) * (o.year - my);
    sxy += (o.year - my) * (o.value - mv);
  }
  t.mean_year = my;
  t.sxx = sxx;
  t.slope = sxy / sxx;
  t.intercept = mv - t.slope * my;
  if (t.n > 2) {
    double sse = 0.0, scale = 0.0;
    for (const auto& o : obs) {
      const double e = o.value - (mv + t.slope * (o.year - my));
      sse += e * e;
      scale = std::max(scale, std::abs(o.value));
    }
    const double rs = std::sqrt(sse / (n - 2.0));
    t.residual_std = rs <= 1e-13 * std::max(1.0, scale) ? 0.0 : rs;
  }
  return t;
}

bbn::Projection extrapolate(const TrendModel& trend, int target_year) {
  if (target_year < trend.last_year)
    throw DomainError("target year " + std::to_string(target_year) + " precedes the fit window of '" +
                      trend.parameter + "'");
  bbn::Projection p;
  p.mean = trend.slope * target_year + trend.intercept;
  const double d = target_year - trend.mean_year;
  p.std = trend.residual_std * std::sqrt(1.0 + 1.0 / static_cast<double>(trend.n) + d * d / trend.sxx);
  return p;
}

json to_json(const KeyVariableSet& keys) {
  json trace = json::array();
  for (const auto& t : keys.trace)
    trace.push_back(
        {{"variable", t.variable}, {"component", t.component}, {"loading", t.loading}, {"explained", t.explained}});
  return {{"selected", keys.selected}, {"components_retained", keys.components_retained}, {"trace", trace}};
}

KeyVariableSet key_variables_from_json(const json& j) {
  KeyVariableSet keys;
  keys.selected = j.at("selected").get<std::vector<std::string>>();
  keys.components_retained = j.at("components_retained").get<std::size_t>();
  for (const auto& t : j.at("trace"))
    keys.trace.push_back({t.at("variable").get<std::string>(), t.at("component").get<std::size_t>(),
                          t.at("loading").get<double>(), t.at("explained").get<double>()});
  return keys;
}

json to_json(const SignMatrix& s) {
  const std::size_t k = s.size();
  json glyphs = json::array(), r = json::array(), pairs = json::array(), flags = json::array();
  for (std::size_t i = 0; i < k; ++i) {
    std::string row;
    json rr = json::array(), pr = json::array(), fr = json::array();
    for (std::size_t j = 0; j < k; ++j) {
      row.push_back(glyph(s.at(i, j)));
      const auto& ev = s.evidence_at(i, j);
      rr.push_back(ev.r);
      pr.push_back(ev.pairs);
      fr.push_back(ev.excluded ? "excluded" : ev.insufficient ? "insufficient" : "");
    }
    glyphs.push_back(row);
    r.push_back(rr);
    pairs.push_back(pr);
    flags.push_back(fr);
  }
  return {{"variables", s.variables}, {"glyphs", glyphs}, {"r", r}, {"pairs", pairs}, {"flags", flags}};
}

SignMatrix sign_matrix_from_json(const json& j) {
  SignMatrix s;
  s.variables = j.at("variables").get<std::vector<std::string>>();
  const std::size_t k = s.variables.size();
  s.entries.resize(k * k);
  s.evidence.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::string row = j.at("glyphs").at(i).get<std::string>();
    if (row.size() != k) throw ParseError("sign row has wrong length", "/glyphs/" + std::to_string(i));
    for (std::size_t c = 0; c < k; ++c) {
      s.entries[i * k + c] = sign_from_glyph(row[c]);
      auto& ev = s.evidence[i * k + c];
      ev.r = j.at("r").at(i).at(c).get<double>();
      ev.pairs = j.at("pairs").at(i).at(c).get<std::size_t>();
      const std::string flag = j.at("flags").at(i).at(c).get<std::string>();
      ev.excluded = flag == "excluded";
      ev.insufficient = flag == "insufficient";
    }
  }
  return s;
}

json to_json(const TrendModel& t) {
  return {{"parameter", t.parameter}, {"slope", t.slope},         {"intercept", t.intercept},
          {"residual_std", t.residual_std}, {"first_year", t.first_year}, {"last_year", t.last_year},
          {"n", t.n},                   {"mean_year", t.mean_year}, {"sxx", t.sxx}};
}

TrendModel trend_from_json(const json& j) {
  TrendModel t;
  t.parameter = j.at("parameter").get<std::string>();
  t.slope = j.at("slope").get<double>();
  t.intercept = j.at("intercept").get<double>();
  t.residual_std = j.at("residual_std").get<double>();
  t.first_year = j.at("first_year").get<int>();
  t.last_year = j.at("last_year").get<int>();
  t.n = j.at("n").get<std::size_t>();
  t.mean_year = j.at("mean_year").get<double>();
  t.sxx = j.at("sxx").get<double>();
  return t;
}

std::string format_sign_table(const SignMatrix& s) {
  std::size_t width = 0;
  for (const auto& v : s.variables) width = std::max(width, v.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width) + 2) << "";
  for (std::size_t j = 0; j < s.size(); ++j) out << ' ' << static_cast<char>('A' + j);
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::string label = std::string(1, static_cast<char>('A' + i)) + " " + s.variables[i];
    out << std::left << std::setw(static_cast<int>(width) + 2) << label;
    for (std::size_t j = 0; j < s.size(); ++j) out << ' ' << glyph(s.at(i, j));
    out << '\n';
  }
  return out.str();
}

}  // namespace themis::analysis
