#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "themis/analysis.hpp"
#include "themis/random.hpp"
#include "themis/synth.hpp"

using namespace themis;

namespace {

// Rows are causes, columns effects, both in key-variable order.
const std::array<std::string, 7> kTable = {
    "1--x-x+",
    "-1+-+++",
    "++1x++x",
    "+-+1x-x",
    "-++x1x+",
    "-++-+1+",
    "-+xx+x1",
};

// Lagged first-difference correlation straight from the raw values.
double lagged_r(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> a, b;
  for (std::size_t t = 1; t + 1 < x.size(); ++t) {
    a.push_back(x[t] - x[t - 1]);
    b.push_back(y[t + 1] - y[t]);
  }
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> values_of(const std::vector<ParameterSeries>& panel, const std::string& id) {
  for (const auto& s : panel)
    if (s.parameter == id) {
      std::vector<double> v;
      for (const auto& o : s.observations) v.push_back(o.value);
      return v;
    }
  return {};
}

char oracle_glyph(double r, double threshold) {
  if (r >= threshold) return '+';
  if (r <= -threshold) return '-';
  return 'x';
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("sign panel reproduces the relationship table") {
    const auto panel = synth::sign_panel(117, 200);
    const std::vector<std::string> keys(synth::kKeyVariables.begin(), synth::kKeyVariables.end());
    const auto z = analysis::standardize(panel);
    const auto signs = analysis::estimate_signs(z, analysis::fixed_key_variables(keys));
    int matched = 0;
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) {
        if (i == j) continue;
        const char want = kTable[i][j];
        const char oracle = oracle_glyph(lagged_r(values_of(panel, keys[i]), values_of(panel, keys[j])), 0.3);
        CHECK_MESSAGE(oracle == want, keys[i], " -> ", keys[j]);
        CHECK(analysis::glyph(signs.at(i, j)) == oracle);
        matched += analysis::glyph(signs.at(i, j)) == want;
      }
    CHECK(matched == 42);
  }

  TEST_CASE("negating a series flips its row and column") {
    auto panel = synth::sign_panel(117, 200);
    const std::vector<std::string> keys(synth::kKeyVariables.begin(), synth::kKeyVariables.end());
    const auto base = analysis::estimate_signs(analysis::standardize(panel), analysis::fixed_key_variables(keys));
    for (auto& s : panel)
      if (s.parameter == "gdp")
        for (auto& o : s.observations) o.value = -o.value;
    const auto flipped = analysis::estimate_signs(analysis::standardize(panel), analysis::fixed_key_variables(keys));
    auto flip = [](analysis::Sign s) {
      if (s == analysis::Sign::plus) return analysis::Sign::minus;
      if (s == analysis::Sign::minus) return analysis::Sign::plus;
      return s;
    };
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) {
        const bool touched = (i == 1) != (j == 1);
        CHECK(flipped.at(i, j) == (touched ? flip(base.at(i, j)) : base.at(i, j)));
      }
  }

  TEST_CASE("bundled series are the seeded Country X panel") {
    const auto m = test::bundled_model();
    const auto panel = synth::country_x_panel(7);
    REQUIRE(panel.size() == m.series.size());
    for (std::size_t p = 0; p < panel.size(); ++p) {
      CHECK(panel[p].parameter == m.series[p].parameter);
      CHECK(panel[p].observations == m.series[p].observations);
    }
    CHECK(panel.front().observations.front().year == 2005);
    CHECK(panel.front().observations.back().year == 2024);
  }

  TEST_CASE("Country X panel isolates seven key clusters for other seeds") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto z = analysis::standardize(synth::country_x_panel(seed));
      const auto keys = analysis::select_key_variables(analysis::pca(z), z, 0.90, 7);
      const std::set<std::string> got(keys.selected.begin(), keys.selected.end());
      const std::set<std::string> want(synth::kKeyVariables.begin(), synth::kKeyVariables.end());
      CHECK(got == want);
    }
  }

  TEST_CASE("profiles cover the roster") {
    const auto& profiles = synth::country_x_profiles();
    CHECK(profiles.size() == 25);
    int keys = 0;
    for (const auto& p : profiles) keys += p.key;
    CHECK(keys == 7);
    const auto csv = synth::to_csv(synth::country_x_panel(7), synth::country_x_parameters());
    CHECK(csv.rfind("parameter_id,domain,year,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 501);
  }

  TEST_CASE("random streams are keyed and well distributed") {
    rng::Stream a(42, {2030, 7}), b(42, {2030, 7}), c(42, {2030, 8});
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());

    rng::Stream s(1, {});
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = s.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);

    rng::Stream u(5, {1});
    for (int i = 0; i < 1000; ++i) {
      const double v = u.uniform();
      CHECK((v > 0.0 && v < 1.0));
      const double t = u.truncated_normal(0.0, 1.0, -0.5, 0.5);
      CHECK((t >= -0.5 && t <= 0.5));
    }
    CHECK(u.truncated_normal(3.0, 0.0, 0.0, 2.0) == 2.0);
  }
}
