#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "themis/analysis.hpp"
#include "themis/error.hpp"
#include "themis/linalg.hpp"
#include "themis/synth.hpp"

using namespace themis;
using namespace themis::analysis;

namespace {

ParameterSeries series(const std::string& id, int first_year, const std::vector<double>& values) {
  ParameterSeries s;
  s.parameter = id;
  for (std::size_t k = 0; k < values.size(); ++k) s.observations.push_back({first_year + static_cast<int>(k), values[k]});
  return s;
}

linalg::Matrix random_psd(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> z;
  linalg::Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = z(gen);
  return linalg::multiply(a, a.transposed());
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("standardize uses sample deviation on the common years") {
    const auto panel = standardize({series("a", 2000, {1, 2, 3, 4}), series("b", 2001, {10, 10, 10, 10})});
    CHECK(panel.years == std::vector<int>{2001, 2002, 2003});
    CHECK(panel.means[0] == doctest::Approx(3.0));
    CHECK(panel.stds[0] == doctest::Approx(1.0));
    CHECK(panel.values(0, 0) == doctest::Approx(-1.0));
    CHECK(panel.values(2, 0) == doctest::Approx(1.0));
    CHECK(panel.constant[1]);
    CHECK_FALSE(panel.constant[0]);
    for (std::size_t r = 0; r < 3; ++r) CHECK(panel.values(r, 1) == 0.0);

    const auto clipped = standardize({series("a", 2000, {1, 2, 3, 4})}, std::pair{2001, 2002});
    CHECK(clipped.years == std::vector<int>{2001, 2002});
    CHECK_THROWS_AS(standardize({series("a", 2000, {1, 2}), series("b", 2010, {1, 2})}), DomainError);
  }

  TEST_CASE("Jacobi solves a known 2x2 system") {
    linalg::Matrix m(2, 2);
    m(0, 0) = 2;
    m(0, 1) = m(1, 0) = 1;
    m(1, 1) = 2;
    const auto e = linalg::jacobi_eigen(m);
    CHECK(e.converged);
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(std::sqrt(0.5)));
  }

  TEST_CASE("eigen decomposition properties on random PSD matrices") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 1 + gen() % 8;
      const auto a = random_psd(gen, n);
      const auto e = linalg::jacobi_eigen(a);
      double trace = 0.0, sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trace += a(i, i);
        sum += e.values[i];
      }
      CHECK(std::abs(trace - sum) < 1e-8);
      const auto vtv = linalg::multiply(e.vectors.transposed(), e.vectors);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(vtv(i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);
      linalg::Matrix lam(n, n);
      for (std::size_t i = 0; i < n; ++i) lam(i, i) = e.values[i];
      const auto rec = linalg::multiply(linalg::multiply(e.vectors, lam), e.vectors.transposed());
      linalg::Matrix diff(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) diff(i, j) = rec(i, j) - a(i, j);
      CHECK(linalg::frobenius(diff) < 1e-7);
      for (std::size_t i = 1; i < n; ++i) CHECK(e.values[i - 1] >= e.values[i]);
    }
  }

  TEST_CASE("key selection takes the shortest prefix and nominates the largest loading") {
    // Block covariance: {a,b} strongly tied, c and d independent with smaller variance.
    linalg::Matrix cov(4, 4);
    cov(0, 0) = 1.0;
    cov(1, 1) = 1.0;
    cov(0, 1) = cov(1, 0) = 0.8;
    cov(2, 2) = 0.9;
    cov(3, 3) = 0.1;
    const auto result = pca_from_covariance(cov, {"a", "b", "c", "d"});
    // Eigenvalues 1.8, 0.9, 0.2, 0.1 over a total of 3.0.
    CHECK(result.explained_variance_ratio[0] == doctest::Approx(0.6));
    CHECK(result.explained_variance_ratio[1] == doctest::Approx(0.3));
    StandardizedPanel panel;
    panel.variables = {"a", "b", "c", "d"};
    const auto keys = select_key_variables(result, panel, 0.90, 7);
    CHECK(keys.components_retained == 2);
    // Component 1 loads a and b equally; the tie goes to the earlier variable.
    CHECK(keys.selected == std::vector<std::string>{"a", "c"});

    const auto more = select_key_variables(result, panel, 0.95, 7);
    CHECK(more.components_retained == 3);
    // Component 3 nominates a again, which is already taken.
    CHECK(more.selected == std::vector<std::string>{"a", "c"});
    CHECK(select_key_variables(result, panel, 0.95, 1).selected == std::vector<std::string>{"a"});
    CHECK_THROWS_AS(select_key_variables(result, panel, 0.0, 7), ValidationError);
  }

  TEST_CASE("PCA on the Country X panel isolates the seven key variables") {
    const auto m = test::bundled_model();
    const auto panel = standardize(m.series);
    const auto result = pca(panel);
    const auto keys = select_key_variables(result, panel, 0.90, 7);
    std::vector<std::string> got = keys.selected, want(synth::kKeyVariables.begin(), synth::kKeyVariables.end());
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }

  TEST_CASE("lagged signs follow the correlation threshold") {
    // y(t+1) moves with x(t) through a one year lag; z moves against it.
    std::vector<double> x, y, z;
    std::mt19937_64 gen(5);
    std::normal_distribution<double> e(0.0, 1.0);
    double xs = 0.0, ys = 0.0, zs = 0.0, dx_prev = 0.0;
    for (int t = 0; t < 60; ++t) {
      const double dx = e(gen);
      xs += dx;
      ys += dx_prev + 0.2 * e(gen);
      zs += -dx_prev + 0.2 * e(gen);
      dx_prev = dx;
      x.push_back(xs);
      y.push_back(ys);
      z.push_back(zs);
    }
    const auto panel = standardize({series("x", 1900, x), series("y", 1900, y), series("z", 1900, z)});
    const auto keys = fixed_key_variables({"x", "y", "z"});
    const auto s = estimate_signs(panel, keys);
    CHECK(s.at(0, 0) == Sign::self);
    CHECK(s.at(0, 1) == Sign::plus);
    CHECK(s.at(0, 2) == Sign::minus);
    CHECK(s.evidence_at(0, 1).pairs == 58);

    AdjacencyMatrix adj({"x", "y", "z"});
    adj.set(0, 2, true);
    const auto limited = estimate_signs(panel, keys, &adj);
    CHECK(limited.at(0, 1) == Sign::none);
    CHECK(limited.evidence_at(0, 1).excluded);
    CHECK(limited.at(0, 2) == Sign::minus);
    CHECK_THROWS_AS(estimate_signs(panel, keys, nullptr, 1.0), ValidationError);
  }

  TEST_CASE("four points give too few lagged pairs for a sign") {
    const auto panel = standardize({series("x", 2000, {1, 2, 3, 4}), series("y", 2000, {2, 4, 6, 8})});
    const auto s = estimate_signs(panel, fixed_key_variables({"x", "y"}));
    CHECK(s.at(0, 1) == Sign::none);
    CHECK(s.evidence_at(0, 1).insufficient);
    CHECK(s.evidence_at(0, 1).pairs == 2);
  }

  TEST_CASE("glyphs round trip") {
    for (Sign s : {Sign::self, Sign::plus, Sign::minus, Sign::none}) CHECK(sign_from_glyph(glyph(s)) == s);
    CHECK_THROWS_AS(sign_from_glyph('?'), ParseError);
  }

  TEST_CASE("trend fit matches the textbook formulas") {
    const std::vector<double> v = {3.1, 3.9, 5.2, 5.8, 7.1, 8.0};
    const auto s = series("p", 2010, v);
    const auto t = fit_trend(s);
    // Independent closed forms.
    double n = 6, sx = 0, sy = 0, sxy = 0, sxx = 0;
    for (int k = 0; k < 6; ++k) {
      const double yr = 2010 + k;
      sx += yr;
      sy += v[static_cast<std::size_t>(k)];
      sxy += yr * v[static_cast<std::size_t>(k)];
      sxx += yr * yr;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    CHECK(t.slope == doctest::Approx(slope).epsilon(1e-9));
    CHECK(t.intercept == doctest::Approx(icpt).epsilon(1e-9));
    double sse = 0;
    for (int k = 0; k < 6; ++k) {
      const double r = v[static_cast<std::size_t>(k)] - (icpt + slope * (2010 + k));
      sse += r * r;
    }
    CHECK(t.residual_std == doctest::Approx(std::sqrt(sse / 4.0)).epsilon(1e-9));

    const auto p = extrapolate(t, 2020);
    CHECK(p.mean == doctest::Approx(icpt + slope * 2020).epsilon(1e-9));
    const double xbar = sx / n, dxx = sxx - sx * sx / n;
    CHECK(p.std == doctest::Approx(std::sqrt(sse / 4.0) * std::sqrt(1 + 1 / n + (2020 - xbar) * (2020 - xbar) / dxx))
                       .epsilon(1e-9));
    CHECK_THROWS_AS(extrapolate(t, 2014), DomainError);
  }

  TEST_CASE("exact lines have zero residual and a sharp projection") {
    const auto t = fit_trend(series("p", 2000, {1, 3, 5, 7, 9}));
    CHECK(t.slope == doctest::Approx(2.0));
    CHECK(t.residual_std == 0.0);
    const auto p = extrapolate(t, 2010);
    CHECK(p.mean == doctest::Approx(21.0));
    CHECK(p.std == 0.0);
  }

  TEST_CASE("trend window keeps the latest years") {
    const auto t = fit_trend(series("p", 2000, {100, 100, 1, 2, 3}), 3);
    CHECK(t.n == 3);
    CHECK(t.first_year == 2002);
    CHECK(t.slope == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_trend(series("p", 2000, {1})), DomainError);
  }

  TEST_CASE("run record pieces serialise losslessly") {
    const auto m = test::bundled_model();
    const auto panel = standardize(m.series);
    const auto keys = select_key_variables(pca(panel), panel);
    const auto signs = estimate_signs(panel, keys, &*m.adjacency);
    CHECK(analysis::to_json(key_variables_from_json(analysis::to_json(keys))) == analysis::to_json(keys));
    CHECK(analysis::to_json(sign_matrix_from_json(analysis::to_json(signs))) == analysis::to_json(signs));
    const auto t = fit_trend(m.series[5], 20);
    CHECK(analysis::to_json(trend_from_json(analysis::to_json(t))) == analysis::to_json(t));
    const auto table = format_sign_table(signs);
    for (const auto& id : keys.selected) CHECK(table.find(id) != std::string::npos);
  }
}
