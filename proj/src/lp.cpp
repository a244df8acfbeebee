#include "themis/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "themis/error.hpp"

namespace themis::lp {

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "?";
}

namespace {

constexpr int kMaxIterations = 100000;

struct Tableau {
  std::vector<std::vector<double>> t;  // m rows, last column is the rhs
  std::vector<std::size_t> basis;
  std::size_t cols = 0;  // variable columns (rhs excluded)

  double& rhs(std::size_t i) { return t[i][cols]; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t[r][c];
    for (double& v : t[r]) v /= p;
    t[r][c] = 1.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == r) continue;
      const double f = t[i][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k <= cols; ++k) t[i][k] -= f * t[r][k];
      t[i][c] = 0.0;
    }
    basis[r] = c;
  }
};

enum class Outcome { optimal, unbounded };

// Maximises cost.x over the tableau, entering only columns flagged in `allowed`.
Outcome run(Tableau& tab, const std::vector<double>& cost, const std::vector<bool>& allowed, int& iterations) {
  const std::size_t m = tab.t.size();
  for (;;) {
    if (++iterations > kMaxIterations) throw DomainError("simplex iteration limit reached");
    std::size_t enter = tab.cols;
    for (std::size_t j = 0; j < tab.cols; ++j) {
      if (!allowed[j]) continue;
      double z = 0.0;
      for (std::size_t i = 0; i < m; ++i) z += cost[tab.basis[i]] * tab.t[i][j];
      if (cost[j] - z > kPivotTolerance) {
        enter = j;  // Bland: lowest index with positive reduced cost
        break;
      }
    }
    if (enter == tab.cols) return Outcome::optimal;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = tab.t[i][enter];
      if (a <= kPivotTolerance) continue;
      const double ratio = tab.rhs(i) / a;
      if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && tab.basis[i] < tab.basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == m) return Outcome::unbounded;
    tab.pivot(leave, enter);
  }
}

}  // namespace

Solution solve(const Problem& pb) {
  const std::size_t n = pb.objective.size();
  std::vector<Bound> bounds = pb.bounds;
  if (bounds.empty()) bounds.assign(n, Bound{});
  if (bounds.size() != n) throw ValidationError("bounds must list every variable");
  for (const auto& b : bounds)
    if (!std::isfinite(b.lower)) throw ValidationError("lower bounds must be finite");

  Solution sol;
  struct Work {
    std::vector<double> a;
    Relation rel;
    double b;
  };
  std::vector<Work> rows;
  for (const auto& r : pb.rows) {
    if (r.coefficients.size() != n) throw ValidationError("constraint row has the wrong number of coefficients");
    Work w{r.coefficients, r.relation, r.rhs};
    for (std::size_t j = 0; j < n; ++j) w.b -= w.a[j] * bounds[j].lower;
    rows.push_back(std::move(w));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!bounds[j].upper) continue;
    const double span = *bounds[j].upper - bounds[j].lower;
    if (span < -kPivotTolerance) return sol;  // empty box: infeasible
    Work w{std::vector<double>(n, 0.0), Relation::le, std::max(span, 0.0)};
    w.a[j] = 1.0;
    rows.push_back(std::move(w));
  }
  for (auto& w : rows)
    if (w.b < 0.0) {
      for (double& v : w.a) v = -v;
      w.b = -w.b;
      if (w.rel == Relation::le)
        w.rel = Relation::ge;
      else if (w.rel == Relation::ge)
        w.rel = Relation::le;
    }

  const std::size_t m = rows.size();
  std::size_t slack_count = 0, art_count = 0;
  for (const auto& w : rows) {
    if (w.rel != Relation::eq) ++slack_count;
    if (w.rel != Relation::le) ++art_count;
  }
  Tableau tab;
  tab.cols = n + slack_count + art_count;
  tab.t.assign(m, std::vector<double>(tab.cols + 1, 0.0));
  tab.basis.assign(m, 0);
  std::vector<bool> artificial(tab.cols, false);
  std::size_t next_slack = n, next_art = n + slack_count;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& w = rows[i];
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = w.a[j];
    tab.rhs(i) = w.b;
    if (w.rel == Relation::le) {
      tab.t[i][next_slack] = 1.0;
      tab.basis[i] = next_slack++;
    } else {
      if (w.rel == Relation::ge) tab.t[i][next_slack++] = -1.0;
      tab.t[i][next_art] = 1.0;
      artificial[next_art] = true;
      tab.basis[i] = next_art++;
    }
  }

  std::vector<bool> all(tab.cols, true);
  if (art_count > 0) {
    std::vector<double> phase1(tab.cols, 0.0);
    for (std::size_t j = 0; j < tab.cols; ++j)
      if (artificial[j]) phase1[j] = -1.0;
    run(tab, phase1, all, sol.iterations);
    double infeasibility = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < tab.t.size(); ++i) {
      if (artificial[tab.basis[i]]) infeasibility += tab.rhs(i);
      scale = std::max(scale, std::abs(rows[i].b));
    }
    if (infeasibility > 1e-9 * scale) return sol;

    // Drive remaining (zero-valued) artificials out of the basis.
    for (std::size_t i = 0; i < tab.t.size();) {
      if (!artificial[tab.basis[i]]) {
        ++i;
        continue;
      }
      std::size_t col = tab.cols;
      for (std::size_t j = 0; j < tab.cols; ++j)
        if (!artificial[j] && std::abs(tab.t[i][j]) > kPivotTolerance) {
          col = j;
          break;
        }
      if (col == tab.cols) {
        tab.t.erase(tab.t.begin() + static_cast<std::ptrdiff_t>(i));  // redundant row
        tab.basis.erase(tab.basis.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      tab.pivot(i, col);
      ++i;
    }
  }

  std::vector<double> cost(tab.cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = pb.maximize ? pb.objective[j] : -pb.objective[j];
  std::vector<bool> allowed(tab.cols);
  for (std::size_t j = 0; j < tab.cols; ++j) allowed[j] = !artificial[j];
  if (run(tab, cost, allowed, sol.iterations) == Outcome::unbounded) {
    sol.status = Status::unbounded;
    return sol;
  }

  sol.status = Status::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < tab.t.size(); ++i)
    if (tab.basis[i] < n) sol.x[tab.basis[i]] = tab.rhs(i);
  for (std::size_t j = 0; j < n; ++j) sol.x[j] += bounds[j].lower;
  for (std::size_t j = 0; j < n; ++j) sol.objective += pb.objective[j] * sol.x[j];
  return sol;
}

}  // namespace themis::lp
