#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace themis::lp {

enum class Status { optimal, infeasible, unbounded };
std::string to_string(Status s);

enum class Relation { le, eq, ge };

struct Row {
  std::vector<double> coefficients;  // one per variable
  Relation relation = Relation::le;
  double rhs = 0.0;
};

struct Bound {
  double lower = 0.0;
  std::optional<double> upper;
};

/// max (or min) c.x subject to rows and per-variable bounds. Lower bounds
/// may be any finite value; the default is x >= 0.
struct Problem {
  std::vector<double> objective;
  bool maximize = true;
  std::vector<Row> rows;
  std::vector<Bound> bounds;  // empty means all x >= 0
};

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

/// Two-phase tableau simplex with Bland's rule; pivots smaller than 1e-9 are
/// treated as zero.
Solution solve(const Problem& problem);

inline constexpr double kPivotTolerance = 1e-9;

}  // namespace themis::lp
