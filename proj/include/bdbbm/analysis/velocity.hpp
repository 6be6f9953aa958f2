// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bdbbm/analysis/stats.hpp"

namespace bdbbm {

struct VelocityEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double se = 0.0;  ///< regression SE for one series, across-replica SE for an aggregate
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t replicas = 1;
  std::size_t points = 0;
};

/// Least-squares slope of the points with t in [t0, t1].
inline VelocityEstimate estimate_velocity_window(const std::vector<std::pair<double, double>>& series, double t0,
                                                 double t1, std::size_t min_points = 10) {
  std::vector<double> t, y;
  for (const auto& [ti, yi] : series)
    if (ti >= t0 && ti <= t1) {
      if (!std::isfinite(yi)) throw std::domain_error("estimate_velocity: non-finite value at t = " + std::to_string(ti));
      t.push_back(ti);
      y.push_back(yi);
    }
  if (t.size() < min_points)
    throw std::invalid_argument("estimate_velocity: need at least " + std::to_string(min_points) +
                                " points in the window, got " + std::to_string(t.size()));
  const auto f = stats::ols(t, y);
  VelocityEstimate v;
  v.slope = f.slope;
  v.intercept = f.intercept;
  v.se = f.slope_se;
  v.t_start = t.front();
  v.t_end = t.back();
  v.points = t.size();
  return v;
}

/// Slope after discarding the first `burn_in` fraction of the observed time span.
inline VelocityEstimate estimate_velocity(const std::vector<std::pair<double, double>>& series,
                                          double burn_in = 0.25) {
  if (series.empty()) throw std::invalid_argument("estimate_velocity: empty series");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("estimate_velocity: burn-in must be in [0, 1)");
  const double a = series.front().first, b = series.back().first;
  return estimate_velocity_window(series, a + burn_in * (b - a), b);
}

/// Mean slope across replicas with its standard error.
inline VelocityEstimate aggregate_velocity(const std::vector<VelocityEstimate>& per_replica) {
  if (per_replica.empty()) throw std::invalid_argument("aggregate_velocity: no replicas");
  std::vector<double> s, c;
  for (const auto& v : per_replica) {
    s.push_back(v.slope);
    c.push_back(v.intercept);
  }
  VelocityEstimate out = per_replica.front();
  out.slope = stats::mean(s);
  out.intercept = stats::mean(c);
  out.se = stats::se(s);
  out.replicas = per_replica.size();
  return out;
}

}  // namespace bdbbm
