// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/pde/solver.hpp"

namespace bdbbm {

namespace detail {

/// Finite positions sorted, plus the count at -inf.
inline std::pair<std::vector<double>, std::size_t> split_sorted(const ParticleConfig& c) {
  std::vector<double> xs;
  std::size_t ninf = 0;
  for (double x : c.positions()) {
    if (is_minus_inf(x))
      ++ninf;
    else
      xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  return {std::move(xs), ninf};
}

/// sup over R of |F - U| for right-continuous nondecreasing U, linear between consecutive entries of
/// `knots` and of the jump points of F: left limits and values at every jump, every knot and both tails.
template <class U>
double sup_distance_impl(const ParticleConfig& c, U&& u, const std::vector<double>& knots, double u_minus,
                         double u_plus) {
  const auto [xs, ninf] = split_sorted(c);
  const double n = static_cast<double>(c.size());
  double best = std::max(std::abs(static_cast<double>(ninf) / n - u_minus), std::abs(1.0 - u_plus));
  std::size_t i = 0;
  while (i < xs.size()) {
    const double x = xs[i];
    const double before = static_cast<double>(ninf + i) / n;
    while (i < xs.size() && xs[i] == x) ++i;
    const double after = static_cast<double>(ninf + i) / n;
    const double ux_left = u(std::nextafter(x, -std::numeric_limits<double>::infinity()));
    best = std::max({best, std::abs(before - ux_left), std::abs(after - u(x))});
  }
  for (double k : knots) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), k);
    const double f = static_cast<double>(ninf + static_cast<std::size_t>(it - xs.begin())) / n;
    best = std::max(best, std::abs(f - u(k)));
  }
  return best;
}

}  // namespace detail

/// sup_x |F_c(x) - U(x)| for a right-continuous nondecreasing CDF-like U.
inline double sup_distance(const ParticleConfig& c, const std::function<double(double)>& cdf) {
  const double inf = std::numeric_limits<double>::infinity();
  return detail::sup_distance_impl(c, cdf, {}, cdf(-inf), cdf(inf));
}

/// sup_x |F_c(x) - U(t_s, x)| against the piecewise-linear interpolant of a stored field slice.
inline double sup_distance(const ParticleConfig& c, const ScalarField& f, std::size_t slice) {
  const auto& v = f.values.at(slice);
  std::vector<double> knots(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) knots[i] = f.x(i);
  return detail::sup_distance_impl(
      c, [&](double x) { return f.interpolate(slice, x); }, knots, v.front(), v.back());
}

/// sup_x |F_a(x) - F_b(x)| between two empirical CDFs.
inline double sup_distance(const ParticleConfig& a, const ParticleConfig& b) {
  const auto [xa, ia] = detail::split_sorted(a);
  const auto [xb, ib] = detail::split_sorted(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double best = std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb);
  std::size_t i = 0, j = 0;
  while (i < xa.size() || j < xb.size()) {
    const double x = std::min(i < xa.size() ? xa[i] : std::numeric_limits<double>::infinity(),
                              j < xb.size() ? xb[j] : std::numeric_limits<double>::infinity());
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(ia + i) / na - static_cast<double>(ib + j) / nb));
  }
  return best;
}

/// Deterministic N-quantile placement x_i = U0^{-1}((i - 1/2)/N), labels 1..N.
inline ParticleConfig quantile_init(const std::function<double(double)>& inverse_cdf, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = inverse_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return ParticleConfig::from_positions(std::move(x));
}

}  // namespace bdbbm
