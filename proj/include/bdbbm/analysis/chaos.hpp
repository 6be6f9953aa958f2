// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bdbbm/analysis/stats.hpp"
#include "bdbbm/core/parallel.hpp"
#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/core/piecewise_poly.hpp"
#include "bdbbm/core/rational.hpp"
#include "bdbbm/np/simulator.hpp"

namespace bdbbm {

struct MomentGap {
  double gap = 0.0;  ///< sup over the grid of |E F^l - (E F)^l|
  double se = 0.0;   ///< at the maximizing grid point
  double x = 0.0;    ///< maximizing grid point
  double mean_f = 0.0;
};

/// Unbiased estimate of E[F^l] - (E F)^l at each grid point from replica values f[r][x];
/// (E F)^l uses the U-statistic e_l(F_1..F_R) / C(R, l).
inline MomentGap moment_gap(const std::vector<std::vector<double>>& f, const std::vector<double>& grid, int ell) {
  if (ell < 2) throw std::invalid_argument("moment_gap: l must be >= 2");
  const std::size_t R = f.size();
  if (R < static_cast<std::size_t>(ell)) throw std::invalid_argument("moment_gap: need at least l replicas");
  MomentGap best;
  best.gap = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> e(static_cast<std::size_t>(ell) + 1, 0.0);
    e[0] = 1.0;
    double ml = 0.0, m1 = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double v = f[r].at(g);
      for (int j = ell; j >= 1; --j) e[j] += v * e[j - 1];
      ml += std::pow(v, ell);
      m1 += v;
    }
    ml /= static_cast<double>(R);
    m1 /= static_cast<double>(R);
    const double pow_mean = e[ell] / binomial(static_cast<int>(R), ell);
    const double gap = ml - pow_mean;
    if (std::abs(gap) > best.gap) {
      std::vector<double> infl(R);
      for (std::size_t r = 0; r < R; ++r)
        infl[r] = std::pow(f[r][g], ell) - ell * std::pow(m1, ell - 1) * f[r][g];
      best = {std::abs(gap), stats::se(infl), grid[g], m1};
    }
  }
  return best;
}

struct ChaosReport {
  std::vector<std::size_t> ns;
  std::vector<MomentGap> gaps;
  double slope = 0.0;     ///< of log(gap) against log(N); 0 with a single N
  double slope_se = 0.0;
  std::size_t replicas = 0;
  double t = 0.0;
  int ell = 2;
};

/// Monte Carlo moment gap of the empirical CDF at time t for each N, on a fixed x-grid.
inline ChaosReport chaos_gap(const NPSpec& spec, const std::function<ParticleConfig(std::size_t)>& init, double t,
                             int ell, const std::vector<std::size_t>& ns, std::size_t replicas, std::uint64_t seed,
                             const std::vector<double>& grid, unsigned threads = 1) {
  if (ell < 2) throw std::invalid_argument("chaos_gap: l must be >= 2");
  if (grid.empty()) throw std::invalid_argument("chaos_gap: empty x-grid");
  ChaosReport rep;
  rep.ns = ns;
  rep.replicas = replicas;
  rep.t = t;
  rep.ell = ell;
  for (std::size_t n : ns) {
    const ParticleConfig c0 = init(n);
    auto f = parallel_replicas(replicas, threads, [&](std::size_t r) {
      NPOptions o;
      o.horizon = t;
      o.observation_times = {t};
      o.seed = seed;
      o.replica = (static_cast<std::uint64_t>(n) << 32) | r;
      const auto res = simulate_np(spec, c0, o);
      std::vector<double> row(grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g) row[g] = empirical_cdf(res.snapshots.back().config, grid[g]);
      return row;
    });
    rep.gaps.push_back(moment_gap(f, grid, ell));
  }
  if (ns.size() >= 2) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      lx.push_back(std::log(static_cast<double>(ns[i])));
      ly.push_back(std::log(rep.gaps[i].gap));
    }
    const auto fit = stats::ols(lx, ly);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_se;
  }
  return rep;
}

/// a_{N,l} = 1 - prod_{m=1}^{l-1} (N - m)/N, the chance that l uniform draws from N collide.
inline Rational collision_probability(std::size_t n, std::size_t ell) {
  if (n < 1) throw std::invalid_argument("collision_probability: N must be >= 1");
  Rational p = 1;
  for (std::size_t m = 1; m < ell; ++m) {
    if (m >= n) return 1;
    p *= Rational(static_cast<long>(n - m), static_cast<long>(n));
  }
  return 1 - p;
}

/// Exact check of N a_{N,l} <= l(l-1)/2 for all 1 <= N <= n_max and 2 <= l <= l_max.
inline bool combinatorial_bound_check(std::size_t ell_max, std::size_t n_max) {
  for (std::size_t ell = 2; ell <= ell_max; ++ell)
    for (std::size_t n = 1; n <= n_max; ++n)
      if (Rational(static_cast<long>(n)) * collision_probability(n, ell) >
          Rational(static_cast<long>(ell * (ell - 1)), 2))
        return false;
  return true;
}

}  // namespace bdbbm
