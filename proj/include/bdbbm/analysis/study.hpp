// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdbbm/analysis/distance.hpp"
#include "bdbbm/analysis/stats.hpp"
#include "bdbbm/analysis/velocity.hpp"
#include "bdbbm/core/parallel.hpp"
#include "bdbbm/np/simulator.hpp"
#include "bdbbm/pde/solver.hpp"
#include "bdbbm/pde/source.hpp"

namespace bdbbm {

struct StudyConfig {
  std::string kind = "hydro";  ///< hydro | velocity
  NPSpec spec{};
  std::vector<std::size_t> ns{500, 5000};
  std::size_t replicas = 20;
  std::uint64_t seed = 0;
  double t = 1.0;         ///< hydro: comparison time
  double horizon = 50.0;  ///< velocity: run length
  double obs_dt = 0.5;    ///< velocity: observation spacing
  double burn_in = 0.25;
  GridParams grid{-8.0, 10.0, 0.01, 0.0, {}, 1e-8, 16};
  /// Initial CDF and its inverse; defaults to Uniform[0, 1].
  std::function<double(double)> u0 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  std::function<double(double)> u0_inverse = [](double p) { return p; };
  unsigned threads = 1;
};

struct StudyRow {
  std::size_t n = 0;
  double estimate = 0.0;  ///< hydro: median sup-distance; velocity: mean slope
  double se = 0.0;
  std::size_t replicas = 0;
  std::vector<double> values;  ///< per-replica values, in replica order
};

struct StudyReport {
  std::string kind;
  std::vector<StudyRow> rows;
  /// hydro: medians strictly decreasing in N; velocity: strictly increasing beyond 1 SE.
  /// Absent with fewer than two N values.
  std::optional<bool> trend;
  std::optional<ScalarField> field;  ///< hydro reference solution
};

namespace detail {

inline std::uint64_t study_replica(std::size_t n, std::size_t r) {
  return (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(r);
}

}  // namespace detail

/// Runs the replicas of each N and aggregates them into one table row per N.
inline StudyReport convergence_study(const StudyConfig& cfg) {
  cfg.spec.validate();
  if (cfg.ns.empty()) throw std::invalid_argument("convergence_study: empty N list");
  if (cfg.replicas < 1) throw std::invalid_argument("convergence_study: need at least one replica");
  for (std::size_t n : cfg.ns)
    if (n < cfg.spec.k)
      throw std::invalid_argument("convergence_study: need N >= k (N=" + std::to_string(n) +
                                  ", k=" + std::to_string(cfg.spec.k) + ")");
  StudyReport rep;
  rep.kind = cfg.kind;
  if (cfg.kind == "hydro") {
    GridParams g = cfg.grid;
    g.store_times = {cfg.t};
    rep.field = solve_fkpp(source_hp(cfg.spec), cfg.u0, g, cfg.t);
    for (std::size_t n : cfg.ns) {
      const ParticleConfig c0 = quantile_init(cfg.u0_inverse, n);
      StudyRow row;
      row.n = n;
      row.replicas = cfg.replicas;
      row.values = parallel_replicas(cfg.replicas, cfg.threads, [&](std::size_t r) {
        NPOptions o;
        o.horizon = cfg.t;
        o.observation_times = {cfg.t};
        o.seed = cfg.seed;
        o.replica = detail::study_replica(n, r);
        const auto res = simulate_np(cfg.spec, c0, o);
        return sup_distance(res.snapshots.back().config, *rep.field, 0);
      });
      row.estimate = stats::median(row.values);
      // Normal-theory SE of the median.
      row.se = 1.2533 * stats::se(row.values);
      rep.rows.push_back(std::move(row));
    }
    if (rep.rows.size() >= 2) {
      bool ok = true;
      for (std::size_t i = 1; i < rep.rows.size(); ++i) ok = ok && rep.rows[i].estimate < rep.rows[i - 1].estimate;
      rep.trend = ok;
    }
  } else if (cfg.kind == "velocity") {
    if (!(cfg.obs_dt > 0.0) || !(cfg.horizon > cfg.obs_dt))
      throw std::invalid_argument("convergence_study: need 0 < obs_dt < horizon");
    std::vector<double> obs;
    for (std::size_t i = 1;; ++i) {
      const double t = static_cast<double>(i) * cfg.obs_dt;
      if (t > cfg.horizon + 1e-12) break;
      obs.push_back(std::min(t, cfg.horizon));
    }
    for (std::size_t n : cfg.ns) {
      const ParticleConfig c0 = quantile_init(cfg.u0_inverse, n);
      const auto est = parallel_replicas(cfg.replicas, cfg.threads, [&](std::size_t r) {
        NPOptions o;
        o.horizon = cfg.horizon;
        o.observation_times = obs;
        o.keep_snapshots = false;
        o.seed = cfg.seed;
        o.replica = detail::study_replica(n, r);
        const auto res = simulate_np(cfg.spec, c0, o);
        std::vector<std::pair<double, double>> series;
        for (const auto& p : res.series) series.emplace_back(p.t, p.mean);
        return estimate_velocity(series, cfg.burn_in);
      });
      const auto agg = aggregate_velocity(est);
      StudyRow row;
      row.n = n;
      row.replicas = cfg.replicas;
      row.estimate = agg.slope;
      row.se = agg.se;
      for (const auto& e : est) row.values.push_back(e.slope);
      rep.rows.push_back(std::move(row));
    }
    if (rep.rows.size() >= 2) {
      bool ok = true;
      for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i - 1];
        const auto& b = rep.rows[i];
        ok = ok && b.estimate - a.estimate > std::hypot(a.se, b.se);
      }
      rep.trend = ok;
    }
  } else {
    throw std::invalid_argument("convergence_study: unknown kind '" + cfg.kind + "' (expected hydro or velocity)");
  }
  return rep;
}

}  // namespace bdbbm
