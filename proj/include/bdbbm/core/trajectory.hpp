// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bdbbm/core/cloud.hpp"
#include "bdbbm/core/event_log.hpp"
#include "bdbbm/core/particle_config.hpp"

namespace bdbbm {

struct Snapshot {
  double t = 0.0;
  ParticleConfig config;  ///< quantile order
};

struct SeriesPoint {
  double t = 0.0;
  double max = kMinusInf;  ///< -inf when every particle sits at -inf
  std::size_t population = 0;
  double mean = 0.0;  ///< mean of the finite positions
};

struct RunOptions {
  double horizon = 1.0;
  std::vector<double> observation_times;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::size_t population_cap = 1'000'000;
  bool record_log = false;
  bool keep_snapshots = true;
  /// Allows the lazy BBM path when b is constant and no particle is ever killed.
  bool allow_fast_path = true;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  std::vector<SeriesPoint> series;
  EventLog log;
  std::size_t events = 0;
};

namespace detail {

inline void check_observations(const RunOptions& o) {
  if (!(o.horizon >= 0.0)) throw std::invalid_argument("simulate: horizon must be >= 0");
  for (std::size_t i = 0; i < o.observation_times.size(); ++i) {
    const double t = o.observation_times[i];
    if (!(t >= 0.0 && t <= o.horizon))
      throw std::invalid_argument("simulate: observation time outside [0, horizon]");
    if (i > 0 && !(t > o.observation_times[i - 1]))
      throw std::invalid_argument("simulate: observation times must be strictly increasing");
  }
}

inline void record(RunResult& res, const RunOptions& o, double t, const Cloud& c) {
  res.series.push_back({t, c.max_finite(), c.size(), c.mean_finite()});
  if (o.keep_snapshots) res.snapshots.push_back({t, c.config()});
}

}  // namespace detail

}  // namespace bdbbm
