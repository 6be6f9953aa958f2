// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bdbbm/analysis/stats.hpp"
#include "bdbbm/core/parallel.hpp"
#include "bdbbm/core/rng.hpp"
#include "bdbbm/np/clans.hpp"

namespace bdbbm {

/// Rng stream tag for mark-only clan experiments.
inline constexpr std::uint64_t kClanStreamTag = 5;

struct ClanIntersection {
  double estimate = 0.0;  ///< fraction of replicas with psi_t(i1) and psi_t(i2) intersecting
  double se = 0.0;
  double reference = 0.0;  ///< k^2 (exp(2 lambda k (k-1) t) - 1) / (N - 1)
  double ratio = 0.0;      ///< estimate / reference
  std::size_t replicas = 0;
};

inline double clan_intersection_reference(const NPSpec& s, std::size_t n, double t) {
  const double k = static_cast<double>(s.k);
  return k * k * std::expm1(2.0 * s.lambda * k * (k - 1.0) * t) / (static_cast<double>(n) - 1.0);
}

inline ClanIntersection clan_intersection_prob(const NPSpec& spec, std::size_t n, std::size_t i1, std::size_t i2,
                                               double t, std::size_t replicas, std::uint64_t seed,
                                               unsigned threads = 1) {
  if (i1 == i2 || i1 < 1 || i2 < 1 || i1 > n || i2 > n)
    throw std::invalid_argument("clan_intersection_prob: need two distinct indices in 1..N");
  if (replicas < 2) throw std::invalid_argument("clan_intersection_prob: need at least 2 replicas");
  const auto hits = parallel_replicas(replicas, threads, [&](std::size_t r) {
    Rng rng(seed, (static_cast<std::uint64_t>(n) << 32) | r, kClanStreamTag);
    const auto marks = generate_ring_marks(spec, n, t, rng);
    return clans_intersect(ancestor_set(marks, i1, t), ancestor_set(marks, i2, t)) ? 1.0 : 0.0;
  });
  ClanIntersection out;
  out.replicas = replicas;
  out.estimate = stats::mean(hits);
  out.se = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(replicas));
  out.reference = clan_intersection_reference(spec, n, t);
  out.ratio = out.estimate / out.reference;
  return out;
}

struct ClanGrowth {
  double s = 0.0;
  double mean = 0.0;   ///< Monte Carlo mean of |phi_s(root)|
  double se = 0.0;
  double bound = 0.0;  ///< exp(lambda k (k-1) s)
};

/// Mean forward-clan size at each s, one mark set per replica on [0, max s].
inline std::vector<ClanGrowth> clan_growth(const NPSpec& spec, std::size_t n, std::size_t root,
                                           const std::vector<double>& s_list, std::size_t replicas,
                                           std::uint64_t seed, unsigned threads = 1) {
  if (s_list.empty()) return {};
  if (root < 1 || root > n) throw std::out_of_range("clan_growth: root outside 1..N");
  double smax = 0.0;
  for (double s : s_list) smax = std::max(smax, s);
  const auto sizes = parallel_replicas(replicas, threads, [&](std::size_t r) {
    Rng rng(seed, (static_cast<std::uint64_t>(n) << 32) | r, kClanStreamTag);
    const auto marks = generate_ring_marks(spec, n, smax, rng);
    std::vector<double> row;
    for (double s : s_list) row.push_back(static_cast<double>(forward_clan(marks, root, s).size()));
    return row;
  });
  std::vector<ClanGrowth> out;
  const double k = static_cast<double>(spec.k);
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    std::vector<double> col;
    for (const auto& row : sizes) col.push_back(row[i]);
    out.push_back({s_list[i], stats::mean(col), stats::se(col), std::exp(spec.lambda * k * (k - 1.0) * s_list[i])});
  }
  return out;
}

}  // namespace bdbbm
