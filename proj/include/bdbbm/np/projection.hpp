// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/np/spec.hpp"

namespace bdbbm {

/// Drops the i0 lowest quantiles, where i0 = min{i : p(i, .) > 0} - 1.
inline ParticleConfig project_Z(const ParticleConfig& c, const NPSpec& spec) {
  const std::size_t i0 = lowest_active_offset(spec);
  if (c.size() < i0 + 1) throw std::invalid_argument("project_Z: configuration smaller than i0 + 1");
  const auto order = sorted_slots(c);
  std::vector<double> x;
  std::vector<Label> l;
  for (std::size_t q = i0; q < order.size(); ++q) {
    x.push_back(c.position(order[q]));
    l.push_back(c.label(order[q]));
  }
  return ParticleConfig(std::move(x), std::move(l));
}

/// Spacings from the leftmost particle: Z[i+1] - Z[1], i = 1..N-1.
inline std::vector<double> seen_from_leftmost(const ParticleConfig& z) {
  const auto v = order_statistics(z);
  std::vector<double> out;
  for (std::size_t i = 1; i < v.size(); ++i) out.push_back(v[i] - v[0]);
  return out;
}

}  // namespace bdbbm
