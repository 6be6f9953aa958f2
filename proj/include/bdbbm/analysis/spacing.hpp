// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <stdexcept>

#include "bdbbm/core/particle_config.hpp"

namespace bdbbm {

/// sum_{i=i0}^{N-1} g(i/N) (zeta[i+1] - zeta[i]) over the spacings between finite particles,
/// i.e. the integral of g(F_zeta(x)) over the finite support.
inline double spacing_functional(const ParticleConfig& c, const std::function<double(double)>& g) {
  const auto z = order_statistics(c);
  std::size_t first = 0;
  while (first < z.size() && is_minus_inf(z[first])) ++first;
  if (z.size() - first < 2) throw std::invalid_argument("spacing_functional: need at least 2 finite particles");
  const double n = static_cast<double>(z.size());
  double s = 0.0;
  for (std::size_t i = first + 1; i < z.size(); ++i) {
    const double gap = z[i] - z[i - 1];
    if (gap != 0.0) s += g(static_cast<double>(i) / n) * gap;
  }
  return s;
}

}  // namespace bdbbm
