// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

#include "bdbbm/core/rational.hpp"

namespace bdbbm {

/// Exact jump law: probs[i][j] for 1 <= i < j <= k (other entries ignored).
using ExactJumpLaw = std::vector<std::vector<Rational>>;

namespace detail {
inline Rational jumps_over(const ExactJumpLaw& p, std::size_t u, std::size_t k) {
  Rational s = 0;
  for (std::size_t v = u + 1; v <= k; ++v) s += p.at(u).at(v);
  return s;
}
}  // namespace detail

/// Jump rate of quantile i, tuple form: lambda N sum_u C(i-1,u-1) C(N-i,k-u) / C(N,k) * P(u jumps).
inline Rational quantile_jump_rate_tuple(std::size_t n, std::size_t k, const Rational& lambda,
                                         const ExactJumpLaw& p, std::size_t i) {
  if (i < 1 || i > n || n < k) throw std::out_of_range("quantile_jump_rate_tuple: bad arguments");
  Rational s = 0;
  for (std::size_t u = 1; u <= k; ++u)
    s += binomial_q(static_cast<long>(i) - 1, static_cast<long>(u) - 1) *
         binomial_q(static_cast<long>(n - i), static_cast<long>(k - u)) * detail::jumps_over(p, u, k);
  return lambda * Rational(static_cast<long>(n)) * s / binomial_q(static_cast<long>(n), static_cast<long>(k));
}

/// Jump rate of quantile i, per-index form: lambda k sum_u C(i-1,u-1) C(N-i,k-u) / C(N-1,k-1) * P(u jumps).
inline Rational quantile_jump_rate_index(std::size_t n, std::size_t k, const Rational& lambda,
                                         const ExactJumpLaw& p, std::size_t i) {
  if (i < 1 || i > n || n < k) throw std::out_of_range("quantile_jump_rate_index: bad arguments");
  Rational s = 0;
  for (std::size_t u = 1; u <= k; ++u)
    s += binomial_q(static_cast<long>(i) - 1, static_cast<long>(u) - 1) *
         binomial_q(static_cast<long>(n - i), static_cast<long>(k - u)) * detail::jumps_over(p, u, k);
  return lambda * Rational(static_cast<long>(k)) * s /
         binomial_q(static_cast<long>(n) - 1, static_cast<long>(k) - 1);
}

/// Uniform law over all pairs, exact.
inline ExactJumpLaw exact_uniform_law(std::size_t k) {
  ExactJumpLaw p(k + 1, std::vector<Rational>(k + 1, Rational(0)));
  const Rational w(2, static_cast<long>(k * (k - 1)));
  for (std::size_t i = 1; i < k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j) p[i][j] = w;
  return p;
}

inline ExactJumpLaw exact_point_law(std::size_t k, std::size_t i, std::size_t j) {
  ExactJumpLaw p(k + 1, std::vector<Rational>(k + 1, Rational(0)));
  p.at(i).at(j) = 1;
  return p;
}

}  // namespace bdbbm
