// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bdbbm {

/// Fixed-population tuple model: at rate lambda*N a uniform k-set of quantiles is drawn and
/// its i-th element jumps onto its j-th with probability p(i, j), 1 <= i < j <= k.
struct NPSpec {
  struct Pair {
    std::size_t i;
    std::size_t j;
    double prob;
  };

  double lambda = 0.5;
  std::size_t k = 2;
  std::vector<Pair> p{{1, 2, 1.0}};

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("NPSpec: lambda must be >= 0");
    if (k < 2) throw std::invalid_argument("NPSpec: k must be >= 2");
    if (p.empty()) throw std::invalid_argument("NPSpec: empty jump law");
    double total = 0.0;
    for (const auto& q : p) {
      if (!(q.i >= 1 && q.i < q.j && q.j <= k))
        throw std::invalid_argument("NPSpec: pair (" + std::to_string(q.i) + "," + std::to_string(q.j) +
                                    ") must satisfy 1 <= i < j <= k");
      if (!(q.prob >= 0.0)) throw std::invalid_argument("NPSpec: negative probability");
      total += q.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("NPSpec: probabilities must sum to 1");
  }

  double prob(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (const auto& q : p)
      if (q.i == i && q.j == j) s += q.prob;
    return s;
  }

  /// p(k-1, k) = 1.
  static NPSpec top(std::size_t k, double lambda) { return {lambda, k, {{k - 1, k, 1.0}}}; }
  /// p(1, k) = 1: the smallest of the tuple jumps onto the largest.
  static NPSpec extremes(std::size_t k, double lambda) { return {lambda, k, {{1, k, 1.0}}}; }
  /// p(1, j) = 1/(k-1): the smallest jumps onto a uniform other member.
  static NPSpec min_to_uniform(std::size_t k, double lambda) {
    NPSpec s{lambda, k, {}};
    for (std::size_t j = 2; j <= k; ++j) s.p.push_back({1, j, 1.0 / static_cast<double>(k - 1)});
    return s;
  }
  /// Uniform over all k(k-1)/2 pairs.
  static NPSpec uniform(std::size_t k, double lambda) {
    NPSpec s{lambda, k, {}};
    const double w = 2.0 / static_cast<double>(k * (k - 1));
    for (std::size_t i = 1; i < k; ++i)
      for (std::size_t j = i + 1; j <= k; ++j) s.p.push_back({i, j, w});
    return s;
  }
  /// p(i, i+1) = h(i/k)/lambda with lambda = sum_i h(i/k); the drift is the Bernstein polynomial of h.
  static NPSpec bernstein(std::size_t k, const std::function<double(double)>& h) {
    NPSpec s{0.0, k, {}};
    for (std::size_t i = 1; i < k; ++i) s.lambda += h(static_cast<double>(i) / static_cast<double>(k));
    if (!(s.lambda > 0.0)) throw std::invalid_argument("NPSpec::bernstein: h vanishes on the grid");
    for (std::size_t i = 1; i < k; ++i)
      s.p.push_back({i, i + 1, h(static_cast<double>(i) / static_cast<double>(k)) / s.lambda});
    return s;
  }
};

/// p_hat(r) = sum_{i <= r < j} p(i, j): probability that a particle of tuple rank r jumps over rank r.
inline double p_hat(const NPSpec& s, std::size_t r) {
  if (r < 1 || r + 1 > s.k) throw std::out_of_range("p_hat: r must lie in 1..k-1");
  double v = 0.0;
  for (const auto& q : s.p)
    if (q.i <= r && q.j > r) v += q.prob;
  return v;
}

/// i0 = min{i : p(i, j) > 0 for some j} - 1.
inline std::size_t lowest_active_offset(const NPSpec& s) {
  std::size_t m = s.k;
  for (const auto& q : s.p)
    if (q.prob > 0.0) m = std::min(m, q.i);
  return m - 1;
}

}  // namespace bdbbm
