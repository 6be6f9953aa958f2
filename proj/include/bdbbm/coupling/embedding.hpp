// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

#include "bdbbm/core/birth_function.hpp"
#include "bdbbm/core/kill_schedule.hpp"
#include "bdbbm/core/rational.hpp"

namespace bdbbm {

/// lambda_j = (N/k) C(j-1,k-1) / C(N,k): rate at which quantile j is the top of the drawn tuple
/// in the model with p(k-1, k) = 1 and lambda = 1/k.
inline Rational embedded_lambda(std::size_t n, std::size_t k, std::size_t j) {
  if (n < k || k < 2) throw std::invalid_argument("embedded_lambda: need N >= k >= 2");
  if (j < 1 || j > n) throw std::out_of_range("embedded_lambda: j outside 1..N");
  return Rational(static_cast<long>(n), static_cast<long>(k)) *
         binomial_q(static_cast<long>(j) - 1, static_cast<long>(k) - 1) /
         binomial_q(static_cast<long>(n), static_cast<long>(k));
}

/// prod_{s=1}^{k-1} (j-s)/(N-s), the telescoped form of lambda_j.
inline Rational embedded_lambda_product(std::size_t n, std::size_t k, std::size_t j) {
  Rational r = 1;
  for (std::size_t s = 1; s < k; ++s) {
    if (j <= s) return 0;
    r *= Rational(static_cast<long>(j - s), static_cast<long>(n - s));
  }
  return r;
}

/// q_ij = C(i,k-1) / C(j-1,k-1): probability that the victim quantile is <= i given top j.
inline Rational embedded_q(std::size_t k, std::size_t i, std::size_t j) {
  if (j < k) throw std::out_of_range("embedded_q: need j >= k");
  return binomial_q(static_cast<long>(i), static_cast<long>(k) - 1) /
         binomial_q(static_cast<long>(j) - 1, static_cast<long>(k) - 1);
}

struct Embedding {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<Rational> lambda;  ///< lambda[j], j = 1..N (index 0 unused)
  BirthFunction b_hat;
  KillSchedule d_hat;  ///< at(j-1) is the kill measure used by a branch of quantile j
};

/**
 * Rank-branching form of the tuple model with p(k-1,k) = 1, lambda = 1/k.
 *
 * b_hat is the right-open step function equal to lambda_j on [(j-1)/(N-1), j/(N-1)) and
 * lambda_N at 1. D_hat_{j-1} is piecewise uniform on the bins [(i-1)/(j-1), i/(j-1)) with bin
 * mass q_ij - q_{i-1,j}, so D_hat_{j-1}(i/(j-1)) = q_ij. For j < k (rate zero) the measure is
 * never used and is set to the CDF x^(k-1).
 */
inline Embedding embed_np_as_bd(std::size_t n, std::size_t k) {
  if (k < 2) throw std::invalid_argument("embed_np_as_bd: k must be >= 2");
  if (n < k) throw std::invalid_argument("embed_np_as_bd: need N >= k");
  Embedding e;
  e.n = n;
  e.k = k;
  e.lambda.assign(n + 1, Rational(0));
  for (std::size_t j = 1; j <= n; ++j) e.lambda[j] = embedded_lambda(n, k, j);

  std::vector<double> breaks;
  std::vector<std::vector<double>> vals;
  const double d = static_cast<double>(n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    breaks.push_back(static_cast<double>(j - 1) / d);
    vals.push_back({e.lambda[j].convert_to<double>()});
  }
  breaks.push_back(1.0);
  e.b_hat = BirthFunction(PiecewisePoly(breaks, vals), {{1.0, e.lambda[n].convert_to<double>()}});

  std::vector<KillMeasure> ds;
  for (std::size_t j = 2; j <= n; ++j) {
    if (j < k) {
      ds.push_back(KillMeasure::power(static_cast<int>(k) - 1));
      continue;
    }
    const double m = static_cast<double>(j - 1);
    std::vector<double> br;
    std::vector<std::vector<double>> dens;
    for (std::size_t i = 1; i < j; ++i) {
      br.push_back(static_cast<double>(i - 1) / m);
      const Rational mass = embedded_q(k, i, j) - (i >= 2 ? embedded_q(k, i - 1, j) : Rational(0));
      dens.push_back({(mass * Rational(static_cast<long>(j - 1))).convert_to<double>()});
    }
    br.push_back(1.0);
    ds.emplace_back(0.0, std::vector<KillMeasure::Atom>{}, PiecewisePoly(br, dens));
  }
  // D_hat_{j-1} is stored at index j-1; index 1 corresponds to j = 2.
  e.d_hat = KillSchedule(std::move(ds));
  return e;
}

/// Exact check of lambda_j <= ((j-1)/(N-1))^(k-1) and q_ij <= (i/(j-1))^(k-1) for all valid i, j.
inline bool check_embedding_bounds(std::size_t n, std::size_t k) {
  if (n < k || k < 2) throw std::invalid_argument("check_embedding_bounds: need N >= k >= 2");
  auto pw = [](const Rational& x, std::size_t e) {
    Rational r = 1;
    for (std::size_t s = 0; s < e; ++s) r *= x;
    return r;
  };
  for (std::size_t j = 1; j <= n; ++j) {
    const Rational x(static_cast<long>(j - 1), static_cast<long>(n - 1));
    if (embedded_lambda(n, k, j) > pw(x, k - 1)) return false;
    if (j < k) continue;
    for (std::size_t i = k - 1; i < j; ++i)
      if (embedded_q(k, i, j) > pw(Rational(static_cast<long>(i), static_cast<long>(j - 1)), k - 1)) return false;
  }
  return true;
}

}  // namespace bdbbm
