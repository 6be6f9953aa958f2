// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace bdbbm {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Exact C(n, k); zero outside 0 <= k <= n.
inline BigInt binomial_exact(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline Rational binomial_q(long n, long k) { return Rational(binomial_exact(n, k)); }

}  // namespace bdbbm
