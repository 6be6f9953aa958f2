// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bdbbm/core/birth_function.hpp"
#include "bdbbm/core/kill_measure.hpp"
#include "bdbbm/core/piecewise_poly.hpp"
#include "bdbbm/core/rational.hpp"
#include "bdbbm/np/spec.hpp"

namespace bdbbm {

/// Reaction term h on [0,1] of du/dt = u''/2 - h(u) + g.
struct SourceSpec {
  std::function<double(double)> h;
  std::function<double(double)> dh;  ///< derivative on [0,1]
  std::string kind = "custom";        ///< h_p, h_p^N, custom, tail-pair

  double operator()(double v) const { return h(v); }
  double d0() const { return dh(0.0); }
  double d1() const { return dh(1.0); }

  /// Polynomial source from Bernstein coefficients on [0,1].
  static SourceSpec bernstein(std::vector<double> beta, std::string kind = "custom") {
    auto poly = std::make_shared<BernsteinPoly>(0.0, 1.0, std::move(beta));
    auto der = std::make_shared<BernsteinPoly>(poly->derivative());
    return {[poly](double v) { return (*poly)(v); }, [der](double v) { return (*der)(v); }, std::move(kind)};
  }
  /// Polynomial source from monomial coefficients sum_i c_i v^i.
  static SourceSpec monomial(const std::vector<double>& c, std::string kind = "custom") {
    return bernstein(BernsteinPoly::from_local_monomial(0.0, 1.0, c).coeffs(), std::move(kind));
  }
  /// a v (1 - v).
  static SourceSpec fkpp(double a = 1.0) { return bernstein({0.0, a / 2.0, 0.0}); }
  /// Arbitrary evaluator; the derivative is taken by central differences.
  static SourceSpec custom(std::function<double(double)> f) {
    auto d = [f](double v) {
      const double e = 1e-6;
      const double lo = std::max(0.0, v - e), hi = std::min(1.0, v + e);
      return (f(hi) - f(lo)) / (hi - lo);
    };
    return {std::move(f), d, "custom"};
  }
  /// Scaled copy a*h.
  SourceSpec scaled(double a) const {
    auto f = h;
    auto d = dh;
    return {[f, a](double v) { return a * f(v); }, [d, a](double v) { return a * d(v); }, kind};
  }

  /// sup of h' on [0,1], sampled on a 10^4-point grid.
  double sup_derivative() const {
    double m = -std::numeric_limits<double>::infinity();
    for (int s = 0; s <= 10000; ++s) m = std::max(m, dh(s / 10000.0));
    return m;
  }
};

/// h_p(v) = lambda sum_r p_hat(r) C(k,r) v^r (1-v)^(k-r).
inline SourceSpec source_hp(const NPSpec& s) {
  s.validate();
  std::vector<double> beta(s.k + 1, 0.0);
  for (std::size_t r = 1; r < s.k; ++r) beta[r] = s.lambda * p_hat(s, r);
  return SourceSpec::bernstein(std::move(beta), "h_p");
}

namespace detail {
/// Multiplies polynomial (monomial coefficients) by (a + b v).
inline void mul_linear(std::vector<double>& c, double a, double b) {
  std::vector<double> out(c.size() + 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] += a * c[i];
    out[i + 1] += b * c[i];
  }
  c = std::move(out);
}
}  // namespace detail

/// w_r^N(u) = prod_{l<r}(u - l/N) prod_{l<k-r}(1 - u - l/N) prod_{l<k} N/(N-l), as monomial coefficients.
inline std::vector<double> hypergeometric_weight(std::size_t k, std::size_t r, std::size_t n) {
  std::vector<double> c{1.0};
  const double nd = static_cast<double>(n);
  for (std::size_t l = 0; l < r; ++l) detail::mul_linear(c, -static_cast<double>(l) / nd, 1.0);
  for (std::size_t l = 0; l + r < k; ++l) detail::mul_linear(c, 1.0 - static_cast<double>(l) / nd, -1.0);
  double f = 1.0;
  for (std::size_t l = 0; l < k; ++l) f *= nd / (nd - static_cast<double>(l));
  for (double& v : c) v *= f;
  return c;
}

/// C(k,r) w_r^N(m/N) evaluated exactly from the product form.
inline Rational hypergeometric_weight_exact(std::size_t k, std::size_t r, std::size_t n, std::size_t m) {
  if (r > k || n < k || m > n) throw std::invalid_argument("hypergeometric_weight_exact: need r <= k <= N, m <= N");
  const auto nn = static_cast<long>(n), mm = static_cast<long>(m);
  Rational w = binomial_q(static_cast<long>(k), static_cast<long>(r));
  for (long l = 0; l < static_cast<long>(r); ++l) w *= Rational(mm - l, nn);
  for (long l = 0; l < static_cast<long>(k - r); ++l) w *= Rational(nn - mm - l, nn);
  for (long l = 0; l < static_cast<long>(k); ++l) w *= Rational(nn, nn - l);
  return w;
}

/// P(r of k draws without replacement from N land among m marked) = C(m,r) C(N-m,k-r) / C(N,k).
inline Rational hypergeometric_pmf(std::size_t k, std::size_t r, std::size_t n, std::size_t m) {
  if (r > k || n < k || m > n) throw std::invalid_argument("hypergeometric_pmf: need r <= k <= N, m <= N");
  return binomial_q(static_cast<long>(m), static_cast<long>(r)) *
         binomial_q(static_cast<long>(n - m), static_cast<long>(k - r)) /
         binomial_q(static_cast<long>(n), static_cast<long>(k));
}

/// Finite-N drift h_p^N(u) = lambda sum_r p_hat(r) C(k,r) w_r^N(u).
inline SourceSpec source_hpN(const NPSpec& s, std::size_t n) {
  s.validate();
  if (n < s.k) throw std::invalid_argument("source_hpN: need N >= k");
  std::vector<double> c(s.k + 1, 0.0);
  for (std::size_t r = 1; r < s.k; ++r) {
    const auto w = hypergeometric_weight(s.k, r, n);
    const double f = s.lambda * p_hat(s, r) * binomial(static_cast<int>(s.k), static_cast<int>(r));
    for (std::size_t i = 0; i < w.size(); ++i) c[i] += f * w[i];
  }
  return SourceSpec::monomial(c, "h_p^N");
}

/// Tail sources B(z) = int_{1-z}^1 b and G(z) = int_{1-z}^1 int_s^1 b(s/r)/r D(dr) ds.
struct TailSources {
  std::function<double(double)> B, G, dB, dG;
};

namespace detail {

/// 20-point Gauss-Legendre nodes/weights on [-1, 1].
inline const std::array<std::pair<double, double>, 20>& gauss_legendre20() {
  static const std::array<std::pair<double, double>, 20> t = [] {
    std::array<std::pair<double, double>, 20> r{};
    const int n = 20;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      r[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return r;
  }();
  return t;
}

/// int_{[a,1)} D(dr) phi(a, r): atoms summed, density integrated by Gauss-Legendre in log r.
/// For a = 0 the integrand must not depend on r.
template <class Phi>
double kill_integral(const KillMeasure& d, const std::vector<double>& b_breaks, double a, Phi&& phi) {
  double s = 0.0;
  for (const auto& at : d.atoms())
    if (at.x >= a && at.x > 0.0) s += at.mass * phi(a, at.x);
  if (!d.density()) return s;
  const auto& dens = *d.density();
  if (a <= 0.0) {
    // phi(0, r) does not depend on r for the integrands used here.
    return s + dens.integral(0.0, 1.0) * phi(0.0, 1.0);
  }
  std::vector<double> cuts{a, 1.0};
  for (double x : dens.breaks())
    if (x > a && x < 1.0) cuts.push_back(x);
  for (double beta : b_breaks)
    if (beta > 0.0 && beta < 1.0 && a / beta > a && a / beta < 1.0) cuts.push_back(a / beta);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto& gl = gauss_legendre20();
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double t0 = std::log(cuts[c]), t1 = std::log(cuts[c + 1]);
    const int pieces = std::max(1, static_cast<int>(std::ceil((t1 - t0) / 0.5)));
    for (int p = 0; p < pieces; ++p) {
      const double u0 = t0 + (t1 - t0) * p / pieces, u1 = t0 + (t1 - t0) * (p + 1) / pieces;
      const double mid = 0.5 * (u0 + u1), half = 0.5 * (u1 - u0);
      for (const auto& [x, w] : gl) {
        const double r = std::exp(mid + half * x);
        s += w * half * r * dens(r) * phi(a, r);
      }
    }
  }
  return s;
}

/// Cubic Hermite table on a uniform grid of [0,1].
class HermiteTable {
 public:
  HermiteTable(std::vector<double> v, std::vector<double> d) : v_(std::move(v)), d_(std::move(d)) {
    n_ = v_.size() - 1;
  }
  double value(double z) const {
    z = std::clamp(z, 0.0, 1.0);
    const double pos = z * static_cast<double>(n_);
    std::size_t i = std::min(static_cast<std::size_t>(pos), n_ - 1);
    const double h = 1.0 / static_cast<double>(n_);
    const double t = pos - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * v_[i + 1] +
           (t3 - t2) * h * d_[i + 1];
  }
  double derivative(double z) const {
    z = std::clamp(z, 0.0, 1.0);
    const double pos = z * static_cast<double>(n_);
    std::size_t i = std::min(static_cast<std::size_t>(pos), n_ - 1);
    const double h = 1.0 / static_cast<double>(n_);
    const double t = pos - static_cast<double>(i);
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * v_[i] + (3 * t2 - 4 * t + 1) * h * d_[i] + (-6 * t2 + 6 * t) * v_[i + 1] +
            (3 * t2 - 2 * t) * h * d_[i + 1]) /
           h;
  }

 private:
  std::vector<double> v_, d_;
  std::size_t n_;
};

}  // namespace detail

/// Exact-quadrature evaluators for B, G and their derivatives. z is clamped to [0,1].
inline TailSources tail_sources_BG(const BirthFunction& b, const KillMeasure& d) {
  auto bb = std::make_shared<BirthFunction>(b);
  auto dd = std::make_shared<KillMeasure>(d);
  auto brk = std::make_shared<std::vector<double>>(b.breakpoints());
  TailSources t;
  t.B = [bb](double z) { return bb->tail_integral(1.0 - std::clamp(z, 0.0, 1.0)); };
  t.dB = [bb](double z) { return (*bb)(1.0 - std::clamp(z, 0.0, 1.0)); };
  t.G = [bb, dd, brk](double z) {
    const double a = 1.0 - std::clamp(z, 0.0, 1.0);
    return detail::kill_integral(*dd, *brk, a, [&](double aa, double r) { return bb->tail_integral(aa / r); });
  };
  t.dG = [bb, dd, brk](double z) {
    // The r-dependent integrand needs a > 0; at z = 1 the slope may be infinite anyway.
    const double a = std::max(1.0 - std::clamp(z, 0.0, 1.0), 1e-12);
    return detail::kill_integral(*dd, *brk, a, [&](double aa, double r) { return (*bb)(aa / r) / r; });
  };
  return t;
}

/// Tail equation dV/dt = V''/2 + B(V) - G(V) as a source h = G - B, tabulated for speed.
inline SourceSpec tail_source(const BirthFunction& b, const KillMeasure& d, std::size_t nodes = 16384) {
  const TailSources t = tail_sources_BG(b, d);
  std::vector<double> v(nodes + 1), dv(nodes + 1);
  for (std::size_t i = 0; i <= nodes; ++i) {
    const double z = static_cast<double>(i) / static_cast<double>(nodes);
    v[i] = t.G(z) - t.B(z);
    if (i < nodes) dv[i] = t.dG(z) - t.dB(z);
  }
  // G'(1) = int D(dr) b(0)/r may diverge (b(0) > 0 with density near 0); use a one-sided slope there.
  dv[nodes] = (v[nodes] - v[nodes - 1]) * static_cast<double>(nodes);
  auto table = std::make_shared<detail::HermiteTable>(std::move(v), std::move(dv));
  return {[table](double z) { return table->value(z); }, [table](double z) { return table->derivative(z); },
          "tail-pair"};
}

}  // namespace bdbbm
