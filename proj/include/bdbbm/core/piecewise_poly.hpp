// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bdbbm {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r) == r || n > 60 ? r : std::round(r);
}

/// Polynomial in Bernstein form on [a, b]: sum_m beta_m C(n,m) t^m (1-t)^(n-m), t = (x-a)/(b-a).
/// De Casteljau evaluation keeps high-degree densities like (1-r)^14 well conditioned.
class BernsteinPoly {
 public:
  BernsteinPoly() : coeffs_{0.0} {}
  BernsteinPoly(double a, double b, std::vector<double> coeffs)
      : a_(a), b_(b), coeffs_(std::move(coeffs)) {
    if (!(b > a)) throw std::invalid_argument("BernsteinPoly: empty interval");
    if (coeffs_.empty()) coeffs_.push_back(0.0);
  }

  /// Converts local monomial coefficients sum_i c_i t^i into Bernstein form.
  static BernsteinPoly from_local_monomial(double a, double b, const std::vector<double>& c) {
    const int n = std::max<int>(0, static_cast<int>(c.size()) - 1);
    std::vector<double> beta(static_cast<std::size_t>(n) + 1, 0.0);
    for (int m = 0; m <= n; ++m)
      for (int i = 0; i <= m && i < static_cast<int>(c.size()); ++i)
        beta[m] += binomial(m, i) / binomial(n, i) * c[i];
    return BernsteinPoly(a, b, std::move(beta));
  }

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  double lo() const noexcept { return a_; }
  double hi() const noexcept { return b_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

  double operator()(double x) const { return casteljau(coeffs_, local(x)); }

  BernsteinPoly derivative() const {
    const int n = degree();
    if (n == 0) return BernsteinPoly(a_, b_, {0.0});
    std::vector<double> d(static_cast<std::size_t>(n));
    const double scale = n / (b_ - a_);
    for (int m = 0; m < n; ++m) d[m] = scale * (coeffs_[m + 1] - coeffs_[m]);
    return BernsteinPoly(a_, b_, std::move(d));
  }

  /// Antiderivative vanishing at a.
  BernsteinPoly antiderivative() const {
    const int n = degree();
    std::vector<double> g(static_cast<std::size_t>(n) + 2, 0.0);
    const double scale = (b_ - a_) / (n + 1);
    for (int j = 1; j <= n + 1; ++j) g[j] = g[j - 1] + scale * coeffs_[j - 1];
    return BernsteinPoly(a_, b_, std::move(g));
  }

  double min_coeff() const { return *std::min_element(coeffs_.begin(), coeffs_.end()); }
  double max_coeff() const { return *std::max_element(coeffs_.begin(), coeffs_.end()); }

 private:
  double local(double x) const { return (x - a_) / (b_ - a_); }

  static double casteljau(const std::vector<double>& beta, double t) {
    if (beta.size() == 1) return beta[0];
    double tmp[64];
    std::vector<double> heap;
    double* w = tmp;
    if (beta.size() > 64) {
      heap.assign(beta.begin(), beta.end());
      w = heap.data();
    } else {
      std::copy(beta.begin(), beta.end(), tmp);
    }
    const double s = 1.0 - t;
    for (std::size_t r = 1; r < beta.size(); ++r)
      for (std::size_t i = 0; i + r < beta.size(); ++i) w[i] = s * w[i] + t * w[i + 1];
    return w[0];
  }

  double a_ = 0.0;
  double b_ = 1.0;
  std::vector<double> coeffs_;
};

/// Piecewise polynomial on [breaks.front(), breaks.back()] with right-open pieces;
/// the last piece is closed on the right.
class PiecewisePoly {
 public:
  PiecewisePoly() : PiecewisePoly({0.0, 1.0}, {{0.0}}) {}

  PiecewisePoly(std::vector<double> breaks, const std::vector<std::vector<double>>& bernstein) {
    if (breaks.size() < 2 || bernstein.size() + 1 != breaks.size())
      throw std::invalid_argument("PiecewisePoly: need breaks.size() == pieces + 1 >= 2");
    for (std::size_t m = 0; m + 1 < breaks.size(); ++m) {
      if (!(breaks[m + 1] > breaks[m]))
        throw std::invalid_argument("PiecewisePoly: breaks must be strictly increasing");
      pieces_.emplace_back(breaks[m], breaks[m + 1], bernstein[m]);
    }
    breaks_ = std::move(breaks);
    build();
  }

  explicit PiecewisePoly(std::vector<BernsteinPoly> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw std::invalid_argument("PiecewisePoly: no pieces");
    breaks_.push_back(pieces_.front().lo());
    for (std::size_t m = 0; m < pieces_.size(); ++m) {
      if (m > 0 && pieces_[m].lo() != pieces_[m - 1].hi())
        throw std::invalid_argument("PiecewisePoly: pieces must be contiguous");
      breaks_.push_back(pieces_[m].hi());
    }
    build();
  }

  static PiecewisePoly constant(double c, double a = 0.0, double b = 1.0) {
    return PiecewisePoly({a, b}, {{c}});
  }
  /// x^m on [0, 1].
  static PiecewisePoly power(int m) {
    std::vector<double> beta(static_cast<std::size_t>(m) + 1, 0.0);
    beta.back() = 1.0;
    return PiecewisePoly({0.0, 1.0}, {beta});
  }

  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<BernsteinPoly>& pieces() const noexcept { return pieces_; }
  double lo() const noexcept { return breaks_.front(); }
  double hi() const noexcept { return breaks_.back(); }

  std::size_t piece_index(double x) const {
    if (x <= breaks_.front()) return 0;
    if (x >= breaks_.back()) return pieces_.size() - 1;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return static_cast<std::size_t>(it - breaks_.begin()) - 1;
  }

  /// Value; zero outside [lo, hi].
  double operator()(double x) const {
    if (x < lo() || x > hi()) return 0.0;
    return pieces_[piece_index(x)](x);
  }

  /// Integral from lo() to x (clamped to the domain).
  double antiderivative(double x) const {
    if (x <= lo()) return 0.0;
    if (x >= hi()) return cumulative_.back();
    const std::size_t m = piece_index(x);
    return cumulative_[m] + primitives_[m](x);
  }

  double integral(double from, double to) const { return antiderivative(to) - antiderivative(from); }
  double total() const noexcept { return cumulative_.back(); }

  double upper_bound_value() const {
    double r = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) r = std::max(r, p.max_coeff());
    return r;
  }

  /// Smallest x in [from, to] with integral(from, x) >= target (target in (0, integral(from,to)]).
  double solve_integral(double from, double to, double target) const {
    double lo_x = from, hi_x = to;
    for (int it = 0; it < 200 && hi_x - lo_x > 0.0; ++it) {
      const double mid = 0.5 * (lo_x + hi_x);
      if (mid <= lo_x || mid >= hi_x) break;
      if (integral(from, mid) >= target)
        hi_x = mid;
      else
        lo_x = mid;
    }
    return hi_x;
  }

 private:
  void build() {
    primitives_.clear();
    cumulative_.assign(1, 0.0);
    for (const auto& p : pieces_) {
      primitives_.push_back(p.antiderivative());
      cumulative_.push_back(cumulative_.back() + primitives_.back()(p.hi()));
    }
  }

  std::vector<double> breaks_;
  std::vector<BernsteinPoly> pieces_;
  std::vector<BernsteinPoly> primitives_;
  std::vector<double> cumulative_;
};

}  // namespace bdbbm
