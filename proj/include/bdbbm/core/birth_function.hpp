// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bdbbm/core/piecewise_poly.hpp"

namespace bdbbm {

/// Birth rate b : [0,1] -> [0, inf), piecewise polynomial plus isolated point values.
class BirthFunction {
 public:
  struct PointValue {
    double x;
    double value;
  };

  BirthFunction() : BirthFunction(PiecewisePoly::constant(1.0)) {}

  explicit BirthFunction(PiecewisePoly poly, std::vector<PointValue> points = {})
      : poly_(std::move(poly)), points_(std::move(points)) {
    if (poly_.lo() > 0.0 || poly_.hi() < 1.0)
      throw std::invalid_argument("BirthFunction: polynomial must cover [0,1]");
    for (const auto& p : points_) {
      if (p.x < 0.0 || p.x > 1.0) throw std::invalid_argument("BirthFunction: point outside [0,1]");
      if (!(p.value >= 0.0)) throw std::invalid_argument("BirthFunction: negative point value");
    }
    b_max_ = std::max(0.0, poly_.upper_bound_value());
    for (const auto& p : points_) b_max_ = std::max(b_max_, p.value);
    for (std::size_t s = 0; s <= 10000; ++s)
      if ((*this)(s / 10000.0) < -1e-12) throw std::invalid_argument("BirthFunction: negative rate");
    for (double x : poly_.breaks())
      if (x >= 0.0 && x <= 1.0 && (*this)(x) < -1e-12)
        throw std::invalid_argument("BirthFunction: negative rate");
  }

  static BirthFunction constant(double c) { return BirthFunction(PiecewisePoly::constant(c)); }
  /// Indicator of (0,1].
  static BirthFunction indicator_positive() {
    return BirthFunction(PiecewisePoly::constant(1.0), {{0.0, 0.0}});
  }
  static BirthFunction power(int m) { return BirthFunction(PiecewisePoly::power(m)); }
  static BirthFunction identity() { return power(1); }

  double operator()(double x) const {
    for (const auto& p : points_)
      if (p.x == x) return p.value;
    return std::max(0.0, poly_(x));
  }

  double b_max() const noexcept { return b_max_; }
  const PiecewisePoly& poly() const noexcept { return poly_; }
  const std::vector<PointValue>& points() const noexcept { return points_; }

  /// Constant function with no point overrides.
  bool is_constant() const {
    if (!points_.empty()) return false;
    for (const auto& p : poly_.pieces())
      if (p.max_coeff() != p.min_coeff() || p.max_coeff() != poly_.pieces().front().max_coeff())
        return false;
    return true;
  }

  /// B(a) = integral of b over [a, 1].
  double tail_integral(double a) const { return poly_.integral(std::clamp(a, 0.0, 1.0), 1.0); }

  /// Discontinuity candidates: polynomial breaks and point overrides.
  std::vector<double> breakpoints() const {
    std::vector<double> v(poly_.breaks().begin(), poly_.breaks().end());
    for (const auto& p : points_) v.push_back(p.x);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

 private:
  PiecewisePoly poly_;
  std::vector<PointValue> points_;
  double b_max_ = 0.0;
};

}  // namespace bdbbm
