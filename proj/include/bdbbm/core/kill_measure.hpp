// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/core/piecewise_poly.hpp"

namespace bdbbm {

/**
 * Probability measure on {-inf} U [0,1): an atom at -inf, finitely many atoms in
 * [0,1) and a piecewise-polynomial density supported in [0,1].
 */
class KillMeasure {
 public:
  struct Atom {
    double x;
    double mass;
  };

  KillMeasure() : KillMeasure(1.0, {}, std::nullopt) {}

  KillMeasure(double mass_minus_inf, std::vector<Atom> atoms, std::optional<PiecewisePoly> density,
              double tol = 1e-9)
      : minus_inf_(mass_minus_inf), atoms_(std::move(atoms)), density_(std::move(density)) {
    if (!(minus_inf_ >= 0.0 && minus_inf_ <= 1.0))
      throw std::invalid_argument("KillMeasure: mass at -inf must lie in [0,1]");
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
    std::vector<Atom> merged;
    for (const Atom& a : atoms_) {
      if (!(a.x >= 0.0 && a.x < 1.0)) throw std::invalid_argument("KillMeasure: atom outside [0,1)");
      if (!(a.mass >= 0.0)) throw std::invalid_argument("KillMeasure: negative atom mass");
      if (a.mass == 0.0) continue;
      if (!merged.empty() && merged.back().x == a.x)
        merged.back().mass += a.mass;
      else
        merged.push_back(a);
    }
    atoms_ = std::move(merged);
    double total = minus_inf_;
    for (const Atom& a : atoms_) total += a.mass;
    if (density_) {
      if (density_->lo() < 0.0 || density_->hi() > 1.0)
        throw std::invalid_argument("KillMeasure: density must be supported in [0,1]");
      for (const auto& p : density_->pieces()) {
        // Sampled nonnegativity check; Bernstein coefficients >= 0 is sufficient on its own.
        if (p.min_coeff() >= 0.0) continue;
        for (int s = 0; s <= 256; ++s) {
          const double x = p.lo() + (p.hi() - p.lo()) * s / 256.0;
          if (p(x) < -tol) throw std::invalid_argument("KillMeasure: density is negative");
        }
      }
      total += density_->total();
    }
    if (std::abs(total - 1.0) > tol)
      throw std::invalid_argument("KillMeasure: total mass " + std::to_string(total) + " != 1");
    build_knots();
  }

  // Presets.
  static KillMeasure minus_inf() { return KillMeasure(1.0, {}, std::nullopt); }
  static KillMeasure point_mass(double x) { return KillMeasure(0.0, {{x, 1.0}}, std::nullopt); }
  static KillMeasure uniform() { return KillMeasure(0.0, {}, PiecewisePoly::constant(1.0)); }
  /// Mass m at -inf, the remaining 1 - m uniform on [0,1).
  static KillMeasure mixed_uniform(double m) {
    return KillMeasure(m, {}, PiecewisePoly::constant(1.0 - m));
  }
  /// CDF x^m on [0,1] (m >= 1).
  static KillMeasure power(int m) {
    if (m < 1) throw std::invalid_argument("KillMeasure::power: exponent must be >= 1");
    std::vector<double> beta(static_cast<std::size_t>(m), 0.0);
    beta.back() = m;
    return KillMeasure(0.0, {}, PiecewisePoly({0.0, 1.0}, {beta}));
  }
  /// D_k(r) = 1 - (1-r)^(k-1) ((k-1) r + 1), density k(k-1) r (1-r)^(k-2).
  static KillMeasure dk(int k) {
    if (k < 2) throw std::invalid_argument("KillMeasure::dk: k must be >= 2");
    std::vector<double> beta(static_cast<std::size_t>(k), 0.0);
    beta[1] = k;
    return KillMeasure(0.0, {}, PiecewisePoly({0.0, 1.0}, {beta}));
  }

  double mass_at_minus_inf() const noexcept { return minus_inf_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::optional<PiecewisePoly>& density() const noexcept { return density_; }

  /// Density value (0 where absent).
  double density_at(double x) const { return density_ ? (*density_)(x) : 0.0; }

  /// D(x) = P((-inf, x]); D(-inf) is the mass at -inf.
  double cdf(double x) const {
    if (x < 0.0) return minus_inf_;
    double v = minus_inf_;
    for (const Atom& a : atoms_) {
      if (a.x > x) break;
      v += a.mass;
    }
    if (density_) v += density_->antiderivative(x);
    return std::min(v, 1.0);
  }

  /// D(x-) = P((-inf, x)).
  double left_limit(double x) const {
    if (x <= 0.0) return minus_inf_;
    double v = minus_inf_;
    for (const Atom& a : atoms_) {
      if (a.x >= x) break;
      v += a.mass;
    }
    if (density_) v += density_->antiderivative(x);
    return std::min(v, 1.0);
  }

  /// inf{x : D(x) >= y} for y in (0,1]; -inf iff y <= D(-inf).
  double generalized_inverse(double y) const {
    if (!(y > 0.0 && y <= 1.0)) throw std::domain_error("generalized_inverse: y must lie in (0,1]");
    if (y <= minus_inf_) return kMinusInf;
    double cum = minus_inf_;
    double last_support = 0.0;
    std::size_t ai = 0;
    for (std::size_t s = 0; s < knots_.size(); ++s) {
      const double k0 = knots_[s];
      while (ai < atoms_.size() && atoms_[ai].x == k0) {
        cum += atoms_[ai].mass;
        last_support = k0;
        ++ai;
        if (cum >= y) return k0;
      }
      if (!density_ || s + 1 == knots_.size()) continue;
      const double k1 = knots_[s + 1];
      const double mass = density_->integral(k0, k1);
      if (mass <= 0.0) continue;
      if (cum + mass >= y) {
        const double x = density_->solve_integral(k0, k1, y - cum);
        return std::min(x, std::nextafter(1.0, 0.0));
      }
      cum += mass;
      last_support = std::nextafter(k1, k0);
    }
    // Rounding left y marginally above the accumulated total.
    return std::min(last_support, std::nextafter(1.0, 0.0));
  }

  /// Every point where D may fail to be smooth: atoms and density breaks.
  const std::vector<double>& knots() const noexcept { return knots_; }

 private:
  void build_knots() {
    knots_.clear();
    for (const Atom& a : atoms_) knots_.push_back(a.x);
    if (density_)
      for (double b : density_->breaks()) knots_.push_back(b);
    knots_.push_back(0.0);
    knots_.push_back(1.0);
    std::sort(knots_.begin(), knots_.end());
    knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());
  }

  double minus_inf_;
  std::vector<Atom> atoms_;
  std::optional<PiecewisePoly> density_;
  std::vector<double> knots_;
};

/// Kill quantile in {1..j-1}, or nullopt for no kill: i with (i-1)/(j-1) <= D^{-1}(u) < i/(j-1).
inline std::optional<std::size_t> sample_kill_quantile(const KillMeasure& d, std::size_t j, double u) {
  if (j < 2) throw std::invalid_argument("sample_kill_quantile: branching quantile j must be >= 2");
  const double v = d.generalized_inverse(u);
  if (is_minus_inf(v)) return std::nullopt;
  const std::size_t n = j - 1;
  const double nd = static_cast<double>(n);
  auto i = static_cast<std::size_t>(std::floor(v * nd));
  // Guard against v * n rounding across a bin edge.
  while (i > 0 && static_cast<double>(i) / nd > v) --i;
  while (i + 1 < n && static_cast<double>(i + 1) / nd <= v) ++i;
  return std::min(i, n - 1) + 1;
}

/// P(kill = i) = D(i/(j-1)-) - D((i-1)/(j-1)-), i in 1..j-1.
inline double kill_probability(const KillMeasure& d, std::size_t j, std::size_t i) {
  if (j < 2 || i < 1 || i >= j) throw std::out_of_range("kill_probability: need 1 <= i < j");
  const double n = static_cast<double>(j - 1);
  const double hi = i + 1 == j ? 1.0 : d.left_limit(static_cast<double>(i) / n);
  return hi - d.left_limit(static_cast<double>(i - 1) / n);
}

}  // namespace bdbbm
