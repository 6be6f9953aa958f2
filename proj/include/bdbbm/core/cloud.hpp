// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/core/rng.hpp"

namespace bdbbm {

/**
 * Mutable particle store used inside the simulators.
 *
 * Particles are kept unsorted; rank queries partition the storage with
 * nth_element under the (position, label) order, so each query costs O(N) and
 * the storage layout after a query is a deterministic function of the input.
 * Replays that repeat the same queries therefore see the same layout.
 */
class Cloud {
 public:
  struct Particle {
    double x;
    Label label;
  };

  Cloud() = default;
  explicit Cloud(const ParticleConfig& c) : next_label_(c.next_label()) {
    p_.reserve(c.size());
    for (std::size_t s = 0; s < c.size(); ++s) p_.push_back({c.position(s), c.label(s)});
  }

  std::size_t size() const noexcept { return p_.size(); }
  const Particle& operator[](std::size_t s) const { return p_[s]; }
  const std::vector<Particle>& particles() const noexcept { return p_; }
  Label next_label() const noexcept { return next_label_; }

  /// Adds N(0, dt) to every finite particle, in storage order.
  void advance(double dt, Rng& rng, std::vector<double>* increments = nullptr) {
    if (dt <= 0.0) return;
    const double sd = std::sqrt(dt);
    if (increments) increments->clear();
    for (auto& q : p_) {
      if (is_minus_inf(q.x)) continue;
      const double z = rng.normal(sd);
      q.x += z;
      if (increments) increments->push_back(z);
    }
  }

  void apply_increments(const std::vector<double>& inc) {
    std::size_t k = 0;
    for (auto& q : p_) {
      if (is_minus_inf(q.x)) continue;
      if (k >= inc.size()) throw std::runtime_error("Cloud: increment record too short");
      q.x += inc[k++];
    }
    if (k != inc.size()) throw std::runtime_error("Cloud: increment record too long");
  }

  /// Moves the particle of rank q (1-based) among storage [0, hi) to slot q-1; returns q-1.
  std::size_t select(std::size_t q, std::size_t hi) {
    auto first = p_.begin();
    std::nth_element(first, first + static_cast<std::ptrdiff_t>(q - 1), first + static_cast<std::ptrdiff_t>(hi), less);
    return q - 1;
  }
  std::size_t select(std::size_t q) { return select(q, p_.size()); }

  /// 1-based rank of the particle in slot s.
  std::size_t rank_of(std::size_t s) const {
    std::size_t r = 1;
    for (std::size_t t = 0; t < p_.size(); ++t)
      if (t != s && less(p_[t], p_[s])) ++r;
    return r;
  }

  std::size_t slot_of_label(Label l) const {
    for (std::size_t s = 0; s < p_.size(); ++s)
      if (p_[s].label == l) return s;
    throw std::out_of_range("Cloud: unknown label");
  }

  void set_x(std::size_t s, double x) { p_[s].x = x; }
  Label push(double x) {
    p_.push_back({x, next_label_});
    return next_label_++;
  }
  void erase(std::size_t s) {
    p_[s] = p_.back();
    p_.pop_back();
  }

  double max_finite() const {
    double m = kMinusInf;
    for (const auto& q : p_) m = std::max(m, q.x);
    return m;
  }

  /// Mean of the finite positions; NaN when there are none.
  double mean_finite() const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& q : p_)
      if (!is_minus_inf(q.x)) {
        s += q.x;
        ++n;
      }
    return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  }

  /// Configuration in quantile order.
  ParticleConfig config() const {
    std::vector<Particle> s = p_;
    std::sort(s.begin(), s.end(), less);
    std::vector<double> x;
    std::vector<Label> l;
    x.reserve(s.size());
    l.reserve(s.size());
    for (const auto& q : s) {
      x.push_back(q.x);
      l.push_back(q.label);
    }
    return ParticleConfig(std::move(x), std::move(l));
  }

  std::vector<double> sorted_positions() const {
    std::vector<double> x;
    x.reserve(p_.size());
    for (const auto& q : p_) x.push_back(q.x);
    std::sort(x.begin(), x.end());
    return x;
  }

  static bool less(const Particle& a, const Particle& b) noexcept {
    return quantile_less(a.x, a.label, b.x, b.label);
  }

 private:
  std::vector<Particle> p_;
  Label next_label_ = 1;
};

}  // namespace bdbbm
