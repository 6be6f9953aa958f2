// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bdbbm {

using Label = std::uint64_t;

/// Positions live in {-inf} U R. This is the distinguished -inf sentinel.
inline constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

inline bool is_minus_inf(double x) noexcept { return x == kMinusInf; }
inline bool is_valid_position(double x) noexcept {
  return !std::isnan(x) && x != std::numeric_limits<double>::infinity();
}

/// Strict (position, label) order used for every quantile computation.
inline bool quantile_less(double xa, Label la, double xb, Label lb) noexcept {
  return xa < xb || (xa == xb && la < lb);
}

/**
 * A finite labeled particle configuration.
 *
 * Slot order is the order in which particles were created (or given); quantile
 * order is obtained through sort_permutation(). Labels are unique and the fresh
 * label counter never decreases, so a particle appended later always wins ties
 * against older particles at the same position.
 */
class ParticleConfig {
 public:
  ParticleConfig() = default;

  ParticleConfig(std::vector<double> positions, std::vector<Label> labels)
      : positions_(std::move(positions)), labels_(std::move(labels)) {
    if (positions_.size() != labels_.size())
      throw std::invalid_argument("ParticleConfig: positions/labels size mismatch");
    if (positions_.empty()) throw std::invalid_argument("ParticleConfig: empty configuration");
    for (double x : positions_)
      if (!is_valid_position(x))
        throw std::invalid_argument("ParticleConfig: positions must be finite or -inf");
    std::vector<Label> sorted = labels_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("ParticleConfig: duplicate labels");
    next_label_ = sorted.back() + 1;
  }

  /// Labels 1..N in slot order.
  static ParticleConfig from_positions(std::vector<double> positions) {
    std::vector<Label> labels(positions.size());
    std::iota(labels.begin(), labels.end(), Label{1});
    return ParticleConfig(std::move(positions), std::move(labels));
  }

  std::size_t size() const noexcept { return positions_.size(); }
  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const Label> labels() const noexcept { return labels_; }
  double position(std::size_t slot) const { return positions_.at(slot); }
  Label label(std::size_t slot) const { return labels_.at(slot); }
  Label next_label() const noexcept { return next_label_; }

  std::size_t slot_of(Label l) const {
    auto it = std::find(labels_.begin(), labels_.end(), l);
    if (it == labels_.end()) throw std::out_of_range("ParticleConfig: unknown label");
    return static_cast<std::size_t>(it - labels_.begin());
  }
  double position_of(Label l) const { return positions_[slot_of(l)]; }

  std::size_t count_minus_inf() const noexcept {
    return static_cast<std::size_t>(std::count(positions_.begin(), positions_.end(), kMinusInf));
  }

  // Raw mutators used by the pure operations below.
  void set_position(std::size_t slot, double x) {
    if (!is_valid_position(x)) throw std::invalid_argument("ParticleConfig: invalid position");
    positions_.at(slot) = x;
  }
  Label push_back(double x) {
    if (!is_valid_position(x)) throw std::invalid_argument("ParticleConfig: invalid position");
    positions_.push_back(x);
    labels_.push_back(next_label_);
    return next_label_++;
  }
  void erase_slot(std::size_t slot) {
    positions_.erase(positions_.begin() + static_cast<std::ptrdiff_t>(slot));
    labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(slot));
  }

  friend bool operator==(const ParticleConfig&, const ParticleConfig&) = default;

 private:
  std::vector<double> positions_;
  std::vector<Label> labels_;
  Label next_label_ = 1;
};

/// Slot indices sorted by (position, label).
inline std::vector<std::size_t> sorted_slots(const ParticleConfig& c) {
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto pos = c.positions();
  const auto lab = c.labels();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quantile_less(pos[a], lab[a], pos[b], lab[b]);
  });
  return order;
}

/// sigma(i) for i = 1..N: the label holding quantile i (ties broken by label).
inline std::vector<Label> sort_permutation(const ParticleConfig& c) {
  std::vector<Label> sigma;
  sigma.reserve(c.size());
  for (std::size_t s : sorted_slots(c)) sigma.push_back(c.label(s));
  return sigma;
}

/// Order statistics zeta[1..N] (returned zero-based).
inline std::vector<double> order_statistics(const ParticleConfig& c) {
  std::vector<double> v(c.positions().begin(), c.positions().end());
  std::sort(v.begin(), v.end());
  return v;
}

namespace detail {
inline void check_quantile(std::size_t q, std::size_t n, const char* what) {
  if (q < 1 || q > n)
    throw std::out_of_range(std::string(what) + ": quantile " + std::to_string(q) +
                            " outside 1.." + std::to_string(n));
}
}  // namespace detail

/// Puts the particle with quantile i on top of the one with quantile j.
inline ParticleConfig gamma_jump(const ParticleConfig& c, std::size_t i, std::size_t j) {
  detail::check_quantile(i, c.size(), "gamma_jump");
  detail::check_quantile(j, c.size(), "gamma_jump");
  const auto order = sorted_slots(c);
  ParticleConfig out = c;
  out.set_position(order[i - 1], c.position(order[j - 1]));
  return out;
}

inline ParticleConfig append(const ParticleConfig& c, double x) {
  ParticleConfig out = c;
  out.push_back(x);
  return out;
}

/// Removes the label holding quantile j.
inline ParticleConfig trim(const ParticleConfig& c, std::size_t j) {
  if (c.size() < 2) throw std::invalid_argument("trim: configuration must have at least 2 particles");
  detail::check_quantile(j, c.size(), "trim");
  const auto order = sorted_slots(c);
  ParticleConfig out = c;
  out.erase_slot(order[j - 1]);
  return out;
}

/// Mass-transport order: zeta <= zeta' iff N <= N' and zeta[i] <= zeta'[i + N' - N].
inline bool dominates_sorted(std::span<const double> lower, std::span<const double> upper) {
  if (lower.size() > upper.size()) return false;
  const std::size_t shift = upper.size() - lower.size();
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (lower[i] > upper[i + shift]) return false;
  return true;
}

inline bool dominates(const ParticleConfig& lower, const ParticleConfig& upper) {
  const auto a = order_statistics(lower);
  const auto b = order_statistics(upper);
  return dominates_sorted(a, b);
}

/// First zero-based index i with lower[i] > upper[i + shift], or npos if dominated.
/// Returns 0 when the size condition fails.
inline std::size_t first_domination_violation(std::span<const double> lower,
                                              std::span<const double> upper) {
  if (lower.size() > upper.size()) return 0;
  const std::size_t shift = upper.size() - lower.size();
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (lower[i] > upper[i + shift]) return i;
  return static_cast<std::size_t>(-1);
}

/// F(x) = (1/N) #{i : zeta(i) <= x}; -inf particles count for every finite x.
inline double empirical_cdf(const ParticleConfig& c, double x) {
  std::size_t count = 0;
  for (double p : c.positions())
    if (p <= x) ++count;
  return static_cast<double>(count) / static_cast<double>(c.size());
}

}  // namespace bdbbm
