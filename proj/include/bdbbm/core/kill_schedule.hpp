// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "bdbbm/core/kill_measure.hpp"

namespace bdbbm {

/// Sequence D_1, D_2, ... of kill measures. Either constant, or an explicit list
/// whose last entry is repeated for larger indices.
class KillSchedule {
 public:
  KillSchedule() : list_{KillMeasure::minus_inf()} {}
  explicit KillSchedule(KillMeasure d) : list_{std::move(d)} {}
  explicit KillSchedule(std::vector<KillMeasure> list) : list_(std::move(list)) {
    if (list_.empty()) throw std::invalid_argument("KillSchedule: empty list");
  }

  /// D_j for j >= 1.
  const KillMeasure& at(std::size_t j) const {
    if (j < 1) throw std::out_of_range("KillSchedule: index must be >= 1");
    return list_[std::min(j, list_.size()) - 1];
  }

  bool is_constant() const noexcept { return list_.size() == 1; }
  std::size_t explicit_size() const noexcept { return list_.size(); }

 private:
  std::vector<KillMeasure> list_;
};

}  // namespace bdbbm
