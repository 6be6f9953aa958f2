// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdbbm/core/birth_function.hpp"
#include "bdbbm/core/cloud.hpp"
#include "bdbbm/core/event_log.hpp"
#include "bdbbm/core/kill_schedule.hpp"
#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/core/rng.hpp"
#include "bdbbm/core/trajectory.hpp"

namespace bdbbm {

/// Rank-dependent branching with kill schedule D_1, D_2, ...; a constant schedule gives the (b,D) model.
struct BDSpec {
  BirthFunction b;
  KillSchedule d;

  static BDSpec bbm() { return {BirthFunction::constant(1.0), KillSchedule(KillMeasure::minus_inf())}; }
  static BDSpec nbbm() {
    return {BirthFunction::indicator_positive(), KillSchedule(KillMeasure::point_mass(0.0))};
  }
};

/// R(n) = sum_j b((j-1)/(n-1)); R(1) = b(1).
inline double total_branch_rate(const BirthFunction& b, std::size_t n) {
  if (n == 0) throw std::invalid_argument("total_branch_rate: empty population");
  if (n == 1) return b(1.0);
  double r = 0.0;
  const double d = static_cast<double>(n - 1);
  for (std::size_t j = 1; j <= n; ++j) r += b(static_cast<double>(j - 1) / d);
  return r;
}

/// Cumulative per-quantile rates for a population of size n.
class RateTable {
 public:
  const std::vector<double>& get(const BirthFunction& b, std::size_t n) {
    if (n == n_) return cum_;
    n_ = n;
    cum_.assign(n, 0.0);
    if (n == 1) {
      cum_[0] = b(1.0);
      return cum_;
    }
    double acc = 0.0;
    const double d = static_cast<double>(n - 1);
    for (std::size_t j = 1; j <= n; ++j) {
      acc += b(static_cast<double>(j - 1) / d);
      cum_[j - 1] = acc;
    }
    return cum_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> cum_;
};

struct BranchEvent {
  double dt;      ///< +inf when the total rate vanishes
  std::size_t j;  ///< 0 when no event
};

/// Exponential holding time and branching quantile drawn from the rate profile.
inline BranchEvent next_branch_event(const std::vector<double>& cum, Rng& rng) {
  const double total = cum.empty() ? 0.0 : cum.back();
  if (!(total > 0.0)) return {std::numeric_limits<double>::infinity(), 0};
  const double dt = rng.exponential(total);
  const double v = rng.uniform() * total;
  auto it = std::upper_bound(cum.begin(), cum.end(), v);
  // cum[j-2] <= v < cum[j-1], so the chosen quantile always has positive rate.
  const std::size_t j = std::min(static_cast<std::size_t>(it - cum.begin()) + 1, cum.size());
  return {dt, j};
}

inline BranchEvent next_branch_event(const BirthFunction& b, std::size_t n, Rng& rng) {
  RateTable t;
  return next_branch_event(t.get(b, n), rng);
}

/// Kill quantile (0 = none) for a branch of quantile j in a population of size n.
inline std::size_t kill_choice(const KillSchedule& d, std::size_t j, double u) {
  if (j < 2) return 0;
  const auto i = sample_kill_quantile(d.at(j - 1), j, u);
  return i ? *i : 0;
}

/// Branch of quantile j, then removal of pre-branch quantile `killed` (0 = none).
inline void apply_branch_killed(Cloud& c, std::size_t j, std::size_t killed) {
  if (j < 1 || j > c.size()) throw std::out_of_range("apply_branch: quantile out of range");
  if (killed >= j) throw std::out_of_range("apply_branch: victim must lie below the parent");
  const std::size_t parent = c.select(j);
  c.push(c[parent].x);
  if (killed > 0) c.erase(c.select(killed, j - 1));
}

/// Pure form on configurations: append a child at quantile j's position, then trim the victim.
inline ParticleConfig apply_branch(const ParticleConfig& c, const KillSchedule& d, std::size_t j, double u) {
  detail::check_quantile(j, c.size(), "apply_branch");
  const auto order = sorted_slots(c);
  const std::size_t killed = kill_choice(d, j, u);
  ParticleConfig out = append(c, c.position(order[j - 1]));
  if (killed > 0) out = trim(out, killed);
  return out;
}

using BDOptions = RunOptions;
using BDResult = RunResult;

namespace detail {

inline bool never_kills(const KillSchedule& d) {
  return d.is_constant() && d.at(1).mass_at_minus_inf() == 1.0;
}

/// Constant b, no kills: branching particle is uniform, positions updated lazily.
inline BDResult simulate_bbm_lazy(double rate_per_particle, const ParticleConfig& init, const RunOptions& o) {
  Rng rng(o.seed, o.replica, 1);
  BDResult res;
  std::vector<double> x(init.positions().begin(), init.positions().end());
  std::vector<Label> lab(init.labels().begin(), init.labels().end());
  std::vector<double> last(x.size(), 0.0);
  Label next = init.next_label();
  double t = 0.0;
  std::size_t oi = 0;
  auto bring = [&](std::size_t s, double now) {
    if (!is_minus_inf(x[s]) && now > last[s]) x[s] += rng.normal(std::sqrt(now - last[s]));
    last[s] = now;
  };
  for (;;) {
    const double target = oi < o.observation_times.size() ? o.observation_times[oi] : o.horizon;
    const double total = rate_per_particle * static_cast<double>(x.size());
    const double dt = total > 0.0 ? rng.exponential(total) : std::numeric_limits<double>::infinity();
    if (t + dt > target) {
      t = target;
      if (oi < o.observation_times.size()) {
        for (std::size_t s = 0; s < x.size(); ++s) bring(s, t);
        Cloud c(ParticleConfig(x, lab));
        record(res, o, t, c);
        ++oi;
      }
      if (oi >= o.observation_times.size() && t >= o.horizon) break;
      continue;
    }
    t += dt;
    const std::size_t s = static_cast<std::size_t>(rng.integer(0, x.size() - 1));
    bring(s, t);
    x.push_back(x[s]);
    lab.push_back(next++);
    last.push_back(t);
    ++res.events;
    if (x.size() > o.population_cap)
      throw std::overflow_error("simulate_bd: population exceeded cap " + std::to_string(o.population_cap));
  }
  return res;
}

}  // namespace detail

/// Exact event-driven simulation of the rank-dependent branching model.
inline BDResult simulate_bd(const BDSpec& spec, const ParticleConfig& init, const RunOptions& o) {
  detail::check_observations(o);
  if (init.size() > o.population_cap) throw std::overflow_error("simulate_bd: initial population exceeds cap");
  if (o.allow_fast_path && !o.record_log && spec.b.is_constant() && detail::never_kills(spec.d))
    return detail::simulate_bbm_lazy(spec.b(1.0), init, o);

  Rng rng(o.seed, o.replica, 0);
  BDResult res;
  Cloud c(init);
  RateTable rates;
  if (o.record_log) res.log.initial = init;
  double t = 0.0;
  std::size_t oi = 0;
  AdvanceRec adv;
  auto advance = [&](double dt) {
    c.advance(dt, rng, o.record_log ? &adv.increments : nullptr);
    if (o.record_log && dt > 0.0) {
      adv.dt = dt;
      res.log.records.emplace_back(adv);
    }
  };
  for (;;) {
    const double target = oi < o.observation_times.size() ? o.observation_times[oi] : o.horizon;
    const BranchEvent ev = next_branch_event(rates.get(spec.b, c.size()), rng);
    if (t + ev.dt > target) {
      advance(target - t);
      t = target;
      if (oi < o.observation_times.size()) {
        detail::record(res, o, t, c);
        if (o.record_log) res.log.records.emplace_back(SnapshotRec{t});
        ++oi;
      }
      if (oi >= o.observation_times.size() && t >= o.horizon) break;
      continue;
    }
    advance(ev.dt);
    t += ev.dt;
    const double u = rng.uniform_open0();
    const std::size_t killed = kill_choice(spec.d, ev.j, u);
    apply_branch_killed(c, ev.j, killed);
    ++res.events;
    if (o.record_log) res.log.records.emplace_back(BranchRec{t, ev.j, killed, u});
    if (c.size() > o.population_cap)
      throw std::overflow_error("simulate_bd: population exceeded cap " + std::to_string(o.population_cap));
  }
  return res;
}

/// Rebuilds the snapshots of a logged run from the log alone.
inline std::vector<Snapshot> replay_bd(const EventLog& log) {
  Cloud c(log.initial);
  std::vector<Snapshot> out;
  for (const auto& r : log.records) {
    if (const auto* a = std::get_if<AdvanceRec>(&r)) {
      c.apply_increments(a->increments);
    } else if (const auto* b = std::get_if<BranchRec>(&r)) {
      apply_branch_killed(c, b->j, b->killed);
    } else if (const auto* s = std::get_if<SnapshotRec>(&r)) {
      out.push_back({s->t, c.config()});
    } else {
      throw std::runtime_error("replay_bd: unexpected record kind");
    }
  }
  return out;
}

/// (t, max finite position) per snapshot; snapshots with no finite particle are skipped.
inline std::vector<std::pair<double, double>> rightmost_trajectory(const std::vector<SeriesPoint>& s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : s)
    if (!is_minus_inf(p.max)) out.emplace_back(p.t, p.max);
  return out;
}

inline std::vector<std::pair<double, double>> rightmost_trajectory(const std::vector<Snapshot>& s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : s) {
    const auto pos = p.config.positions();
    const double m = *std::max_element(pos.begin(), pos.end());
    if (!is_minus_inf(m)) out.emplace_back(p.t, m);
  }
  return out;
}

}  // namespace bdbbm
