// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bdbbm/core/cloud.hpp"
#include "bdbbm/core/event_log.hpp"
#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/core/rng.hpp"
#include "bdbbm/core/trajectory.hpp"
#include "bdbbm/np/spec.hpp"

namespace bdbbm {

using NPOptions = RunOptions;
using NPResult = RunResult;

/// Uniform k-subsets of {1..n} by partial Fisher-Yates on a persistent permutation.
class SubsetSampler {
 public:
  explicit SubsetSampler(std::size_t n) : perm_(n) { std::iota(perm_.begin(), perm_.end(), std::size_t{1}); }

  /// Sorted uniform k-subset.
  void draw(std::size_t k, Rng& rng, std::vector<std::size_t>& out) {
    out.resize(k);
    const std::size_t n = perm_.size();
    for (std::size_t m = 0; m < k; ++m) {
      const auto r = static_cast<std::size_t>(rng.integer(m, n - 1));
      std::swap(perm_[m], perm_[r]);
      out[m] = perm_[m];
    }
    std::sort(out.begin(), out.end());
  }

  /// Sorted uniform k-subset of {1..n} \ {excluded}, by rejection.
  void draw_excluding(std::size_t k, std::size_t excluded, Rng& rng, std::vector<std::size_t>& out) {
    do {
      draw(k, rng, out);
    } while (std::binary_search(out.begin(), out.end(), excluded));
  }

 private:
  std::vector<std::size_t> perm_;
};

/// Draws a pair (i, j) from the jump law.
class PairSampler {
 public:
  explicit PairSampler(const NPSpec& s) : s_(&s) {
    double acc = 0.0;
    for (const auto& q : s.p) cum_.push_back(acc += q.prob);
  }
  std::pair<std::size_t, std::size_t> draw(Rng& rng) const {
    const double v = rng.uniform() * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), v);
    std::size_t m = std::min(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
    while (s_->p[m].prob == 0.0 && m > 0) --m;
    return {s_->p[m].i, s_->p[m].j};
  }

 private:
  const NPSpec* s_;
  std::vector<double> cum_;
};

/// Quantile `from` takes the position of quantile `to`.
inline void apply_jump(Cloud& c, std::size_t from, std::size_t to) {
  if (from == to) return;
  if (from < 1 || to < 1 || from > c.size() || to > c.size())
    throw std::out_of_range("apply_jump: quantile out of range");
  if (from < to) {
    const double x = c[c.select(to)].x;
    c.set_x(c.select(from, to - 1), x);
  } else {
    const std::size_t s_from = c.select(from);
    const double x = c[c.select(to, from - 1)].x;
    c.set_x(s_from, x);
  }
}

namespace detail {

inline void check_np(const NPSpec& spec, const ParticleConfig& init, const RunOptions& o) {
  spec.validate();
  check_observations(o);
  if (init.size() < spec.k)
    throw std::invalid_argument("simulate_np: need N >= k (N=" + std::to_string(init.size()) +
                                ", k=" + std::to_string(spec.k) + ")");
}

/// Shared event loop: `step(t)` applies one event at time t and is called at rate `rate`.
template <class Step>
RunResult run_np_loop(const ParticleConfig& init, const RunOptions& o, double rate,
                      Rng& rng, Cloud& c, Step&& step) {
  RunResult res;
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
    const double dt = rate > 0.0 ? rng.exponential(rate) : std::numeric_limits<double>::infinity();
    if (t + dt > target) {
      advance(target - t);
      t = target;
      if (oi < o.observation_times.size()) {
        record(res, o, t, c);
        if (o.record_log) res.log.records.emplace_back(SnapshotRec{t});
        ++oi;
      }
      if (oi >= o.observation_times.size() && t >= o.horizon) break;
      continue;
    }
    advance(dt);
    t += dt;
    step(t, res);
    ++res.events;
  }
  return res;
}

}  // namespace detail

/// Tuple construction: events at rate lambda*N, uniform k-set of quantiles, pair drawn from p.
inline NPResult simulate_np(const NPSpec& spec, const ParticleConfig& init, const NPOptions& o) {
  detail::check_np(spec, init, o);
  Rng rng(o.seed, o.replica, 2);
  Cloud c(init);
  SubsetSampler subsets(init.size());
  PairSampler pairs(spec);
  std::vector<std::size_t> ell;
  const double rate = spec.lambda * static_cast<double>(init.size());
  return detail::run_np_loop(init, o, rate, rng, c, [&](double t, RunResult& res) {
    subsets.draw(spec.k, rng, ell);
    const auto [i, j] = pairs.draw(rng);
    apply_jump(c, ell[i - 1], ell[j - 1]);
    if (o.record_log) res.log.records.emplace_back(TupleRec{t, ell, i, j});
  });
}

/// Per-index construction: each index (a quantile slot) rings at rate lambda*k with a (k-1)-set S of
/// other indices; with j_1 < ... < j_k the ordered union, quantile j_a jumps onto j_b only if the
/// ringing index is j_a.
inline NPResult per_index_simulate(const NPSpec& spec, const ParticleConfig& init, const NPOptions& o) {
  detail::check_np(spec, init, o);
  const std::size_t n = init.size();
  Rng rng(o.seed, o.replica, 3);
  Cloud c(init);
  SubsetSampler subsets(n);
  PairSampler pairs(spec);
  std::vector<std::size_t> S, js;
  const double rate = spec.lambda * static_cast<double>(spec.k) * static_cast<double>(n);
  return detail::run_np_loop(init, o, rate, rng, c, [&](double t, RunResult& res) {
    const auto idx = static_cast<std::size_t>(rng.integer(1, n));
    subsets.draw_excluding(spec.k - 1, idx, rng, S);
    const auto [a, b] = pairs.draw(rng);
    js = S;
    js.insert(std::upper_bound(js.begin(), js.end(), idx), idx);
    const bool applied = idx == js[a - 1];
    if (applied) apply_jump(c, js[a - 1], js[b - 1]);
    if (o.record_log) res.log.records.emplace_back(RingRec{t, idx, S, a, b, applied});
  });
}

/// Rebuilds snapshots of a logged tuple or per-index run.
inline std::vector<Snapshot> replay_np(const EventLog& log) {
  Cloud c(log.initial);
  std::vector<Snapshot> out;
  std::vector<std::size_t> js;
  for (const auto& r : log.records) {
    if (const auto* a = std::get_if<AdvanceRec>(&r)) {
      c.apply_increments(a->increments);
    } else if (const auto* e = std::get_if<TupleRec>(&r)) {
      apply_jump(c, e->ell.at(e->i - 1), e->ell.at(e->j - 1));
    } else if (const auto* g = std::get_if<RingRec>(&r)) {
      js = g->S;
      js.insert(std::upper_bound(js.begin(), js.end(), g->index), g->index);
      const bool applied = g->index == js.at(g->a - 1);
      if (applied != g->applied) throw std::runtime_error("replay_np: ring record inconsistent with its marks");
      if (applied) apply_jump(c, js[g->a - 1], js[g->b - 1]);
    } else if (const auto* s = std::get_if<SnapshotRec>(&r)) {
      out.push_back({s->t, c.config()});
    } else {
      throw std::runtime_error("replay_np: unexpected record kind");
    }
  }
  return out;
}

}  // namespace bdbbm
