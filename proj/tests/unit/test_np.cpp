// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "bdbbm/analysis/stats.hpp"
#include "bdbbm/np/clans.hpp"
#include "bdbbm/np/projection.hpp"
#include "bdbbm/np/rates.hpp"
#include "bdbbm/np/simulator.hpp"

using namespace bdbbm;

namespace {

ParticleConfig zeros(std::size_t n) { return ParticleConfig::from_positions(std::vector<double>(n, 0.0)); }

ParticleConfig spread(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) * 0.37 - 1.0;
  return ParticleConfig::from_positions(x);
}

RingRec ring(double t, std::size_t index, std::vector<std::size_t> S, std::size_t a = 1, std::size_t b = 2) {
  return RingRec{t, index, std::move(S), a, b, false};
}

// Positions keyed by label.
std::map<Label, double> by_label(const ParticleConfig& c) {
  std::map<Label, double> m;
  for (std::size_t s = 0; s < c.size(); ++s) m[c.label(s)] = c.position(s);
  return m;
}

}  // namespace

TEST_CASE("event count is Poisson with mean lambda N t", "[np][statistical]") {
  const NPSpec s = NPSpec::top(2, 0.5);
  std::vector<double> counts;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RunOptions o;
    o.horizon = 2.0;
    o.seed = seed;
    counts.push_back(static_cast<double>(simulate_np(s, zeros(100), o).events));
  }
  const double m = stats::mean(counts);
  CHECK(std::abs(m - 100.0) <= 3.0 * std::sqrt(100.0 / 200.0));
  CHECK(per_index_simulate(s, zeros(100), RunOptions{}).events > 0);
}

TEST_CASE("lambda zero gives a pure Brownian cloud", "[np]") {
  const NPSpec s = NPSpec::uniform(3, 0.0);
  RunOptions o;
  o.horizon = 3.0;
  o.observation_times = {3.0};
  o.record_log = true;
  for (auto sim : {simulate_np, per_index_simulate}) {
    const auto r = sim(s, spread(5), o);
    CHECK(r.events == 0);
    CHECK(r.log.collect<TupleRec>().empty());
    CHECK(r.log.collect<RingRec>().empty());
    CHECK(r.snapshots.at(0).config.size() == 5);
  }
}

TEST_CASE("a jump onto a higher quantile raises every order statistic", "[np][property]") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.integer(0, 8);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform() < 0.1 ? kMinusInf : std::floor(rng.normal() * 3.0);
    const auto c = ParticleConfig::from_positions(x);
    const std::size_t i = 1 + rng.integer(0, n - 2);
    const std::size_t j = i + 1 + rng.integer(0, n - i - 1);
    const auto before = order_statistics(c);
    const auto after = order_statistics(gamma_jump(c, i, j));
    REQUIRE(before.size() == after.size());
    for (std::size_t q = 0; q < n; ++q) CHECK(after[q] >= before[q]);
  }
}

TEST_CASE("logged tuples are sorted k-sets with i < j", "[np][property]") {
  const NPSpec s = NPSpec::uniform(4, 1.0);
  RunOptions o;
  o.horizon = 2.0;
  o.record_log = true;
  const auto r = simulate_np(s, spread(9), o);
  const auto ev = r.log.collect<TupleRec>();
  REQUIRE(ev.size() == r.events);
  for (const auto& e : ev) {
    REQUIRE(e.ell.size() == 4);
    CHECK(std::is_sorted(e.ell.begin(), e.ell.end()));
    CHECK(std::adjacent_find(e.ell.begin(), e.ell.end()) == e.ell.end());
    CHECK(e.ell.front() >= 1);
    CHECK(e.ell.back() <= 9);
    CHECK(e.i < e.j);
  }
}

TEST_CASE("each jump moves one label, keeps the label set and never lowers a label", "[np][property]") {
  const NPSpec s = NPSpec::min_to_uniform(3, 1.0);
  RunOptions o;
  o.horizon = 3.0;
  o.record_log = true;
  std::vector<double> x{kMinusInf, kMinusInf, 0.0, 0.5, 1.0, 2.0};
  const auto init = ParticleConfig::from_positions(x);
  const auto r = simulate_np(s, init, o);
  Cloud c(init);
  std::size_t minus_inf = init.count_minus_inf();
  for (const auto& rec : r.log.records) {
    if (const auto* a = std::get_if<AdvanceRec>(&rec)) {
      c.apply_increments(a->increments);
      CHECK(c.config().count_minus_inf() == minus_inf);
    } else if (const auto* e = std::get_if<TupleRec>(&rec)) {
      const auto before = by_label(c.config());
      apply_jump(c, e->ell[e->i - 1], e->ell[e->j - 1]);
      const auto after = by_label(c.config());
      REQUIRE(after.size() == before.size());
      int moved = 0;
      for (const auto& [l, xb] : before) {
        REQUIRE(after.count(l) == 1);
        const double xa = after.at(l);
        if (xa != xb) {
          ++moved;
          CHECK(xa > xb);
        }
      }
      CHECK(moved <= 1);
      const std::size_t now = c.config().count_minus_inf();
      CHECK(now <= minus_inf);
      minus_inf = now;
    }
  }
  CHECK(c.config().size() == 6);
}

TEST_CASE("minus infinity is absorbing without jumps", "[np][edge]") {
  const NPSpec s = NPSpec::top(2, 0.0);
  RunOptions o;
  o.horizon = 5.0;
  o.observation_times = {5.0};
  const auto r = simulate_np(s, ParticleConfig::from_positions({kMinusInf, 0.0, kMinusInf}), o);
  CHECK(r.snapshots.at(0).config.count_minus_inf() == 2);
}

TEST_CASE("N below k is rejected", "[np][edge]") {
  CHECK_THROWS_AS(simulate_np(NPSpec::uniform(4, 1.0), zeros(3), RunOptions{}), std::invalid_argument);
  CHECK_THROWS_AS(per_index_simulate(NPSpec::uniform(4, 1.0), zeros(3), RunOptions{}), std::invalid_argument);
  CHECK_NOTHROW(simulate_np(NPSpec::uniform(4, 1.0), zeros(4), RunOptions{}));
  NPSpec bad = NPSpec::top(3, 1.0);
  bad.p = {{2, 2, 1.0}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.p = {{1, 2, 0.6}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("quantile jump rate example", "[np][rates]") {
  const auto p = exact_point_law(2, 1, 2);
  CHECK(quantile_jump_rate_index(3, 2, Rational(1, 2), p, 1) == Rational(1));
  CHECK(quantile_jump_rate_tuple(3, 2, Rational(1, 2), p, 1) == Rational(1));
  CHECK(quantile_jump_rate_tuple(3, 2, Rational(1, 2), p, 3) == Rational(0));
}

TEST_CASE("tuple and per-index jump rates agree exactly", "[np][rates][property]") {
  for (std::size_t k = 2; k <= 4; ++k)
    for (std::size_t n = k; n <= 8; ++n) {
      std::vector<ExactJumpLaw> laws{exact_uniform_law(k)};
      for (std::size_t i = 1; i < k; ++i)
        for (std::size_t j = i + 1; j <= k; ++j) laws.push_back(exact_point_law(k, i, j));
      for (const auto& p : laws)
        for (std::size_t i = 1; i <= n; ++i)
          CHECK(quantile_jump_rate_tuple(n, k, Rational(3, 7), p, i) ==
                quantile_jump_rate_index(n, k, Rational(3, 7), p, i));
    }
}

TEST_CASE("per-index jump frequencies match the exact rates", "[np][rates][statistical]") {
  const std::size_t n = 6, k = 3;
  const NPSpec s = NPSpec::uniform(k, 1.0);
  const auto p = exact_uniform_law(k);
  // 1e5 rings at total rate lambda k N = 18.
  const double horizon = 1e5 / 18.0;
  Rng rng(2024, 0, 3);
  const auto marks = generate_ring_marks(s, n, horizon, rng);
  std::vector<double> count(n + 1, 0.0);
  std::vector<std::size_t> js;
  for (const auto& m : marks) {
    js = m.S;
    js.insert(std::upper_bound(js.begin(), js.end(), m.index), m.index);
    if (m.index == js[m.a - 1]) count[m.index] += 1.0;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    const double rate = quantile_jump_rate_index(n, k, Rational(1), p, i).convert_to<double>();
    const double expect = rate * horizon;
    INFO("quantile " << i << " count " << count[i] << " expected " << expect);
    CHECK(std::abs(count[i] - expect) <= 3.0 * std::sqrt(std::max(expect, 1.0)));
  }
}

TEST_CASE("tuple and per-index constructions have the same marginal law", "[np][statistical]") {
  struct Case {
    NPSpec s;
    std::size_t n;
  };
  const std::vector<Case> cases{{NPSpec::uniform(3, 1.0), 6}, {NPSpec::top(2, 1.0), 5}};
  for (const auto& cs : cases) {
    const std::size_t reps = 1000;
    std::vector<std::vector<double>> a(cs.n), b(cs.n);
    for (std::size_t r = 0; r < reps; ++r) {
      RunOptions o;
      o.horizon = 1.0;
      o.observation_times = {1.0};
      o.seed = 5;
      o.replica = r;
      const auto x = order_statistics(simulate_np(cs.s, zeros(cs.n), o).snapshots[0].config);
      const auto y = order_statistics(per_index_simulate(cs.s, zeros(cs.n), o).snapshots[0].config);
      for (std::size_t q = 0; q < cs.n; ++q) {
        a[q].push_back(x[q]);
        b[q].push_back(y[q]);
      }
    }
    for (std::size_t q = 0; q < cs.n; ++q) {
      const auto ks = stats::ks_two_sample(a[q], b[q]);
      INFO("k=" << cs.s.k << " quantile " << q + 1 << " D=" << ks.statistic);
      CHECK(ks.p_value > 0.01 / static_cast<double>(cs.n));
    }
  }
}

TEST_CASE("np runs are deterministic and replay from their logs", "[np][property]") {
  const NPSpec s = NPSpec::uniform(3, 1.0);
  RunOptions o;
  o.horizon = 2.0;
  o.observation_times = {0.5, 2.0};
  o.seed = 9;
  o.record_log = true;
  for (auto sim : {simulate_np, per_index_simulate}) {
    const auto a = sim(s, spread(7), o);
    const auto b = sim(s, spread(7), o);
    REQUIRE(a.snapshots.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(a.snapshots[i].config == b.snapshots[i].config);
    std::stringstream ss;
    a.log.write(ss);
    const auto rep = replay_np(EventLog::read(ss));
    REQUIRE(rep.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(rep[i].config == a.snapshots[i].config);
  }
}

TEST_CASE("a tampered ring record is detected on replay", "[np][edge]") {
  EventLog log;
  log.initial = zeros(3);
  log.records.emplace_back(RingRec{0.1, 2, {1}, 1, 2, true});
  CHECK_THROWS_AS(replay_np(log), std::runtime_error);
}

TEST_CASE("forward clan examples", "[np][clans]") {
  CHECK(forward_clan({}, 4, 1.0) == ClanState{4});
  const std::vector<RingRec> one{ring(0.5, 2, {1})};
  CHECK(forward_clan(one, 2, 1.0) == ClanState{1, 2});
  CHECK(forward_clan(one, 3, 1.0) == ClanState{3});
  CHECK(forward_clan(one, 1, 1.0) == ClanState{1});
  CHECK(forward_clan(one, 2, 0.4) == ClanState{2});
  // Order matters: 3 joins through 2 only after 2 has joined.
  const std::vector<RingRec> chain{ring(0.2, 2, {3}), ring(0.4, 1, {2})};
  CHECK(forward_clan(chain, 1, 1.0) == ClanState{1, 2});
  const std::vector<RingRec> chain2{ring(0.2, 1, {2}), ring(0.4, 2, {3})};
  CHECK(forward_clan(chain2, 1, 1.0) == ClanState{1, 2, 3});
}

TEST_CASE("ancestor set runs the marks backwards", "[np][clans]") {
  const std::vector<RingRec> chain{ring(0.2, 2, {3}), ring(0.4, 1, {2})};
  CHECK(ancestor_set(chain, 1, 1.0) == ClanState{1, 2, 3});
  CHECK(ancestor_set(chain, 1, 0.3) == ClanState{1});
  CHECK(ancestor_set(chain, 2, 0.3) == ClanState{2, 3});
  CHECK(ancestor_set({}, 5, 1.0) == ClanState{5});
  const std::vector<RingRec> bad{ring(0.4, 1, {2}), ring(0.2, 2, {3})};
  CHECK_THROWS_AS(ancestor_set(bad, 1, 1.0), std::invalid_argument);
}

TEST_CASE("clans grow monotonically in t", "[np][clans][property]") {
  const NPSpec s = NPSpec::uniform(3, 0.5);
  Rng rng(3);
  const auto marks = generate_ring_marks(s, 50, 2.0, rng);
  for (std::size_t root : {1u, 17u, 50u}) {
    ClanState prev{root};
    for (double t = 0.1; t <= 2.0; t += 0.1) {
      const auto cur = forward_clan(marks, root, t);
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
  CHECK(clans_intersect({1, 3, 5}, {2, 5}));
  CHECK_FALSE(clans_intersect({1, 3}, {2, 4}));
}

TEST_CASE("ancestor set and forward clan sizes share a law", "[np][clans][statistical]") {
  const NPSpec s = NPSpec::uniform(3, 0.5);
  std::vector<double> fwd, anc;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    Rng rng(17, r, 5);
    const auto marks = generate_ring_marks(s, 60, 1.0, rng);
    fwd.push_back(static_cast<double>(forward_clan(marks, 7, 1.0).size()));
    anc.push_back(static_cast<double>(ancestor_set(marks, 7, 1.0).size()));
  }
  CHECK(stats::ks_two_sample(fwd, anc).p_value > 0.01);
}

TEST_CASE("projection drops the inactive lowest quantiles", "[np]") {
  CHECK(lowest_active_offset(NPSpec::extremes(3, 1.0)) == 0);
  CHECK(lowest_active_offset(NPSpec::top(3, 1.0)) == 1);
  CHECK(lowest_active_offset(NPSpec::top(5, 1.0)) == 3);
  const auto y = ParticleConfig::from_positions({3.0, 0.0, 1.0});
  CHECK(order_statistics(project_Z(y, NPSpec::extremes(3, 1.0))) == std::vector<double>{0.0, 1.0, 3.0});
  CHECK(order_statistics(project_Z(y, NPSpec::top(3, 1.0))) == std::vector<double>{1.0, 3.0});
  CHECK(seen_from_leftmost(ParticleConfig::from_positions({1.0, 3.0, 4.5})) == std::vector<double>{2.0, 3.5});
  CHECK_THROWS_AS(project_Z(ParticleConfig::from_positions({1.0}), NPSpec::top(3, 1.0)), std::invalid_argument);
}
