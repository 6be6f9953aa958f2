// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <catch2/catch_amalgamated.hpp>

#include "bdbbm/analysis/stats.hpp"
#include "bdbbm/analysis/velocity.hpp"
#include "bdbbm/bd/simulator.hpp"

using namespace bdbbm;
using Catch::Approx;

namespace {

ParticleConfig zeros(std::size_t n) { return ParticleConfig::from_positions(std::vector<double>(n, 0.0)); }

BDSpec spec(BirthFunction b, KillMeasure d) { return {std::move(b), KillSchedule(std::move(d))}; }

// Pearson chi-square p-value of observed counts against expected probabilities.
double chi_square_p(const std::vector<double>& counts, const std::vector<double>& probs) {
  double n = 0.0;
  for (double c : counts) n += c;
  double x2 = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] == 0.0) {
      REQUIRE(counts[i] == 0.0);
      continue;
    }
    const double e = n * probs[i];
    x2 += (counts[i] - e) * (counts[i] - e) / e;
    ++cells;
  }
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), x2));
}

double ks_normal(std::vector<double> z) {
  std::sort(z.begin(), z.end());
  const boost::math::normal_distribution<> nd;
  double d = 0.0;
  const double n = static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = boost::math::cdf(nd, z[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return stats::kolmogorov_q(std::sqrt(n) * d);
}

std::vector<double> rate_profile(const BirthFunction& b, std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t j = 1; j <= n; ++j) p[j - 1] = b(static_cast<double>(j - 1) / static_cast<double>(n - 1));
  const double r = total_branch_rate(b, n);
  for (auto& v : p) v /= r;
  return p;
}

}  // namespace

TEST_CASE("total branch rate", "[bd]") {
  CHECK(total_branch_rate(BirthFunction::constant(1.0), 100) == 100.0);
  CHECK(total_branch_rate(BirthFunction::identity(), 3) == Approx(1.5));
  CHECK(total_branch_rate(BirthFunction::indicator_positive(), 4) == 3.0);
  // A lone particle branches at rate b(1).
  CHECK(total_branch_rate(BirthFunction::identity(), 1) == 1.0);
  CHECK(total_branch_rate(BirthFunction::indicator_positive(), 1) == 1.0);
}

TEST_CASE("branch quantile law", "[bd][statistical]") {
  Rng rng(42);
  const int M = 60000;
  std::vector<double> c3(3, 0.0);
  for (int m = 0; m < M; ++m) c3[next_branch_event(BirthFunction::constant(1.0), 3, rng).j - 1] += 1;
  CHECK(chi_square_p(c3, {1.0 / 3, 1.0 / 3, 1.0 / 3}) > 1e-3);
  std::vector<double> cx(3, 0.0);
  double dt_sum = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto ev = next_branch_event(BirthFunction::identity(), 3, rng);
    cx[ev.j - 1] += 1;
    dt_sum += ev.dt;
  }
  CHECK(cx[0] == 0.0);
  CHECK(chi_square_p(cx, {0.0, 1.0 / 3, 2.0 / 3}) > 1e-3);
  // Mean holding time 1/R(3) = 2/3.
  CHECK(dt_sum / M == Approx(2.0 / 3.0).margin(4.0 * (2.0 / 3.0) / std::sqrt(M)));
  const auto none = next_branch_event(BirthFunction::constant(0.0), 5, rng);
  CHECK(std::isinf(none.dt));
  CHECK(none.j == 0);
}

TEST_CASE("branching quantile frequencies in simulated runs match the rate profile", "[bd][statistical]") {
  // Kill laws without mass at -inf keep n = 10 fixed, so every logged branch has the same profile.
  for (const auto& b : {BirthFunction::identity(), BirthFunction::indicator_positive()}) {
    RunOptions o;
    o.horizon = 400.0;
    o.record_log = true;
    o.seed = 9;
    const auto res = simulate_bd(spec(b, KillMeasure::uniform()), zeros(10), o);
    std::vector<double> counts(10, 0.0);
    for (const auto& r : res.log.collect<BranchRec>()) counts[r.j - 1] += 1;
    const auto p = rate_profile(b, 10);
    const double n = static_cast<double>(res.events);
    REQUIRE(n > 1000);
    for (std::size_t j = 0; j < 10; ++j)
      CHECK(std::abs(counts[j] - n * p[j]) <= 3.5 * std::sqrt(n * p[j] * (1 - p[j])) + 1e-9);
    CHECK(chi_square_p(counts, p) > 1e-3);
  }
}

TEST_CASE("apply branch", "[bd]") {
  const auto z = ParticleConfig::from_positions({0.0, 1.0, 2.0, 3.0, 4.0});
  const KillSchedule nbbm(KillMeasure::point_mass(0.0));
  Rng rng(1);
  auto c = z;
  for (int step = 0; step < 50; ++step) {
    const std::size_t j = 2 + rng.integer(0, c.size() - 2);
    const auto lowest = sort_permutation(c).front();
    const auto next = apply_branch(c, nbbm, j, rng.uniform_open0());
    REQUIRE(next.size() == c.size());
    const auto labels = next.labels();
    REQUIRE(std::find(labels.begin(), labels.end(), lowest) == labels.end());
    c = next;
  }
  const KillSchedule bbm(KillMeasure::minus_inf());
  CHECK(apply_branch(z, bbm, 3, 0.4).size() == 6);
  for (const auto& d : {KillMeasure::point_mass(0.0), KillMeasure::uniform(), KillMeasure::mixed_uniform(0.5)})
    CHECK(apply_branch(z, KillSchedule(d), 1, 0.9).size() == 6);
  // The child takes the parent's position and the parent's quantile frame excludes it as a victim.
  const auto kid = apply_branch(z, KillSchedule(KillMeasure::point_mass(0.0)), 4, 0.5);
  const auto x = order_statistics(kid);
  CHECK(x == std::vector<double>{1.0, 2.0, 3.0, 3.0, 4.0});
}

TEST_CASE("BBM population mean matches the Yule expectation", "[bd][statistical]") {
  for (bool fast : {true, false}) {
    std::vector<double> pops;
    for (std::uint64_t r = 0; r < 200; ++r) {
      RunOptions o;
      o.horizon = 1.0;
      o.observation_times = {1.0};
      o.seed = 5;
      o.replica = r;
      o.allow_fast_path = fast;
      o.keep_snapshots = false;
      pops.push_back(static_cast<double>(simulate_bd(BDSpec::bbm(), zeros(100), o).series.back().population));
    }
    CHECK(std::abs(stats::mean(pops) - 100.0 * std::numbers::e) < 3.0 * stats::se(pops));
  }
}

TEST_CASE("population is conserved without mass at minus infinity when b(0) = 0", "[bd]") {
  for (const auto& b : {BirthFunction::indicator_positive(), BirthFunction::identity()})
    for (const auto& d : {KillMeasure::point_mass(0.0), KillMeasure::uniform(), KillMeasure::dk(3)}) {
      RunOptions o;
      o.horizon = 5.0;
      o.observation_times = {0.5, 1.0, 2.5, 5.0};
      o.seed = 3;
      const auto res = simulate_bd(spec(b, d), zeros(7), o);
      for (const auto& p : res.series) CHECK(p.population == 7);
      CHECK(res.events > 0);
    }
}

TEST_CASE("a branch of the lowest quantile never kills", "[bd]") {
  // With b(0) > 0 the lowest particle can branch, and it has no one below it to kill.
  RunOptions o;
  o.horizon = 5.0;
  o.observation_times = {5.0};
  o.record_log = true;
  o.seed = 3;
  const auto res = simulate_bd(spec(BirthFunction::constant(1.0), KillMeasure::point_mass(0.0)), zeros(7), o);
  std::size_t grows = 0;
  for (const auto& b : res.log.collect<BranchRec>()) {
    if (b.j == 1) {
      REQUIRE(b.killed == 0);
      ++grows;
    } else {
      REQUIRE(b.killed == 1);
    }
  }
  CHECK(grows > 0);
  CHECK(res.series.back().population == 7 + grows);
}

TEST_CASE("population changes by zero or one at each logged event", "[bd][property]") {
  RunOptions o;
  o.horizon = 3.0;
  o.record_log = true;
  o.seed = 8;
  const auto res = simulate_bd(spec(BirthFunction::identity(), KillMeasure::mixed_uniform(0.5)), zeros(5), o);
  std::size_t n = 5;
  for (const auto& b : res.log.collect<BranchRec>()) {
    REQUIRE(b.j <= n);
    REQUIRE(b.killed < b.j);
    if (b.killed == 0) ++n;
  }
  CHECK(n >= 5);
}

TEST_CASE("pure Brownian cloud when b is zero", "[bd]") {
  RunOptions o;
  o.horizon = 2.0;
  o.observation_times = {1.0, 2.0};
  o.record_log = true;
  o.seed = 4;
  const auto init = ParticleConfig::from_positions({0.0, 1.0, kMinusInf, -2.0});
  const auto res = simulate_bd(spec(BirthFunction::constant(0.0), KillMeasure::uniform()), init, o);
  CHECK(res.events == 0);
  std::vector<double> x{0.0, 1.0, -2.0};
  std::size_t snap = 0;
  for (const auto& r : res.log.records) {
    if (const auto* a = std::get_if<AdvanceRec>(&r)) {
      REQUIRE(a->increments.size() == 3);
      for (std::size_t i = 0; i < 3; ++i) x[i] += a->increments[i];
    } else if (std::holds_alternative<SnapshotRec>(r)) {
      const auto& c = res.snapshots.at(snap++).config;
      CHECK(c.position_of(1) == x[0]);
      CHECK(c.position_of(2) == x[1]);
      CHECK(is_minus_inf(c.position_of(3)));
      CHECK(c.position_of(4) == x[2]);
    }
  }
  CHECK(snap == 2);
}

TEST_CASE("logged increments are standard Gaussian after scaling", "[bd][statistical]") {
  RunOptions o;
  o.horizon = 100.0;
  o.record_log = true;
  o.seed = 12;
  const auto res = simulate_bd(BDSpec::nbbm(), zeros(6), o);
  std::vector<double> z;
  for (const auto& a : res.log.collect<AdvanceRec>()) {
    REQUIRE(a.increments.size() == 6);
    for (double v : a.increments) z.push_back(v / std::sqrt(a.dt));
  }
  REQUIRE(z.size() > 1000);
  CHECK(ks_normal(z) > 1e-3);
}

TEST_CASE("same seed gives bit-identical runs and the log replays them", "[bd][property]") {
  const BDSpec s = spec(BirthFunction::identity(), KillMeasure::mixed_uniform(0.3));
  RunOptions o;
  o.horizon = 2.0;
  o.observation_times = {0.5, 1.0, 2.0};
  o.seed = 77;
  o.record_log = true;
  const auto a = simulate_bd(s, zeros(4), o);
  const auto b = simulate_bd(s, zeros(4), o);
  REQUIRE(a.snapshots.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.snapshots[i].config == b.snapshots[i].config);
  const auto rep = replay_bd(a.log);
  REQUIRE(rep.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rep[i].config == a.snapshots[i].config);
  // Text round trip of the log is exact.
  std::stringstream ss;
  a.log.write(ss);
  const auto back = EventLog::read(ss);
  const auto rep2 = replay_bd(back);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rep2[i].config == a.snapshots[i].config);
  // Logging does not change the trajectory.
  RunOptions q = o;
  q.record_log = false;
  q.allow_fast_path = false;
  const auto c = simulate_bd(s, zeros(4), q);
  for (std::size_t i = 0; i < 3; ++i) CHECK(c.snapshots[i].config == a.snapshots[i].config);
}

TEST_CASE("population cap raises an overflow error", "[bd][edge]") {
  RunOptions o;
  o.horizon = 20.0;
  o.population_cap = 500;
  CHECK_THROWS_AS(simulate_bd(BDSpec::bbm(), zeros(1), o), std::overflow_error);
  o.allow_fast_path = false;
  CHECK_THROWS_AS(simulate_bd(BDSpec::bbm(), zeros(1), o), std::overflow_error);
}

TEST_CASE("invalid observation schedules are rejected", "[bd][edge]") {
  RunOptions o;
  o.horizon = 1.0;
  o.observation_times = {0.5, 0.2};
  CHECK_THROWS(simulate_bd(BDSpec::bbm(), zeros(1), o));
  o.observation_times = {2.0};
  CHECK_THROWS(simulate_bd(BDSpec::bbm(), zeros(1), o));
  o.horizon = -1.0;
  o.observation_times = {};
  CHECK_THROWS(simulate_bd(BDSpec::bbm(), zeros(1), o));
}

TEST_CASE("rightmost trajectory", "[bd]") {
  RunOptions o;
  o.horizon = 3.0;
  o.observation_times = {1.0, 2.0, 3.0};
  o.seed = 2;
  o.record_log = true;
  const auto res = simulate_bd(spec(BirthFunction::constant(0.0), KillMeasure::uniform()), zeros(1), o);
  const auto tr = rightmost_trajectory(res.series);
  REQUIRE(tr.size() == 3);
  double x = 0.0;
  for (const auto& a : res.log.collect<AdvanceRec>()) x += a.increments.at(0);
  CHECK(tr.back().second == x);
  for (std::size_t s = 0; s < 3; ++s) CHECK(tr[s].second == res.snapshots[s].config.position(0));

  // Every particle at -inf: the point is reported as missing.
  std::vector<SeriesPoint> pts{{1.0, kMinusInf, 3, 0.0}, {2.0, 0.5, 3, 0.5}};
  CHECK(rightmost_trajectory(pts).size() == 1);

  // A larger initial configuration never lowers the maximum at time zero.
  const auto small = ParticleConfig::from_positions({0.0, 1.0});
  const auto big = append(small, 0.5);
  CHECK(order_statistics(big).back() >= order_statistics(small).back());
}

TEST_CASE("N-BBM front moves with speed below sqrt 2", "[bd][statistical]") {
  RunOptions o;
  o.horizon = 20.0;
  for (int i = 1; i <= 40; ++i) o.observation_times.push_back(0.5 * i);
  o.seed = 21;
  o.keep_snapshots = false;
  const auto res = simulate_bd(BDSpec::nbbm(), zeros(50), o);
  const auto est = estimate_velocity(rightmost_trajectory(res.series), 0.25);
  CHECK(est.slope > 0.0);
  CHECK(est.slope < std::numbers::sqrt2);
}
