// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <catch2/catch_amalgamated.hpp>

#include "bdbbm/analysis/chaos.hpp"
#include "bdbbm/analysis/clan_stats.hpp"
#include "bdbbm/analysis/distance.hpp"
#include "bdbbm/analysis/spacing.hpp"
#include "bdbbm/analysis/stats.hpp"
#include "bdbbm/analysis/study.hpp"
#include "bdbbm/analysis/velocity.hpp"
#include "bdbbm/bd/simulator.hpp"
#include "bdbbm/pde/source.hpp"

using namespace bdbbm;
using Catch::Approx;

namespace {

double phi(double x) { return boost::math::cdf(boost::math::normal(), x); }

ParticleConfig random_config(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform() < 0.1 ? kMinusInf : std::round(rng.normal() * 4.0) / 2.0;
  return ParticleConfig::from_positions(x);
}

std::vector<std::pair<double, double>> linear_series(double a, double b, int n, double dt = 0.5) {
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i <= n; ++i) s.emplace_back(i * dt, a * i * dt + b);
  return s;
}

}  // namespace

TEST_CASE("basic statistics", "[analysis][stats]") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(v) == 2.5);
  CHECK(stats::sd(v) == Approx(std::sqrt(5.0 / 3.0)));
  CHECK(stats::median(v) == 2.5);
  CHECK(stats::median({3.0, 1.0, 2.0}) == 2.0);
  const auto f = stats::ols({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(f.slope == Approx(2.0));
  CHECK(f.intercept == Approx(1.0));
  CHECK(f.slope_se == Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(stats::mean({}), std::invalid_argument);
  CHECK(stats::ks_two_sample(v, v).statistic == 0.0);
  CHECK(stats::ks_two_sample(v, v).p_value == 1.0);
  std::vector<double> a, b;
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal() + 0.5);
  }
  CHECK(stats::ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("sup distance examples", "[analysis][distance]") {
  Rng rng(2);
  const auto c = random_config(rng, 30);
  CHECK(sup_distance(c, c) == 0.0);
  CHECK(sup_distance(c, [&](double x) { return empirical_cdf(c, x); }) == 0.0);
  const auto one = ParticleConfig::from_positions({0.0});
  CHECK(sup_distance(one, [](double x) { return x < 0.0 ? 0.0 : 1.0; }) == 0.0);
  CHECK(sup_distance(one, [](double x) { return x < 1.0 ? 0.0 : 1.0; }) == 1.0);
  // Two points against Uniform[0, 1].
  const auto two = ParticleConfig::from_positions({0.25, 0.75});
  CHECK(sup_distance(two, [](double x) { return std::clamp(x, 0.0, 1.0); }) == Approx(0.25));
  // Mass at minus infinity counts from the start.
  const auto inf = ParticleConfig::from_positions({kMinusInf, 0.0});
  CHECK(sup_distance(inf, [](double x) { return x < 0.0 ? 0.0 : 1.0; }) == Approx(0.5));
}

TEST_CASE("sup distance is a metric on empirical CDFs", "[analysis][distance][property]") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_config(rng, 1 + rng.integer(0, 12));
    const auto b = random_config(rng, 1 + rng.integer(0, 12));
    const auto c = random_config(rng, 1 + rng.integer(0, 12));
    CHECK(sup_distance(a, b) == Approx(sup_distance(b, a)).margin(1e-12));
    CHECK(sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-12);
    CHECK(sup_distance(a, b) >= 0.0);
    // The two-config form agrees with the step-reference form.
    CHECK(sup_distance(a, b) == Approx(sup_distance(a, [&](double x) { return empirical_cdf(b, x); })).margin(1e-12));
  }
}

TEST_CASE("sup distance against a field slice uses the interpolant", "[analysis][distance]") {
  ScalarField f;
  f.x0 = -10.0;
  f.dx = 0.01;
  f.times = {1.0};
  f.values.emplace_back();
  for (int i = 0; i <= 2000; ++i) f.values[0].push_back(phi(f.x(static_cast<std::size_t>(i))));
  Rng rng(4);
  std::vector<double> x(200);
  for (auto& v : x) v = rng.normal();
  const auto c = ParticleConfig::from_positions(x);
  CHECK(sup_distance(c, f, 0) == Approx(sup_distance(c, phi)).margin(2e-5));
}

TEST_CASE("sup distance of i.i.d. samples decays like N^-1/2", "[analysis][distance][statistical]") {
  std::vector<double> scaled;
  for (std::size_t n : {100u, 400u, 1600u}) {
    std::vector<double> d;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed, n);
      std::vector<double> x(n);
      for (auto& v : x) v = rng.uniform();
      d.push_back(sup_distance(ParticleConfig::from_positions(x), [](double u) { return std::clamp(u, 0.0, 1.0); }));
    }
    scaled.push_back(stats::median(d) * std::sqrt(static_cast<double>(n)));
  }
  for (double s : scaled) {
    CHECK(s >= scaled.front() / 2.0);
    CHECK(s <= scaled.front() * 2.0);
  }
}

TEST_CASE("quantile initialization is within 1/(2N) of its target", "[analysis][distance]") {
  for (std::size_t n : {1u, 7u, 100u, 5000u}) {
    const auto c = quantile_init([](double p) { return p; }, n);
    CHECK(sup_distance(c, [](double x) { return std::clamp(x, 0.0, 1.0); }) ==
          Approx(0.5 / static_cast<double>(n)).epsilon(1e-9));
  }
}

TEST_CASE("velocity estimates", "[analysis][velocity]") {
  const auto lin = estimate_velocity(linear_series(1.3, 0.4, 40));
  CHECK(lin.slope == Approx(1.3).epsilon(1e-12));
  CHECK(lin.se == Approx(0.0).margin(1e-12));
  CHECK(lin.t_start == Approx(5.0));
  CHECK(estimate_velocity(linear_series(0.0, 2.0, 40)).slope == Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(estimate_velocity(linear_series(1.0, 0.0, 8)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_velocity(linear_series(1.0, 0.0, 40), 1.0), std::invalid_argument);
  auto bad = linear_series(1.0, 0.0, 40);
  bad.back().second = kMinusInf;
  CHECK_THROWS_AS(estimate_velocity(bad), std::domain_error);
  const auto agg = aggregate_velocity({lin, estimate_velocity(linear_series(1.5, 0.0, 40))});
  CHECK(agg.slope == Approx(1.4));
  CHECK(agg.se == Approx(0.1));
  CHECK(agg.replicas == 2);
}

TEST_CASE("velocity estimates are shift and drift equivariant", "[analysis][velocity][property]") {
  Rng rng(6);
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i <= 60; ++i) s.emplace_back(0.25 * i, rng.normal() + 0.9 * 0.25 * i);
  const double base = estimate_velocity(s).slope;
  for (double c : {-1.0, 0.5, 3.0})
    for (double d : {-7.0, 0.0, 2.5}) {
      auto s2 = s;
      for (auto& [t, y] : s2) y += c * t + d;
      CHECK(estimate_velocity(s2).slope == Approx(base + c).margin(1e-10));
    }
}

TEST_CASE("BBM rightmost particle speed over a finite window", "[analysis][velocity][statistical]") {
  RunOptions o;
  o.horizon = 10.0;
  for (int i = 1; i <= 100; ++i) o.observation_times.push_back(0.1 * i);
  o.keep_snapshots = false;
  std::vector<std::vector<double>> slopes(3);
  for (std::uint64_t r = 0; r < 50; ++r) {
    o.seed = 12;
    o.replica = r;
    const auto res = simulate_bd(BDSpec::bbm(), ParticleConfig::from_positions({0.0}), o);
    const auto tr = rightmost_trajectory(res.series);
    int w = 0;
    for (double end : {6.0, 8.0, 10.0}) slopes[w++].push_back(estimate_velocity_window(tr, 2.0, end + 1e-9).slope);
  }
  const double m10 = stats::mean(slopes[2]);
  CHECK(m10 >= 1.05);
  CHECK(m10 <= 1.45);
  CHECK(stats::mean(slopes[0]) < stats::mean(slopes[1]));
  CHECK(stats::mean(slopes[1]) < m10);
}

TEST_CASE("spacing functional", "[analysis][spacing]") {
  const auto c = ParticleConfig::from_positions({0.0, 2.0, 5.0});
  CHECK(spacing_functional(c, [](double) { return 1.0; }) == 5.0);
  CHECK(spacing_functional(c, [](double v) { return v * (1.0 - v) * (v - 1.0 / 3.0) * (v - 2.0 / 3.0); }) == 0.0);
  CHECK(spacing_functional(c, [](double v) { return v; }) == Approx(2.0 / 3.0 + 3.0 * 2.0 / 3.0));
  CHECK(spacing_functional(ParticleConfig::from_positions({kMinusInf, 1.0, 4.0}), [](double v) { return v; }) ==
        Approx(3.0 * 2.0 / 3.0));
  CHECK_THROWS_AS(spacing_functional(ParticleConfig::from_positions({kMinusInf, 1.0}), [](double) { return 1.0; }),
                  std::invalid_argument);
}

TEST_CASE("spacing functional is the integral of g(F) over the support", "[analysis][spacing][property]") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.integer(0, 10);
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(rng.integer(0, 12));
    if (x[0] == x[1]) x[1] += 1.0;
    const auto c = ParticleConfig::from_positions(x);
    const auto g = [](double v) { return v * v; };
    // Integer positions: F is constant on each unit interval.
    const double lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
    double direct = 0.0;
    for (double s = lo; s < hi; s += 1.0) direct += g(empirical_cdf(c, s));
    CHECK(spacing_functional(c, g) == Approx(direct).epsilon(1e-14));
  }
  // g = h_p^N on an equally spaced configuration against a midpoint quadrature.
  const std::size_t n = 40;
  const auto h = source_hpN(NPSpec::top(2, 0.5), n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.1 * static_cast<double>(i);
  const auto c = ParticleConfig::from_positions(x);
  double quad = 0.0;
  const int m = 390000;
  const double dx = 3.9 / m;
  for (int i = 0; i < m; ++i) quad += h(empirical_cdf(c, (i + 0.5) * dx)) * dx;
  CHECK(spacing_functional(c, h.h) == Approx(quad).margin(1e-6));
}

TEST_CASE("moment gap estimator", "[analysis][chaos]") {
  CHECK(moment_gap({{0.0}, {1.0}}, {0.0}, 2).gap == Approx(0.5));
  CHECK(moment_gap({{0.3, 0.2}, {0.3, 0.2}, {0.3, 0.2}}, {0.0, 1.0}, 3).gap == Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(moment_gap({{0.0}}, {0.0}, 2), std::invalid_argument);
}

TEST_CASE("collision probabilities and the combinatorial bound", "[analysis][chaos]") {
  for (std::size_t n = 1; n <= 50; ++n) CHECK(collision_probability(n, 2) == Rational(1, static_cast<long>(n)));
  CHECK(collision_probability(10, 3) == Rational(28, 100));
  CHECK(combinatorial_bound_check(6, 1000));
}

TEST_CASE("independent particles follow the binomial variance", "[analysis][chaos][statistical]") {
  const std::size_t n = 50;
  const auto rep = chaos_gap(NPSpec::top(2, 0.0), [](std::size_t m) { return ParticleConfig::from_positions(std::vector<double>(m, 0.0)); },
                             1.0, 2, {n}, 3000, 7, {0.0});
  REQUIRE(rep.gaps.size() == 1);
  const double oracle = 0.25 / static_cast<double>(n);
  INFO("gap " << rep.gaps[0].gap << " se " << rep.gaps[0].se);
  CHECK(std::abs(rep.gaps[0].gap - oracle) <= 3.0 * rep.gaps[0].se);
  // Deterministic data at t = 0 have no spread.
  const auto zero = chaos_gap(NPSpec::top(2, 0.5), [](std::size_t m) { return quantile_init([](double p) { return p; }, m); },
                              0.0, 2, {20}, 50, 1, {0.1, 0.5, 0.9});
  CHECK(zero.gaps[0].gap == Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(chaos_gap(NPSpec::top(2, 0.5), nullptr, 1.0, 1, {10}, 10, 0, {0.0}), std::invalid_argument);
}

TEST_CASE("clan growth and intersections", "[analysis][clans][statistical]") {
  const NPSpec s = NPSpec::uniform(3, 0.5);
  for (const auto& g : clan_growth(s, 200, 100, {0.25, 0.5, 1.0}, 400, 3)) {
    INFO("s=" << g.s << " mean " << g.mean << " bound " << g.bound);
    CHECK(g.mean <= g.bound + 3.0 * g.se);
    CHECK(g.bound == Approx(std::exp(3.0 * g.s)));
  }
  CHECK(clan_intersection_prob(s, 100, 1, 2, 0.0, 50, 1).estimate == 0.0);
  const NPSpec k2 = NPSpec::top(2, 0.5);
  const auto ci = clan_intersection_prob(k2, 100, 10, 60, 1.0, 1000, 2);
  CHECK(ci.estimate <= ci.reference + 3.0 * ci.se);
  CHECK(ci.reference == Approx(4.0 * std::expm1(2.0) / 99.0));
  CHECK_THROWS_AS(clan_intersection_prob(k2, 100, 3, 3, 1.0, 10, 0), std::invalid_argument);
}

TEST_CASE("convergence study orchestration", "[analysis][study]") {
  StudyConfig cfg;
  cfg.spec = NPSpec::top(2, 0.5);
  cfg.ns = {64};
  cfg.replicas = 4;
  cfg.grid.dx = 0.02;
  const auto one = convergence_study(cfg);
  CHECK(one.rows.size() == 1);
  CHECK_FALSE(one.trend.has_value());
  REQUIRE(one.field.has_value());

  cfg.ns = {50, 2000};
  cfg.replicas = 9;
  const auto hydro = convergence_study(cfg);
  REQUIRE(hydro.rows.size() == 2);
  CHECK(hydro.trend == std::optional<bool>(true));
  for (const auto& r : hydro.rows) CHECK(r.values.size() == 9);

  // Thread count does not change the results.
  cfg.threads = 3;
  const auto threaded = convergence_study(cfg);
  for (std::size_t i = 0; i < 2; ++i) CHECK(threaded.rows[i].values == hydro.rows[i].values);

  StudyConfig v;
  v.kind = "velocity";
  v.spec = NPSpec::top(2, 0.5);
  v.ns = {4, 64};
  v.replicas = 6;
  v.horizon = 20.0;
  const auto vel = convergence_study(v);
  REQUIRE(vel.rows.size() == 2);
  CHECK(vel.rows[0].estimate < vel.rows[1].estimate);
  CHECK(vel.rows[1].estimate < std::numbers::sqrt2);

  StudyConfig bad = cfg;
  bad.ns = {1};
  CHECK_THROWS_AS(convergence_study(bad), std::invalid_argument);
  bad = cfg;
  bad.kind = "nope";
  CHECK_THROWS_AS(convergence_study(bad), std::invalid_argument);
}
