// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdbbm/pde/solver.hpp"
#include "bdbbm/pde/source.hpp"

namespace bdbbm {

/// Monotone solution of W''/2 + c W' - h(W) = 0 with W(-inf) = 0, W(+inf) = 1, W(0) = 1/2.
struct WaveProfile {
  double c = 0.0;
  std::vector<double> xi;
  std::vector<double> w;
  double integral = 0.0;  ///< int h(W) dxi, tails included
  double residual = 0.0;  ///< max finite-difference ODE residual on the stored grid
};

struct WaveOptions {
  double step = 1e-3;
  double delta = 1e-8;      ///< launch offset off the saddle W = 0
  double v_switch = 1e-4;   ///< switch to the tail variables below this 1 - W
  double v_linear = 1e-8;   ///< linear regime of f(V)/V below this V
  double v_end = 1e-12;     ///< end of the stored profile
  double max_length = 1e6;  ///< guard on the xi range
};

namespace detail {

/// Throws unless h(0) = h(1) = 0 and h > 0 on the interior of a 10^4-point grid.
inline void check_monostable(const SourceSpec& h) {
  if (std::abs(h(0.0)) > 1e-12 || std::abs(h(1.0)) > 1e-12)
    throw std::invalid_argument("wave: source must vanish at 0 and 1");
  for (int s = 1; s < 10000; ++s)
    if (!(h(s / 10000.0) > 0.0))
      throw std::invalid_argument("wave: source is not monostable (h <= 0 at v = " + std::to_string(s / 10000.0) +
                                  ")");
}

struct ShootResult {
  bool admissible = false;
  WaveProfile profile;
};

/// Shoots from the saddle W = 0. W overshooting 1, or the tail log-slope q = V'/V falling below
/// the stable branch, means no monotone front at this speed.
inline ShootResult shoot(const SourceSpec& h, double c, const WaveOptions& o, bool keep) {
  const double step = o.step;
  const double a = -h.d1();
  ShootResult res;
  auto& pr = res.profile;
  pr.c = c;
  std::vector<double> hv;

  double delta = o.delta;
  auto launch_slope = [&](double d) {
    const double rhs = h(d) / d;
    return -c + std::sqrt(c * c + 2.0 * rhs);
  };
  double mu = launch_slope(delta);
  if (mu < 1e-2) {
    delta = 1e-3;
    mu = launch_slope(delta);
  }
  double w = delta, p = mu * delta, xi = 0.0;
  // Exact left tail from integrating the ODE over (-inf, xi0].
  double integral = 0.5 * p + c * w;
  auto push = [&](double x, double wv, double hw) {
    if (!keep) return;
    pr.xi.push_back(x);
    pr.w.push_back(wv);
    hv.push_back(hw);
  };
  push(xi, w, h(w));

  auto fw = [&](double W, double P, double& dW, double& dP) {
    dW = P;
    dP = 2.0 * (h(W) - c * P);
  };
  double prev_h = h(w);
  for (;;) {
    double k1w, k1p, k2w, k2p, k3w, k3p, k4w, k4p;
    fw(w, p, k1w, k1p);
    fw(w + 0.5 * step * k1w, p + 0.5 * step * k1p, k2w, k2p);
    fw(w + 0.5 * step * k2w, p + 0.5 * step * k2p, k3w, k3p);
    fw(w + step * k3w, p + step * k3p, k4w, k4p);
    w += step / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    p += step / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    xi += step;
    if (w >= 1.0 || p < 0.0) return res;
    const double hw = h(w);
    integral += 0.5 * step * (prev_h + hw);
    prev_h = hw;
    push(xi, w, hw);
    if (1.0 - w < o.v_switch) break;
    if (xi > o.max_length) throw std::domain_error("wavefront: no convergence along the saddle branch");
  }

  // Tail variables y = log V, q = V'/V with V = 1 - W.
  double y = std::log1p(-w);
  double q = -p / (1.0 - w);
  auto F = [&](double V) { return V < o.v_linear ? a : h(1.0 - V) / V; };
  auto fq = [&](double Y, double Q, double& dY, double& dQ) {
    dY = Q;
    dQ = -Q * Q - 2.0 * c * Q - 2.0 * F(std::exp(Y));
  };
  bool decided = false;
  for (;;) {
    const double V = std::exp(y);
    // Degenerate h'(1) = 0: no linear regime; above -c the slow root near 0 attracts q for good.
    if (!decided && a <= 1e-12 && q > -c && c * c > 2.0 * F(V)) {
      decided = true;
      if (!keep) {
        res.admissible = true;
        return res;
      }
    }
    if (!decided && V < o.v_linear) {
      const double disc = c * c - 2.0 * a;
      if (disc < -1e-12 * std::max(1.0, 2.0 * a)) return res;
      const double q_minus = -c - std::sqrt(std::max(0.0, disc));
      if (q < q_minus) return res;
      decided = true;
      if (!keep) {
        res.admissible = true;
        return res;
      }
    }
    // A flat linear tail (h'(1) = 0) decays too slowly to reach v_end; the tail identity below is exact anyway.
    if (V < o.v_end || (decided && -q < 1e-3)) break;
    double k1y, k1q, k2y, k2q, k3y, k3q, k4y, k4q;
    fq(y, q, k1y, k1q);
    fq(y + 0.5 * step * k1y, q + 0.5 * step * k1q, k2y, k2q);
    fq(y + 0.5 * step * k2y, q + 0.5 * step * k2q, k3y, k3q);
    fq(y + step * k3y, q + step * k3q, k4y, k4q);
    y += step / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    q += step / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    xi += step;
    if (q < -2.0 * c) return res;
    const double Vn = std::exp(y);
    const double hw = F(Vn) * Vn;
    integral += 0.5 * step * (prev_h + hw);
    prev_h = hw;
    push(xi, 1.0 - Vn, hw);
    if (xi > o.max_length) throw std::domain_error("wavefront: tail integration did not terminate");
  }
  // Exact right tail: int_{xi_e}^inf f(V) = V (q/2 + c).
  const double Ve = std::exp(y);
  integral += Ve * (0.5 * q + c);
  res.admissible = true;
  pr.integral = integral;
  if (!keep) return res;

  // Normalize W(0) = 1/2.
  std::size_t i = 0;
  while (i + 1 < pr.w.size() && pr.w[i + 1] < 0.5) ++i;
  const double shift = pr.xi[i] + (0.5 - pr.w[i]) / (pr.w[i + 1] - pr.w[i]) * (pr.xi[i + 1] - pr.xi[i]);
  for (double& x : pr.xi) x -= shift;

  double r = 0.0;
  for (std::size_t s = 1; s + 1 < pr.w.size(); ++s) {
    const double d2 = (pr.w[s + 1] - 2.0 * pr.w[s] + pr.w[s - 1]) / (step * step);
    const double d1 = (pr.w[s + 1] - pr.w[s - 1]) / (2.0 * step);
    r = std::max(r, std::abs(0.5 * d2 + c * d1 - hv[s]));
  }
  pr.residual = r;
  return res;
}

}  // namespace detail

/// Monotone traveling wave at speed c, or nullopt when none exists.
inline std::optional<WaveProfile> wavefront(const SourceSpec& h, double c, const WaveOptions& o = {}) {
  detail::check_monostable(h);
  if (!(c > 0.0)) return std::nullopt;
  auto r = detail::shoot(h, c, o, true);
  if (!r.admissible) return std::nullopt;
  return std::move(r.profile);
}

/// Admissibility of speed c without storing the profile.
inline bool wave_admissible(const SourceSpec& h, double c, const WaveOptions& o = {}) {
  detail::check_monostable(h);
  return c > 0.0 && detail::shoot(h, c, o, false).admissible;
}

struct MinimalSpeedOptions {
  double tol = 1e-4;         ///< bisection width
  bool cross_check = true;   ///< also estimate the speed by median tracking
  double track_horizon = 200.0;
  double track_dx = 0.05;
  WaveOptions wave{};
};

struct MinimalSpeedReport {
  double c_star = 0.0;
  double linear_bound = 0.0;  ///< sqrt(-2 h'(1))
  double upper_bound = 0.0;   ///< admissible end of the final bracket
  bool pulled = false;        ///< c_star equals the linear bound
  int bisections = 0;
  double tracked = std::numeric_limits<double>::quiet_NaN();  ///< median-tracking estimate
};

/// Front speed from the median of the solution started at a Heaviside step, slope over [T/2, T].
inline double tracked_speed(const SourceSpec& h, double c_guess, double T = 200.0, double dx = 0.05) {
  GridParams g;
  g.dx = dx;
  g.x_min = -(6.0 * std::sqrt(T) + 20.0);
  g.x_max = c_guess * T + 60.0 + 6.0 * std::sqrt(T);
  for (int s = 0; s <= 100; ++s) g.store_times.push_back(T / 2.0 + T / 2.0 * s / 100.0);
  const auto f = solve_fkpp(h, [](double x) { return x < 0.0 ? 0.0 : 1.0; }, g, T);
  const auto m = median_track(f);
  double st = 0, sm = 0;
  const double n = static_cast<double>(m.size());
  for (std::size_t s = 0; s < m.size(); ++s) {
    st += f.times[s];
    sm += m[s];
  }
  st /= n;
  sm /= n;
  double num = 0, den = 0;
  for (std::size_t s = 0; s < m.size(); ++s) {
    num += (f.times[s] - st) * (m[s] - sm);
    den += (f.times[s] - st) * (f.times[s] - st);
  }
  return num / den;
}

/// Minimal admissible speed by bisection over wavefront admissibility.
inline MinimalSpeedReport minimal_speed_report(const SourceSpec& h, const MinimalSpeedOptions& o = {}) {
  detail::check_monostable(h);
  MinimalSpeedReport rep;
  const double a = -h.d1();
  rep.linear_bound = std::sqrt(std::max(0.0, 2.0 * a));
  double kmax = std::max(h.d0(), a);
  for (int s = 1; s < 10000; ++s) {
    const double v = s / 10000.0;
    kmax = std::max(kmax, h(v) / (v * (1.0 - v)));
  }
  double lo = std::max(rep.linear_bound, 1e-6);
  double hi = std::sqrt(2.0 * kmax) + 0.05;
  int grow = 0;
  while (!wave_admissible(h, hi, o.wave)) {
    if (++grow > 10)
      throw std::domain_error("minimal_speed: no admissible speed found up to c = " + std::to_string(hi));
    hi *= 1.5;
  }
  if (wave_admissible(h, lo, o.wave)) {
    rep.c_star = lo;
    rep.upper_bound = lo;
    rep.pulled = true;
  } else {
    while (hi - lo > o.tol) {
      const double mid = 0.5 * (lo + hi);
      (wave_admissible(h, mid, o.wave) ? hi : lo) = mid;
      ++rep.bisections;
    }
    rep.c_star = hi;
    rep.upper_bound = hi;
  }
  if (o.cross_check) rep.tracked = tracked_speed(h, rep.c_star, o.track_horizon, o.track_dx);
  return rep;
}

inline double minimal_speed(const SourceSpec& h) {
  MinimalSpeedOptions o;
  o.cross_check = false;
  return minimal_speed_report(h, o).c_star;
}

}  // namespace bdbbm
