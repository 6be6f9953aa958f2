// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdbbm/core/birth_function.hpp"
#include "bdbbm/core/kill_measure.hpp"
#include "bdbbm/pde/source.hpp"

namespace bdbbm {

/// Raised when the truncated domain is too narrow for the requested horizon.
class BoundaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values on x0 + i*dx, i = 0..M, at each stored time.
struct ScalarField {
  double x0 = 0.0;
  double dx = 0.01;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  std::size_t nodes() const { return values.empty() ? 0 : values.front().size(); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  const std::vector<double>& at_time(double t) const {
    for (std::size_t s = 0; s < times.size(); ++s)
      if (times[s] == t) return values[s];
    throw std::out_of_range("ScalarField: time not stored");
  }
  /// Linear interpolation in x of the slice s; constant extension outside the grid.
  double interpolate(std::size_t s, double xx) const {
    const auto& v = values.at(s);
    if (xx <= x0) return v.front();
    const double pos = (xx - x0) / dx;
    if (pos >= static_cast<double>(v.size() - 1)) return v.back();
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
  }
};

struct GridParams {
  double x_min = -20.0;
  double x_max = 20.0;
  double dx = 0.01;
  double dt = 0.0;  ///< 0 selects 5 dx^2
  std::vector<double> store_times;  ///< empty stores only the horizon
  double boundary_tol = 1e-8;
  int init_subsamples = 16;
};

using Forcing = std::function<double(double t, double x)>;

namespace detail {

inline void thomas(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                   std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace detail

/**
 * Solves du/dt = u''/2 - h(u) + g on [x_min, x_max] up to time T.
 *
 * Diffusion is theta-implicit with theta = max(1/2, 1 - (1 - dt L)/(2r)), r = dt/(2 dx^2),
 * L = max(0, sup h'), which is the smallest weight keeping the scheme monotone. Reaction and
 * forcing are explicit. Boundary nodes follow the far-field ODE du/dt = -h(u) + g, and the nodes
 * next to them must stay within boundary_tol of the boundary values at every stored time.
 */
inline ScalarField solve_fkpp(const SourceSpec& h, const std::function<double(double)>& u0, const GridParams& g,
                              double T, const Forcing& forcing = nullptr) {
  if (!(g.x_max > g.x_min) || !(g.dx > 0.0)) throw std::invalid_argument("solve_fkpp: bad grid");
  if (!(T >= 0.0)) throw std::invalid_argument("solve_fkpp: negative horizon");
  const auto m = static_cast<std::size_t>(std::llround((g.x_max - g.x_min) / g.dx));
  if (m < 3) throw std::invalid_argument("solve_fkpp: grid too coarse");
  const double dt_nominal = g.dt > 0.0 ? g.dt : 5.0 * g.dx * g.dx;
  const double lip = std::max(0.0, h.sup_derivative());
  if (dt_nominal * lip > 1.0)
    throw std::invalid_argument("solve_fkpp: dt * sup h' > 1; reduce dt");

  std::vector<double> stores = g.store_times;
  if (stores.empty()) stores.push_back(T);
  std::sort(stores.begin(), stores.end());
  for (double s : stores)
    if (s < 0.0 || s > T) throw std::invalid_argument("solve_fkpp: store time outside [0, T]");

  ScalarField f;
  f.x0 = g.x_min;
  f.dx = g.dx;
  f.dt = dt_nominal;
  std::vector<double> u(m + 1);
  const int ns = std::max(1, g.init_subsamples);
  for (std::size_t i = 0; i <= m; ++i) {
    double acc = 0.0;
    const double xi = g.x_min + static_cast<double>(i) * g.dx;
    for (int k = 0; k < ns; ++k) acc += u0(xi + g.dx * ((k + 0.5) / ns - 0.5));
    u[i] = acc / ns;
  }

  auto check_boundary = [&](double t) {
    if (std::abs(u[1] - u[0]) > g.boundary_tol || std::abs(u[m - 1] - u[m]) > g.boundary_tol)
      throw BoundaryError("solve_fkpp: solution reaches the domain edge by t = " + std::to_string(t) +
                          "; widen [x_min, x_max]");
  };

  std::vector<double> hv(m + 1), lo(m - 1), di(m - 1), up(m - 1), rhs(m - 1);
  double t = 0.0;
  std::size_t si = 0;
  auto store = [&]() {
    check_boundary(t);
    f.times.push_back(t);
    f.values.push_back(u);
  };
  while (si < stores.size() && stores[si] <= 0.0) {
    store();
    ++si;
  }
  while (si < stores.size()) {
    const double target = stores[si];
    double dt = dt_nominal;
    bool hit = false;
    if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
      dt = target - t;
      hit = true;
    }
    const double r = dt / (2.0 * g.dx * g.dx);
    const double theta = std::max(0.5, 1.0 - (1.0 - dt * lip) / (2.0 * r));
    for (std::size_t i = 0; i <= m; ++i) hv[i] = h(u[i]);
    const double left = u[0] + dt * (-hv[0] + (forcing ? forcing(t, f.x(0)) : 0.0));
    const double right = u[m] + dt * (-hv[m] + (forcing ? forcing(t, f.x(m)) : 0.0));
    // Increment form: (1 - theta r Lap) w = r Lap u + dt (-h(u) + g), u <- u + w. Flat states stay exact.
    for (std::size_t i = 1; i < m; ++i) {
      const double lap = (u[i - 1] - u[i]) + (u[i + 1] - u[i]);
      rhs[i - 1] = r * lap + dt * (-hv[i] + (forcing ? forcing(t, f.x(i)) : 0.0));
      lo[i - 1] = -theta * r;
      up[i - 1] = -theta * r;
      di[i - 1] = 1.0 + 2.0 * theta * r;
    }
    rhs.front() += theta * r * (left - u[0]);
    rhs.back() += theta * r * (right - u[m]);
    detail::thomas(lo, di, up, rhs);
    u[0] = left;
    u[m] = right;
    for (std::size_t i = 1; i < m; ++i) u[i] += rhs[i - 1];
    t = hit ? target : t + dt;
    if (hit) {
      store();
      ++si;
      while (si < stores.size() && stores[si] <= t) {
        store();
        ++si;
      }
    }
  }
  return f;
}

/// Tail equation dV/dt = V''/2 + B(V) - G(V), i.e. source G - B.
inline ScalarField solve_tail_hydro(const BirthFunction& b, const KillMeasure& d,
                                   const std::function<double(double)>& v0, const GridParams& g, double T) {
  return solve_fkpp(tail_source(b, d), v0, g, T);
}

/// Linear-interpolation root of u(t, .) = 1/2 per stored time.
inline std::vector<double> median_track(const ScalarField& f) {
  std::vector<double> out;
  for (std::size_t s = 0; s < f.values.size(); ++s) {
    const auto& v = f.values[s];
    bool found = false;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double a = v[i] - 0.5, b = v[i + 1] - 0.5;
      if (a == 0.0) {
        out.push_back(f.x(i));
        found = true;
        break;
      }
      if ((a < 0.0) != (b < 0.0) && b != 0.0) {
        out.push_back(f.x(i) + f.dx * a / (a - b));
        found = true;
        break;
      }
      if (b == 0.0) {
        out.push_back(f.x(i + 1));
        found = true;
        break;
      }
    }
    if (!found) throw std::domain_error("median_track: no crossing of 1/2 at t = " + std::to_string(f.times[s]));
  }
  return out;
}

/// sup over the grid of |u(t) - v(t)| for two solves with the same grid.
inline double stability_gap(const SourceSpec& h, const std::function<double(double)>& u0,
                            const std::function<double(double)>& u0_tilde, const Forcing& g, const Forcing& g_tilde,
                            double t, const GridParams& grid) {
  const ScalarField a = solve_fkpp(h, u0, grid, t, g);
  const ScalarField b = solve_fkpp(h, u0_tilde, grid, t, g_tilde);
  double gap = 0.0;
  const auto& va = a.values.back();
  const auto& vb = b.values.back();
  for (std::size_t i = 0; i < va.size(); ++i) gap = std::max(gap, std::abs(va[i] - vb[i]));
  return gap;
}

}  // namespace bdbbm
