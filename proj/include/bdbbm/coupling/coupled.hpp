// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdbbm/bd/simulator.hpp"
#include "bdbbm/core/cloud.hpp"
#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/core/rng.hpp"

namespace bdbbm {

/// Thrown when a coupling is requested for specs that violate the comparison hypotheses.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Returns a diagnostic if sup_{x <= x'} b(x) > b'(x') somewhere on the test set.
inline std::optional<std::string> check_birth_order(const BirthFunction& b, const BirthFunction& bp) {
  std::vector<double> xs;
  for (int s = 0; s < 10000; ++s) xs.push_back(s / 9999.0);
  for (const auto* f : {&b, &bp})
    for (double x : f->breakpoints()) {
      if (x < 0.0 || x > 1.0) continue;
      xs.push_back(x);
      if (x > 0.0) xs.push_back(std::nextafter(x, 0.0));
    }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double run = 0.0;
  double arg = 0.0;
  for (double x : xs) {
    if (b(x) > run) {
      run = b(x);
      arg = x;
    }
    if (run > bp(x) + 1e-12)
      return "birth order fails: b(" + fmt_num(arg) + ") = " + fmt_num(run) + " > b'(" + fmt_num(x) +
             ") = " + fmt_num(bp(x));
  }
  return std::nullopt;
}

/// Returns a diagnostic if D(x) > D'(x) somewhere: exact at -inf, knots and left limits,
/// sampled at 257 points inside each piece between knots.
inline std::optional<std::string> check_kill_order(const KillMeasure& d, const KillMeasure& dp) {
  if (d.mass_at_minus_inf() > dp.mass_at_minus_inf() + 1e-12)
    return "kill order fails at -inf: " + fmt_num(d.mass_at_minus_inf()) + " > " +
           fmt_num(dp.mass_at_minus_inf());
  std::vector<double> knots = d.knots();
  knots.insert(knots.end(), dp.knots().begin(), dp.knots().end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  auto bad = [&](double x, bool left) {
    const double a = left ? d.left_limit(x) : d.cdf(x);
    const double c = left ? dp.left_limit(x) : dp.cdf(x);
    return a > c + 1e-12;
  };
  for (std::size_t s = 0; s < knots.size(); ++s) {
    const double x = knots[s];
    if (x < 1.0 && bad(x, false)) return "kill order fails: D(" + fmt_num(x) + ") = " + fmt_num(d.cdf(x)) + " > D'(" + fmt_num(x) + ") = " + fmt_num(dp.cdf(x));
    if (bad(x, true)) return "kill order fails: D(" + fmt_num(x) + "-) = " + fmt_num(d.left_limit(x)) + " > D'(" + fmt_num(x) + "-) = " + fmt_num(dp.left_limit(x));
    if (s + 1 == knots.size()) break;
    const double y = knots[s + 1];
    for (int m = 1; m < 257; ++m) {
      const double z = x + (y - x) * m / 257.0;
      if (bad(z, false))
        return "kill order fails: D(" + fmt_num(z) + ") = " + fmt_num(d.cdf(z)) + " > D'(" + fmt_num(z) +
               ") = " + fmt_num(dp.cdf(z));
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Checks the comparison hypotheses: b(x) <= b'(x') for x <= x', D_j <= D'_j' for all j, j'.
inline std::optional<std::string> check_coupling_hypotheses(const BDSpec& lower, const BDSpec& upper) {
  if (auto e = detail::check_birth_order(lower.b, upper.b)) return e;
  const std::size_t jl = lower.d.explicit_size();
  const std::size_t ju = upper.d.explicit_size();
  for (std::size_t j = 1; j <= jl; ++j)
    for (std::size_t jp = 1; jp <= ju; ++jp)
      if (auto e = detail::check_kill_order(lower.d.at(j), upper.d.at(jp)))
        return *e + " (D_" + std::to_string(j) + " vs D'_" + std::to_string(jp) + ")";
  return std::nullopt;
}

struct CoupleOptions {
  double horizon = std::numeric_limits<double>::infinity();
  std::size_t max_events = 100;  ///< upper-process events
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::size_t population_cap = 1'000'000;
  bool keep_audit = true;
};

/// One per coupled event.
struct AuditRecord {
  double t = 0.0;
  std::size_t n = 0;
  std::size_t n_prime = 0;
  bool shared = false;
  std::optional<std::size_t> violation;  ///< first violated lower quantile (1-based)
  bool kill_coupling_ok = true;          ///< m' <= m + N' - N in shared events
};

struct CoupledResult {
  ParticleConfig lower;
  ParticleConfig upper;
  std::vector<AuditRecord> audit;
  std::size_t events = 0;
  std::size_t shared_events = 0;
  std::size_t violations = 0;
  std::size_t kill_violations = 0;
  double t = 0.0;
};

namespace detail {

using PVec = std::vector<Cloud::Particle>;

inline std::vector<double> quantile_rates(const BirthFunction& b, std::size_t n) {
  std::vector<double> r(n);
  if (n == 1) {
    r[0] = b(1.0);
    return r;
  }
  for (std::size_t j = 1; j <= n; ++j) r[j - 1] = b(static_cast<double>(j - 1) / static_cast<double>(n - 1));
  return r;
}

/// Sorted-vector branch: child after every particle tied with the parent, then the victim is removed.
inline void branch_sorted(PVec& v, Label& next, std::size_t j, std::size_t killed) {
  const Cloud::Particle child{v[j - 1].x, next++};
  auto it = std::upper_bound(v.begin(), v.end(), child, Cloud::less);
  v.insert(it, child);
  if (killed > 0) v.erase(v.begin() + static_cast<std::ptrdiff_t>(killed - 1));
}

inline std::optional<std::size_t> first_violation(const PVec& a, const PVec& b) {
  if (a.size() > b.size()) return 1;
  const std::size_t s = b.size() - a.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].x > b[i + s].x) return i + 1;
  return std::nullopt;
}

inline PVec to_sorted(const ParticleConfig& c) {
  PVec v;
  for (std::size_t s = 0; s < c.size(); ++s) v.push_back({c.position(s), c.label(s)});
  std::sort(v.begin(), v.end(), Cloud::less);
  return v;
}

inline ParticleConfig from_sorted(const PVec& v) {
  std::vector<double> x;
  std::vector<Label> l;
  for (const auto& p : v) {
    x.push_back(p.x);
    l.push_back(p.label);
  }
  return ParticleConfig(std::move(x), std::move(l));
}

}  // namespace detail

/**
 * Monotone coupling of two rank-branching processes with lower <= upper.
 *
 * Clocks: the upper process draws its next event (time, quantile l') from its own rates; when
 * l' = l + N' - N for a lower quantile l, the lower process shares the event with probability
 * b_l / b'_l' (thinning of a common planar Poisson set). Kill quantiles of a shared event come
 * from one uniform through both generalized inverses. Between events the lower quantile i and
 * the upper quantile i + N' - N receive the same Gaussian increment. Shared randomness restarts
 * after every event.
 */
inline CoupledResult coupled_simulate(const BDSpec& lower, const BDSpec& upper, const ParticleConfig& init_lower,
                                      const ParticleConfig& init_upper, const CoupleOptions& o) {
  if (auto e = check_coupling_hypotheses(lower, upper)) throw HypothesisError("coupled_simulate: " + *e);
  if (!dominates(init_lower, init_upper))
    throw HypothesisError("coupled_simulate: initial configurations are not ordered");
  Rng rng(o.seed, o.replica, 4);
  detail::PVec a = detail::to_sorted(init_lower);
  detail::PVec b = detail::to_sorted(init_upper);
  Label next_a = init_lower.next_label();
  Label next_b = init_upper.next_label();
  CoupledResult res;
  double t = 0.0;

  auto advance = [&](double dt) {
    if (dt <= 0.0) return;
    const double sd = std::sqrt(dt);
    const std::size_t s = b.size() - a.size();
    for (std::size_t i = 0; i < s; ++i) {
      const double z = rng.normal(sd);
      if (!is_minus_inf(b[i].x)) b[i].x += z;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double z = rng.normal(sd);
      if (!is_minus_inf(a[i].x)) a[i].x += z;
      if (!is_minus_inf(b[i + s].x)) b[i + s].x += z;
    }
    std::sort(a.begin(), a.end(), Cloud::less);
    std::sort(b.begin(), b.end(), Cloud::less);
  };

  while (res.events < o.max_events) {
    if (a.size() > b.size()) throw std::logic_error("coupled_simulate: lower population exceeds upper");
    const std::size_t s = b.size() - a.size();
    const auto ra = detail::quantile_rates(lower.b, a.size());
    const auto rb = detail::quantile_rates(upper.b, b.size());
    double total = 0.0;
    for (double r : rb) total += r;
    const double dt = total > 0.0 ? rng.exponential(total) : std::numeric_limits<double>::infinity();
    if (t + dt > o.horizon) {
      advance(o.horizon - t);
      t = o.horizon;
      break;
    }
    advance(dt);
    t += dt;
    // Upper quantile l' with probability rb / total.
    double v = rng.uniform() * total;
    std::size_t lp = 1;
    while (lp < rb.size() && v >= rb[lp - 1]) v -= rb[lp++ - 1];
    const double thin = rng.uniform();
    const double u = rng.uniform_open0();
    const bool shared = lp > s && thin * rb[lp - 1] < ra[lp - s - 1];

    const std::size_t mp = kill_choice(upper.d, lp, u);
    AuditRecord rec;
    rec.shared = shared;
    if (shared) {
      const std::size_t l = lp - s;
      const std::size_t m = kill_choice(lower.d, l, u);
      // m = 0 stands for no kill.
      rec.kill_coupling_ok = mp == 0 || mp <= m + s;
      detail::branch_sorted(a, next_a, l, m);
      ++res.shared_events;
    }
    detail::branch_sorted(b, next_b, lp, mp);
    ++res.events;
    if (b.size() > o.population_cap) throw std::overflow_error("coupled_simulate: population exceeded cap");
    rec.t = t;
    rec.n = a.size();
    rec.n_prime = b.size();
    rec.violation = detail::first_violation(a, b);
    if (rec.violation) ++res.violations;
    if (!rec.kill_coupling_ok) ++res.kill_violations;
    if (o.keep_audit) res.audit.push_back(rec);
  }
  res.t = t;
  res.lower = detail::from_sorted(a);
  res.upper = detail::from_sorted(b);
  return res;
}

}  // namespace bdbbm
