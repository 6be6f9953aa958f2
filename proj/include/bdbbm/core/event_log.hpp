// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bdbbm/core/particle_config.hpp"

namespace bdbbm {

/// Brownian advance of every finite particle by dt; increments listed in the storage order of the
/// simulated cloud, which replay reproduces.
struct AdvanceRec {
  double dt = 0.0;
  std::vector<double> increments;
};
/// Branch of quantile j at time t; killed = 0 means no kill. u is the kill uniform.
struct BranchRec {
  double t = 0.0;
  std::size_t j = 0;
  std::size_t killed = 0;
  double u = 0.0;
};
/// Tuple-construction event: quantile set ell (sorted, 1-based) and pair (i, j) into it.
struct TupleRec {
  double t = 0.0;
  std::vector<std::size_t> ell;
  std::size_t i = 0;
  std::size_t j = 0;
};
/// Per-index ring: index rings with companion set S and pair (a, b).
struct RingRec {
  double t = 0.0;
  std::size_t index = 0;
  std::vector<std::size_t> S;
  std::size_t a = 0;
  std::size_t b = 0;
  bool applied = false;
};
struct SnapshotRec {
  double t = 0.0;
};

using LogRecord = std::variant<AdvanceRec, BranchRec, TupleRec, RingRec, SnapshotRec>;

/**
 * Time-ordered record of every random mark used by a simulation.
 *
 * Text format, one record per line, doubles in hexfloat so that round trips are exact:
 *
 *     # bdbbm-eventlog 1
 *     I <label> <position>          initial particle (position may be -inf)
 *     A <dt> <n> <inc_1> ... <inc_n>
 *     B <t> <j> <killed> <u>
 *     E <t> <k> <l_1> ... <l_k> <i> <j>
 *     R <t> <index> <m> <s_1> ... <s_m> <a> <b> <applied 0|1>
 *     S <t>
 */
class EventLog {
 public:
  ParticleConfig initial;
  std::vector<LogRecord> records;

  void clear() { records.clear(); }
  std::size_t size() const noexcept { return records.size(); }

  template <class T>
  std::vector<T> collect() const {
    std::vector<T> out;
    for (const auto& r : records)
      if (const auto* p = std::get_if<T>(&r)) out.push_back(*p);
    return out;
  }

  void write(std::ostream& os) const {
    os << "# bdbbm-eventlog 1\n";
    for (std::size_t s = 0; s < initial.size(); ++s)
      os << "I " << initial.label(s) << ' ' << fmt(initial.position(s)) << '\n';
    for (const auto& r : records) std::visit([&](const auto& x) { write_one(os, x); }, r);
  }

  static EventLog read(std::istream& is) {
    EventLog log;
    std::string line;
    std::vector<double> pos;
    std::vector<Label> lab;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string tag;
      ss >> tag;
      auto num = [&]() {
        std::string tok;
        if (!(ss >> tok)) throw std::runtime_error("eventlog: truncated record at line " + std::to_string(lineno));
        return parse(tok);
      };
      auto idx = [&]() { return static_cast<std::size_t>(num()); };
      if (tag == "I") {
        lab.push_back(static_cast<Label>(num()));
        pos.push_back(num());
      } else if (tag == "A") {
        AdvanceRec a;
        a.dt = num();
        a.increments.resize(idx());
        for (double& v : a.increments) v = num();
        log.records.emplace_back(std::move(a));
      } else if (tag == "B") {
        BranchRec b;
        b.t = num();
        b.j = idx();
        b.killed = idx();
        b.u = num();
        log.records.emplace_back(b);
      } else if (tag == "E") {
        TupleRec e;
        e.t = num();
        e.ell.resize(idx());
        for (auto& v : e.ell) v = idx();
        e.i = idx();
        e.j = idx();
        log.records.emplace_back(std::move(e));
      } else if (tag == "R") {
        RingRec r;
        r.t = num();
        r.index = idx();
        r.S.resize(idx());
        for (auto& v : r.S) v = idx();
        r.a = idx();
        r.b = idx();
        r.applied = idx() != 0;
        log.records.emplace_back(std::move(r));
      } else if (tag == "S") {
        log.records.emplace_back(SnapshotRec{num()});
      } else {
        throw std::runtime_error("eventlog: unknown record '" + tag + "' at line " + std::to_string(lineno));
      }
    }
    if (!pos.empty()) log.initial = ParticleConfig(std::move(pos), std::move(lab));
    return log;
  }

  /// Hexfloat text, "-inf" for the sentinel.
  static std::string fmt(double x) {
    if (is_minus_inf(x)) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
  }
  static double parse(const std::string& s) {
    if (s == "-inf") return kMinusInf;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw std::runtime_error("eventlog: bad number '" + s + "'");
    return v;
  }

 private:
  static void write_one(std::ostream& os, const AdvanceRec& a) {
    os << "A " << fmt(a.dt) << ' ' << a.increments.size();
    for (double v : a.increments) os << ' ' << fmt(v);
    os << '\n';
  }
  static void write_one(std::ostream& os, const BranchRec& b) {
    os << "B " << fmt(b.t) << ' ' << b.j << ' ' << b.killed << ' ' << fmt(b.u) << '\n';
  }
  static void write_one(std::ostream& os, const TupleRec& e) {
    os << "E " << fmt(e.t) << ' ' << e.ell.size();
    for (auto v : e.ell) os << ' ' << v;
    os << ' ' << e.i << ' ' << e.j << '\n';
  }
  static void write_one(std::ostream& os, const RingRec& r) {
    os << "R " << fmt(r.t) << ' ' << r.index << ' ' << r.S.size();
    for (auto v : r.S) os << ' ' << v;
    os << ' ' << r.a << ' ' << r.b << ' ' << (r.applied ? 1 : 0) << '\n';
  }
  static void write_one(std::ostream& os, const SnapshotRec& s) { os << "S " << fmt(s.t) << '\n'; }
};

}  // namespace bdbbm
