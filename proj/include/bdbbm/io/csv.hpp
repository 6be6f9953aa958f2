// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdbbm/core/particle_config.hpp"
#include "bdbbm/pde/solver.hpp"
#include "bdbbm/pde/wave.hpp"

namespace bdbbm::csv {

/// Shortest round-trip decimal form; -inf is written as the literal "-inf".
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

inline double parse_num(const std::string& s) {
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("csv: invalid number '" + s + "'");
  return v;
}

/// Row-oriented writer to an in-memory buffer; `str()` yields the file contents.
class Writer {
 public:
  explicit Writer(const std::vector<std::string>& header) : cols_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw std::invalid_argument("csv: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::size_t cols_;
  std::ostringstream os_;
};

/// Parsed file: header plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::out_of_range("csv: no column '" + name + "'");
  }
};

inline Table read(std::istream& is) {
  Table t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto r = split(line);
    if (r.size() != t.header.size()) throw std::invalid_argument("csv: ragged row");
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("csv: cannot open " + path);
  return read(f);
}

/// Snapshots as (t, quantile, label, x).
inline std::string snapshots(const std::vector<std::pair<double, ParticleConfig>>& snaps) {
  Writer w({"t", "quantile", "label", "x"});
  for (const auto& [t, c] : snaps) {
    const auto slots = sorted_slots(c);
    for (std::size_t q = 0; q < slots.size(); ++q)
      w.row({num(t), std::to_string(q + 1), std::to_string(c.label(slots[q])), num(c.position(slots[q]))});
  }
  return w.str();
}

/// Field as (t, x, value).
inline std::string field(const ScalarField& f) {
  Writer w({"t", "x", "value"});
  for (std::size_t s = 0; s < f.times.size(); ++s)
    for (std::size_t i = 0; i < f.values[s].size(); ++i) w.row({num(f.times[s]), num(f.x(i)), num(f.values[s][i])});
  return w.str();
}

/// Wave profile as (xi, W), thinned to every `stride`-th point.
inline std::string wave(const WaveProfile& p, std::size_t stride = 1) {
  Writer w({"xi", "W"});
  for (std::size_t i = 0; i < p.xi.size(); i += std::max<std::size_t>(1, stride)) w.row({num(p.xi[i]), num(p.w[i])});
  return w.str();
}

}  // namespace bdbbm::csv
