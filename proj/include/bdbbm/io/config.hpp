// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bdbbm/bd/simulator.hpp"
#include "bdbbm/core/birth_function.hpp"
#include "bdbbm/core/kill_measure.hpp"
#include "bdbbm/io/toml.hpp"
#include "bdbbm/np/spec.hpp"

namespace bdbbm {

/// Schema violation in an experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace config {

enum class Kind { Bool, Int, Float, String, FloatList, IntList, FloatMatrix };

struct Field {
  Kind kind;
  toml::Value def;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  std::vector<std::string> choices;  ///< allowed string values; empty means free-form
};

using Section = std::map<std::string, Field>;
using Schema = std::map<std::string, Section>;

namespace detail {

inline toml::Value fl(double d) { return {d}; }
inline toml::Value in(std::int64_t i) { return {i}; }
inline toml::Value st(const char* s) { return {std::string(s)}; }
inline toml::Value arr() { return {toml::Array{}}; }
inline toml::Value farr(std::initializer_list<double> xs) {
  toml::Array a;
  for (double x : xs) a.push_back({x});
  return {a};
}
inline toml::Value iarr(std::initializer_list<std::int64_t> xs) {
  toml::Array a;
  for (auto x : xs) a.push_back({x});
  return {a};
}

inline Section model_section() {
  const double inf = std::numeric_limits<double>::infinity();
  return {
      {"type", {Kind::String, st("np"), -inf, inf, {"np", "bd"}}},
      {"lambda", {Kind::Float, fl(0.5), 0.0, inf, {}}},
      {"k", {Kind::Int, in(2), 2, 64, {}}},
      {"p", {Kind::String, st("top"), -inf, inf, {"top", "extremes", "min-to-uniform", "uniform", "raw"}}},
      {"p_raw", {Kind::FloatMatrix, arr(), -inf, inf, {}}},
      {"birth", {Kind::String, st("one"), -inf, inf, {}}},
      {"birth_breaks", {Kind::FloatList, arr(), 0.0, 1.0, {}}},
      {"birth_coeffs", {Kind::FloatMatrix, arr(), -inf, inf, {}}},
      {"kill", {Kind::String, st("bbm"), -inf, inf, {}}},
      {"kill_minus_inf", {Kind::Float, fl(0.0), 0.0, 1.0, {}}},
      {"kill_atoms", {Kind::FloatMatrix, arr(), -inf, inf, {}}},
      {"kill_breaks", {Kind::FloatList, arr(), 0.0, 1.0, {}}},
      {"kill_density", {Kind::FloatMatrix, arr(), -inf, inf, {}}},
  };
}

}  // namespace detail

/// The documented configuration schema with its defaults.
inline const Schema& schema() {
  using namespace detail;
  static const Schema s = [] {
    const double inf = std::numeric_limits<double>::infinity();
    Schema sc;
    sc[""] = {
        {"task",
         {Kind::String, st("simulate-np"), -inf, inf,
          {"simulate-bd", "simulate-np", "couple", "solve", "wave", "study", "clans"}}},
        {"seed", {Kind::Int, in(0), 0, 9.2e18, {}}},
        {"threads", {Kind::Int, in(1), 1, 4096, {}}},
    };
    sc["model"] = model_section();
    sc["upper"] = model_section();
    sc["upper"]["type"].def = st("bd");
    sc["run"] = {
        {"n", {Kind::Int, in(100), 1, 1e8, {}}},
        {"init", {Kind::String, st("zeros"), -inf, inf, {"zeros", "uniform", "normal"}}},
        {"upper_init", {Kind::String, st("same"), -inf, inf, {"same", "zeros", "uniform", "normal"}}},
        {"horizon", {Kind::Float, fl(1.0), 0.0, 1e9, {}}},
        {"obs_dt", {Kind::Float, fl(0.0), 0.0, 1e9, {}}},
        {"observation_times", {Kind::FloatList, arr(), 0.0, 1e9, {}}},
        {"replicas", {Kind::Int, in(1), 1, 1e9, {}}},
        {"record_log", {Kind::Bool, {false}, -inf, inf, {}}},
        {"construction", {Kind::String, st("tuple"), -inf, inf, {"tuple", "per-index"}}},
        {"max_events", {Kind::Int, in(100), 1, 1e12, {}}},
        {"population_cap", {Kind::Int, in(1000000), 1, 1e12, {}}},
        {"fast_path", {Kind::Bool, {true}, -inf, inf, {}}},
    };
    sc["pde"] = {
        {"source", {Kind::String, st("model"), -inf, inf, {"model", "fkpp"}}},
        {"fkpp_a", {Kind::Float, fl(1.0), 0.0, 1e6, {}}},
        {"initial", {Kind::String, st("heaviside"), -inf, inf, {"heaviside", "uniform", "normal", "one", "zero"}}},
        {"x_min", {Kind::Float, fl(-20.0), -1e9, 1e9, {}}},
        {"x_max", {Kind::Float, fl(20.0), -1e9, 1e9, {}}},
        {"dx", {Kind::Float, fl(0.01), 1e-6, 1e3, {}}},
        {"dt", {Kind::Float, fl(0.0), 0.0, 1e3, {}}},
        {"horizon", {Kind::Float, fl(1.0), 0.0, 1e9, {}}},
        {"store_times", {Kind::FloatList, arr(), 0.0, 1e9, {}}},
        {"boundary_tol", {Kind::Float, fl(1e-8), 0.0, 1.0, {}}},
        {"forcing", {Kind::Float, fl(0.0), -1e6, 1e6, {}}},
    };
    sc["wave"] = {
        {"speeds", {Kind::FloatList, farr({std::sqrt(2.0)}), 0.0, 1e6, {}}},
        {"minimal", {Kind::Bool, {true}, -inf, inf, {}}},
        {"step", {Kind::Float, fl(1e-3), 1e-6, 1.0, {}}},
        {"delta", {Kind::Float, fl(1e-8), 1e-14, 1e-2, {}}},
        {"cross_check", {Kind::Bool, {true}, -inf, inf, {}}},
        {"track_horizon", {Kind::Float, fl(200.0), 1.0, 1e5, {}}},
        {"track_dx", {Kind::Float, fl(0.05), 1e-4, 1.0, {}}},
        {"bisection_tol", {Kind::Float, fl(1e-4), 1e-10, 1.0, {}}},
        {"stride", {Kind::Int, in(10), 1, 1e9, {}}},
    };
    sc["study"] = {
        {"kind", {Kind::String, st("hydro"), -inf, inf, {"hydro", "velocity", "chaos"}}},
        {"ns", {Kind::IntList, iarr({500, 5000}), 2, 1e8, {}}},
        {"replicas", {Kind::Int, in(20), 1, 1e9, {}}},
        {"t", {Kind::Float, fl(1.0), 0.0, 1e9, {}}},
        {"horizon", {Kind::Float, fl(50.0), 0.0, 1e9, {}}},
        {"obs_dt", {Kind::Float, fl(0.5), 1e-9, 1e9, {}}},
        {"burn_in", {Kind::Float, fl(0.25), 0.0, 0.99, {}}},
        {"ell", {Kind::Int, in(2), 2, 64, {}}},
        {"grid_min", {Kind::Float, fl(-1.0), -1e9, 1e9, {}}},
        {"grid_max", {Kind::Float, fl(4.0), -1e9, 1e9, {}}},
        {"grid_points", {Kind::Int, in(51), 1, 1e7, {}}},
    };
    sc["clans"] = {
        {"log", {Kind::String, st(""), -inf, inf, {}}},
        {"roots", {Kind::IntList, iarr({1, 2}), 1, 1e9, {}}},
        {"t", {Kind::Float, fl(1.0), 0.0, 1e9, {}}},
        {"mode", {Kind::String, st("ancestor"), -inf, inf, {"ancestor", "forward"}}},
    };
    return sc;
  }();
  return s;
}

namespace detail {

inline std::string where(const std::string& sec, const std::string& key) {
  return sec.empty() ? key : sec + "." + key;
}

inline double as_double(const toml::Value& v, const std::string& w) {
  if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.v));
  if (v.is_float()) return std::get<double>(v.v);
  if (v.is_string()) {
    const auto& s = std::get<std::string>(v.v);
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(w + ": expected a number");
}

inline void range(double x, const Field& f, const std::string& w) {
  if (std::isnan(x) || x < f.min || x > f.max)
    throw ConfigError(w + ": value " + std::to_string(x) + " outside [" + std::to_string(f.min) + ", " +
                      std::to_string(f.max) + "]");
}

inline toml::Value coerce(const toml::Value& v, const Field& f, const std::string& w) {
  switch (f.kind) {
    case Kind::Bool:
      if (!v.is_bool()) throw ConfigError(w + ": expected true or false");
      return v;
    case Kind::Int: {
      if (!v.is_int()) throw ConfigError(w + ": expected an integer");
      range(static_cast<double>(std::get<std::int64_t>(v.v)), f, w);
      return v;
    }
    case Kind::Float: {
      const double x = as_double(v, w);
      range(x, f, w);
      return {x};
    }
    case Kind::String: {
      if (!v.is_string()) throw ConfigError(w + ": expected a string");
      const auto& s = std::get<std::string>(v.v);
      if (!f.choices.empty() && std::find(f.choices.begin(), f.choices.end(), s) == f.choices.end()) {
        std::string all;
        for (const auto& c : f.choices) all += (all.empty() ? "" : ", ") + c;
        throw ConfigError(w + ": '" + s + "' is not one of {" + all + "}");
      }
      return v;
    }
    case Kind::FloatList:
    case Kind::IntList: {
      if (!v.is_array()) throw ConfigError(w + ": expected an array");
      toml::Array out;
      for (const auto& e : std::get<toml::Array>(v.v)) {
        Field ef = f;
        ef.kind = f.kind == Kind::IntList ? Kind::Int : Kind::Float;
        out.push_back(coerce(e, ef, w + "[]"));
      }
      return {out};
    }
    case Kind::FloatMatrix: {
      if (!v.is_array()) throw ConfigError(w + ": expected an array of arrays");
      toml::Array out;
      Field ef = f;
      ef.kind = Kind::FloatList;
      for (const auto& e : std::get<toml::Array>(v.v)) out.push_back(coerce(e, ef, w + "[]"));
      return {out};
    }
  }
  throw ConfigError(w + ": unsupported field kind");
}

}  // namespace detail

/// Validates against the schema and fills every default; unknown sections and keys are errors.
inline toml::Document materialize(const toml::Document& user) {
  const Schema& sc = schema();
  toml::Document out;
  for (const auto& [sec, tab] : user) {
    auto it = sc.find(sec);
    if (it == sc.end()) throw ConfigError("unknown section [" + sec + "]");
    for (const auto& [key, val] : tab) {
      auto f = it->second.find(key);
      if (f == it->second.end()) throw ConfigError("unknown key '" + detail::where(sec, key) + "'");
      out[sec][key] = detail::coerce(val, f->second, detail::where(sec, key));
    }
  }
  for (const auto& [sec, fields] : sc)
    for (const auto& [key, f] : fields)
      if (!out[sec].count(key)) out[sec][key] = detail::coerce(f.def, f, detail::where(sec, key));
  return out;
}

/// Typed, read-only view of a materialized document.
class View {
 public:
  explicit View(toml::Document d) : d_(std::move(d)) {}
  const toml::Document& doc() const { return d_; }

  const toml::Value& raw(const std::string& s, const std::string& k) const {
    auto a = d_.find(s);
    if (a == d_.end() || !a->second.count(k)) throw ConfigError("missing " + detail::where(s, k));
    return a->second.at(k);
  }
  double num(const std::string& s, const std::string& k) const { return detail::as_double(raw(s, k), k); }
  std::int64_t integer(const std::string& s, const std::string& k) const {
    return std::get<std::int64_t>(raw(s, k).v);
  }
  bool flag(const std::string& s, const std::string& k) const { return std::get<bool>(raw(s, k).v); }
  const std::string& str(const std::string& s, const std::string& k) const {
    return std::get<std::string>(raw(s, k).v);
  }
  std::vector<double> nums(const std::string& s, const std::string& k) const {
    std::vector<double> out;
    for (const auto& e : std::get<toml::Array>(raw(s, k).v)) out.push_back(detail::as_double(e, k));
    return out;
  }
  std::vector<std::int64_t> ints(const std::string& s, const std::string& k) const {
    std::vector<std::int64_t> out;
    for (const auto& e : std::get<toml::Array>(raw(s, k).v)) out.push_back(std::get<std::int64_t>(e.v));
    return out;
  }
  std::vector<std::vector<double>> matrix(const std::string& s, const std::string& k) const {
    std::vector<std::vector<double>> out;
    for (const auto& row : std::get<toml::Array>(raw(s, k).v)) {
      out.emplace_back();
      for (const auto& e : std::get<toml::Array>(row.v)) out.back().push_back(detail::as_double(e, k));
    }
    return out;
  }

 private:
  toml::Document d_;
};

inline nlohmann::json value_to_json(const toml::Value& v) {
  if (v.is_bool()) return std::get<bool>(v.v);
  if (v.is_int()) return std::get<std::int64_t>(v.v);
  if (v.is_float()) {
    const double d = std::get<double>(v.v);
    if (std::isinf(d)) return d < 0 ? "-inf" : "inf";
    return d;
  }
  if (v.is_string()) return std::get<std::string>(v.v);
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : std::get<toml::Array>(v.v)) a.push_back(value_to_json(e));
  return a;
}

inline toml::Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return {j.get<bool>()};
  if (j.is_number_integer()) return {j.get<std::int64_t>()};
  if (j.is_number_float()) return {j.get<double>()};
  if (j.is_string()) return {j.get<std::string>()};
  if (j.is_array()) {
    toml::Array a;
    for (const auto& e : j) a.push_back(value_from_json(e));
    return {a};
  }
  throw ConfigError("unsupported JSON value in configuration");
}

inline nlohmann::json to_json(const toml::Document& d) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [sec, tab] : d) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : tab) t[k] = value_to_json(v);
    j[sec.empty() ? "top" : sec] = t;
  }
  return j;
}

/// Inverse of to_json followed by materialize, so defaults and types are restored.
inline toml::Document from_json(const nlohmann::json& j) {
  toml::Document d;
  for (const auto& [sec, t] : j.items())
    for (const auto& [k, v] : t.items()) d[sec == "top" ? "" : sec][k] = value_from_json(v);
  return materialize(d);
}

inline void set_override(toml::Document& d, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' must look like section.key=value");
  const std::string path = assignment.substr(0, eq);
  const auto dot = path.find('.');
  const std::string sec = dot == std::string::npos ? "" : path.substr(0, dot);
  const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
  const std::string value = assignment.substr(eq + 1);
  toml::Document parsed;
  try {
    parsed = toml::parse_string(key + " = " + value);
  } catch (const toml::ParseError&) {
    // A bare word such as `model.p=uniform` is taken as a string.
    const bool bare = !value.empty() && value.find_first_of("\"'[]\\#\n") == std::string::npos;
    if (!bare) throw;
    parsed = toml::parse_string(key + " = \"" + value + "\"");
  }
  d[sec][key] = parsed.at("").at(key);
}

// ---- Model builders ----

namespace detail {

inline std::pair<std::string, double> preset_arg(const std::string& s) {
  const auto c = s.find(':');
  if (c == std::string::npos) return {s, std::numeric_limits<double>::quiet_NaN()};
  try {
    return {s.substr(0, c), std::stod(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw ConfigError("preset '" + s + "': argument is not a number");
  }
}

inline int int_arg(double a, const std::string& what) {
  if (!(a >= 1.0) || a != std::floor(a)) throw ConfigError(what + ": needs a positive integer argument");
  return static_cast<int>(a);
}

}  // namespace detail

inline BirthFunction birth_from(const View& v, const std::string& sec) {
  const auto [name, a] = detail::preset_arg(v.str(sec, "birth"));
  if (name == "one") return BirthFunction::constant(1.0);
  if (name == "const") {
    if (!(a >= 0.0)) throw ConfigError(sec + ".birth: const:c needs c >= 0");
    return BirthFunction::constant(a);
  }
  if (name == "indicator") return BirthFunction::indicator_positive();
  if (name == "identity") return BirthFunction::identity();
  if (name == "power") return BirthFunction::power(detail::int_arg(a, sec + ".birth power"));
  if (name == "raw") {
    try {
      return BirthFunction(PiecewisePoly(v.nums(sec, "birth_breaks"), v.matrix(sec, "birth_coeffs")));
    } catch (const std::exception& e) {
      throw ConfigError(sec + ".birth raw: " + e.what());
    }
  }
  throw ConfigError(sec + ".birth: unknown preset '" + name +
                    "' (expected one, const:c, indicator, identity, power:m, raw)");
}

inline KillMeasure kill_from(const View& v, const std::string& sec) {
  const auto [name, a] = detail::preset_arg(v.str(sec, "kill"));
  if (name == "bbm") return KillMeasure::minus_inf();
  if (name == "nbbm") return KillMeasure::point_mass(0.0);
  if (name == "uniform") return KillMeasure::uniform();
  if (name == "mixed") {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError(sec + ".kill: mixed:m needs m in [0, 1]");
    return KillMeasure::mixed_uniform(a);
  }
  if (name == "dk") return KillMeasure::dk(detail::int_arg(a, sec + ".kill dk"));
  if (name == "power") return KillMeasure::power(detail::int_arg(a, sec + ".kill power"));
  if (name == "point") {
    if (!(a >= 0.0 && a < 1.0)) throw ConfigError(sec + ".kill: point:x needs x in [0, 1)");
    return KillMeasure::point_mass(a);
  }
  if (name == "raw" || name == "bernstein") {
    std::vector<KillMeasure::Atom> atoms;
    for (const auto& row : v.matrix(sec, "kill_atoms")) {
      if (row.size() != 2) throw ConfigError(sec + ".kill_atoms: rows must be [x, mass]");
      atoms.push_back({row[0], row[1]});
    }
    std::optional<PiecewisePoly> dens;
    const auto breaks = v.nums(sec, "kill_breaks");
    const auto coeffs = v.matrix(sec, "kill_density");
    if (!breaks.empty() || !coeffs.empty()) {
      try {
        dens = PiecewisePoly(breaks, coeffs);
      } catch (const std::exception& e) {
        throw ConfigError(sec + ".kill_density: " + e.what());
      }
    }
    try {
      return KillMeasure(v.num(sec, "kill_minus_inf"), atoms, dens);
    } catch (const std::exception& e) {
      throw ConfigError(sec + ".kill raw: " + e.what());
    }
  }
  throw ConfigError(sec + ".kill: unknown preset '" + name +
                    "' (expected bbm, nbbm, uniform, mixed:m, dk:k, power:m, point:x, bernstein, raw)");
}

inline BDSpec bd_from(const View& v, const std::string& sec) {
  if (v.str(sec, "type") != "bd") throw ConfigError(sec + ".type must be \"bd\" for this task");
  return {birth_from(v, sec), KillSchedule(kill_from(v, sec))};
}

inline NPSpec np_from(const View& v, const std::string& sec) {
  if (v.str(sec, "type") != "np") throw ConfigError(sec + ".type must be \"np\" for this task");
  const auto k = static_cast<std::size_t>(v.integer(sec, "k"));
  const double lambda = v.num(sec, "lambda");
  const std::string& p = v.str(sec, "p");
  NPSpec s;
  if (p == "top")
    s = NPSpec::top(k, lambda);
  else if (p == "extremes")
    s = NPSpec::extremes(k, lambda);
  else if (p == "min-to-uniform")
    s = NPSpec::min_to_uniform(k, lambda);
  else if (p == "uniform")
    s = NPSpec::uniform(k, lambda);
  else {
    s.lambda = lambda;
    s.k = k;
    s.p.clear();
    for (const auto& row : v.matrix(sec, "p_raw")) {
      if (row.size() != 3 || row[0] != std::floor(row[0]) || row[1] != std::floor(row[1]) || row[0] < 1 ||
          row[1] < 1)
        throw ConfigError(sec + ".p_raw: rows must be [i, j, probability] with integer 1 <= i < j <= k");
      s.p.push_back({static_cast<std::size_t>(row[0]), static_cast<std::size_t>(row[1]), row[2]});
    }
  }
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ConfigError(sec + ": " + e.what());
  }
  return s;
}

}  // namespace config
}  // namespace bdbbm
