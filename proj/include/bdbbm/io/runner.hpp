// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "bdbbm/analysis/chaos.hpp"
#include "bdbbm/analysis/clan_stats.hpp"
#include "bdbbm/analysis/distance.hpp"
#include "bdbbm/analysis/stats.hpp"
#include "bdbbm/analysis/study.hpp"
#include "bdbbm/bd/simulator.hpp"
#include "bdbbm/coupling/coupled.hpp"
#include "bdbbm/io/config.hpp"
#include "bdbbm/io/csv.hpp"
#include "bdbbm/io/manifest.hpp"
#include "bdbbm/io/toml.hpp"
#include "bdbbm/np/clans.hpp"
#include "bdbbm/np/simulator.hpp"
#include "bdbbm/pde/solver.hpp"
#include "bdbbm/pde/source.hpp"
#include "bdbbm/pde/wave.hpp"

namespace bdbbm::runner {

/// Output file name to contents, in name order.
using Artifacts = std::map<std::string, std::string>;

struct Request {
  toml::Document user;                 ///< parsed configuration file (may be empty)
  std::optional<std::string> task;     ///< task fixed by the subcommand, if any
  std::optional<std::uint64_t> seed;   ///< overrides the configured seed
  std::optional<unsigned> threads;     ///< overrides the configured thread count
  std::vector<std::string> overrides;  ///< section.key=value assignments
};

// ---- initial conditions ----

struct InitialLaw {
  std::function<double(double)> cdf;
  std::function<double(double)> inverse;
};

inline InitialLaw initial_law(const std::string& name) {
  if (name == "zeros" || name == "heaviside")
    return {[](double x) { return x >= 0.0 ? 1.0 : 0.0; }, [](double) { return 0.0; }};
  if (name == "uniform")
    return {[](double x) { return std::clamp(x, 0.0, 1.0); }, [](double p) { return p; }};
  if (name == "normal") {
    return {[](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); },
            [](double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }};
  }
  if (name == "one") return {[](double) { return 1.0; }, nullptr};
  if (name == "zero") return {[](double) { return 0.0; }, nullptr};
  throw ConfigError("unknown initial law '" + name + "'");
}

inline ParticleConfig initial_config(const std::string& name, std::size_t n) {
  return quantile_init(initial_law(name).inverse, n);
}

// ---- validation ----

namespace detail {

inline void need(bool ok, const std::string& constraint) {
  if (!ok) throw ConfigError("constraint violated: " + constraint);
}

inline std::vector<double> observation_grid(double horizon, double dt) {
  std::vector<double> obs;
  if (dt > 0.0)
    for (std::size_t i = 1;; ++i) {
      const double t = static_cast<double>(i) * dt;
      if (t >= horizon - 1e-12) break;
      obs.push_back(t);
    }
  obs.push_back(horizon);
  return obs;
}

inline SourceSpec model_source(const config::View& v) {
  if (v.str("pde", "source") == "fkpp") return SourceSpec::fkpp(v.num("pde", "fkpp_a"));
  if (v.str("model", "type") == "np") return source_hp(config::np_from(v, "model"));
  const BDSpec s = config::bd_from(v, "model");
  if (!s.d.is_constant()) throw ConfigError("model: the tail source needs a constant kill measure");
  return tail_source(s.b, s.d.at(1));
}

inline GridParams grid_from(const config::View& v) {
  GridParams g;
  g.x_min = v.num("pde", "x_min");
  g.x_max = v.num("pde", "x_max");
  g.dx = v.num("pde", "dx");
  g.dt = v.num("pde", "dt");
  g.boundary_tol = v.num("pde", "boundary_tol");
  return g;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 1) return {a};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace detail

/// Materializes defaults, applies overrides and checks every cross-field constraint of the task.
inline config::View prepare(const Request& req) {
  toml::Document doc = req.user;
  for (const auto& o : req.overrides) config::set_override(doc, o);
  if (!req.task && !doc[""].count("task")) throw ConfigError("task: missing; the configuration must name one");
  if (req.task) {
    auto it = doc[""].find("task");
    if (it != doc[""].end() && it->second != toml::Value{*req.task})
      throw ConfigError("task: configuration says '" + std::get<std::string>(it->second.v) +
                        "' but the command is '" + *req.task + "'");
    doc[""]["task"] = toml::Value{*req.task};
  }
  if (req.seed) {
    if (*req.seed > static_cast<std::uint64_t>(INT64_MAX)) throw ConfigError("seed: must be < 2^63");
    doc[""]["seed"] = toml::Value{static_cast<std::int64_t>(*req.seed)};
  }
  if (req.threads) doc[""]["threads"] = toml::Value{static_cast<std::int64_t>(*req.threads)};
  config::View v(config::materialize(doc));

  const std::string& task = v.str("", "task");
  const auto n = static_cast<std::size_t>(v.integer("run", "n"));
  const auto k = static_cast<std::size_t>(v.integer("model", "k"));
  using detail::need;
  if (task == "simulate-np" || task == "clans") {
    config::np_from(v, "model");
    need(k <= n, "model.k <= run.n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  if (task == "simulate-bd") config::bd_from(v, "model");
  if (task == "simulate-bd" || task == "simulate-np")
  {
    need(v.num("run", "obs_dt") <= v.num("run", "horizon"), "run.obs_dt <= run.horizon");
    const auto obs = v.nums("run", "observation_times");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      need(obs[i] <= v.num("run", "horizon"), "run.observation_times <= run.horizon");
      need(i == 0 || obs[i] > obs[i - 1], "run.observation_times strictly increasing");
    }
  }
  if (task == "couple") {
    const BDSpec lo = config::bd_from(v, "model");
    const BDSpec up = config::bd_from(v, "upper");
    if (auto e = check_coupling_hypotheses(lo, up)) throw ConfigError("coupling hypotheses: " + *e);
    const std::string ui = v.str("run", "upper_init") == "same" ? v.str("run", "init") : v.str("run", "upper_init");
    need(dominates(initial_config(v.str("run", "init"), n), initial_config(ui, n)),
         "run.init must be dominated by run.upper_init");
  }
  if (task == "solve" || task == "wave" || (task == "study" && v.str("study", "kind") == "hydro")) {
    detail::model_source(v);
    need(v.num("pde", "x_min") < v.num("pde", "x_max"), "pde.x_min < pde.x_max");
  }
  if (task == "solve")
    for (double t : v.nums("pde", "store_times"))
      need(t <= v.num("pde", "horizon"), "pde.store_times <= pde.horizon");
  if (task == "study") {
    config::np_from(v, "model");
    const auto ns = v.ints("study", "ns");
    need(!ns.empty(), "study.ns is not empty");
    for (auto m : ns) need(k <= static_cast<std::size_t>(m), "model.k <= every study.ns (k=" + std::to_string(k) + ")");
    const std::string& kind = v.str("study", "kind");
    if (kind == "velocity") {
      const double dt = v.num("study", "obs_dt"), horizon = v.num("study", "horizon");
      need(dt > 0.0 && dt < horizon, "study.obs_dt < study.horizon");
      const double start = dt + v.num("study", "burn_in") * (horizon - dt);
      const auto points = static_cast<std::size_t>(std::floor((horizon - start) / dt + 1e-9)) + 1;
      need(points >= 10, "at least 10 observations after burn-in: (1 - study.burn_in) * study.horizon / study.obs_dt "
                         "(got " + std::to_string(points) + ")");
    }
    if (kind == "chaos") {
      need(v.integer("study", "replicas") >= v.integer("study", "ell"), "study.replicas >= study.ell");
      need(v.num("study", "grid_min") <= v.num("study", "grid_max"), "study.grid_min <= study.grid_max");
    }
  }
  if (task == "clans") {
    for (auto r : v.ints("clans", "roots"))
      if (v.str("clans", "log").empty())
        need(static_cast<std::size_t>(r) <= n, "clans.roots <= run.n");
  }
  return v;
}

// ---- tasks ----

namespace detail {

inline void snapshot_rows(csv::Writer& w, const std::string& lead, const Snapshot& s) {
  const auto slots = sorted_slots(s.config);
  for (std::size_t q = 0; q < slots.size(); ++q)
    w.row({lead, csv::num(s.t), std::to_string(q + 1), std::to_string(s.config.label(slots[q])),
           csv::num(s.config.position(slots[q]))});
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline Artifacts simulate(const config::View& v, bool np) {
  const auto n = static_cast<std::size_t>(v.integer("run", "n"));
  const auto replicas = static_cast<std::size_t>(v.integer("run", "replicas"));
  const auto seed = static_cast<std::uint64_t>(v.integer("", "seed"));
  const auto threads = static_cast<unsigned>(v.integer("", "threads"));
  RunOptions o;
  o.horizon = v.num("run", "horizon");
  o.observation_times = v.nums("run", "observation_times");
  if (o.observation_times.empty()) o.observation_times = observation_grid(o.horizon, v.num("run", "obs_dt"));
  o.seed = seed;
  o.record_log = v.flag("run", "record_log");
  o.population_cap = static_cast<std::size_t>(v.integer("run", "population_cap"));
  o.allow_fast_path = v.flag("run", "fast_path");
  const ParticleConfig c0 = initial_config(v.str("run", "init"), n);
  std::vector<RunResult> runs;
  if (np) {
    const NPSpec spec = config::np_from(v, "model");
    const bool per_index = v.str("run", "construction") == "per-index";
    runs = parallel_replicas(replicas, threads, [&](std::size_t r) {
      RunOptions oo = o;
      oo.replica = r;
      return per_index ? per_index_simulate(spec, c0, oo) : simulate_np(spec, c0, oo);
    });
  } else {
    const BDSpec spec = config::bd_from(v, "model");
    runs = parallel_replicas(replicas, threads, [&](std::size_t r) {
      RunOptions oo = o;
      oo.replica = r;
      return simulate_bd(spec, c0, oo);
    });
  }
  Artifacts out;
  csv::Writer snaps({"replica", "t", "quantile", "label", "x"});
  csv::Writer series({"replica", "t", "max", "population", "mean"});
  nlohmann::json sum = {{"task", v.str("", "task")}, {"replicas", replicas}, {"runs", nlohmann::json::array()}};
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& s : runs[r].snapshots) snapshot_rows(snaps, std::to_string(r), s);
    for (const auto& p : runs[r].series)
      series.row({std::to_string(r), csv::num(p.t), csv::num(p.max), std::to_string(p.population), csv::num(p.mean)});
    if (o.record_log) {
      std::ostringstream os;
      runs[r].log.write(os);
      out["log_" + std::to_string(r) + ".txt"] = os.str();
    }
    const auto& last = runs[r].series.back();
    sum["runs"].push_back({{"replica", r},
                           {"events", runs[r].events},
                           {"final_population", last.population},
                           {"final_max", csv::num(last.max)},
                           {"final_mean", csv::num(last.mean)}});
  }
  out["snapshots.csv"] = snaps.str();
  out["series.csv"] = series.str();
  out["summary.json"] = dump(sum);
  return out;
}

inline Artifacts couple(const config::View& v) {
  const BDSpec lo = config::bd_from(v, "model");
  const BDSpec up = config::bd_from(v, "upper");
  const auto n = static_cast<std::size_t>(v.integer("run", "n"));
  const std::string ui = v.str("run", "upper_init") == "same" ? v.str("run", "init") : v.str("run", "upper_init");
  const ParticleConfig a = initial_config(v.str("run", "init"), n);
  const ParticleConfig b = initial_config(ui, n);
  const auto replicas = static_cast<std::size_t>(v.integer("run", "replicas"));
  const auto res = parallel_replicas(replicas, static_cast<unsigned>(v.integer("", "threads")), [&](std::size_t r) {
    CoupleOptions o;
    o.horizon = v.num("run", "horizon");
    o.max_events = static_cast<std::size_t>(v.integer("run", "max_events"));
    o.seed = static_cast<std::uint64_t>(v.integer("", "seed"));
    o.replica = r;
    o.population_cap = static_cast<std::size_t>(v.integer("run", "population_cap"));
    return coupled_simulate(lo, up, a, b, o);
  });
  csv::Writer audit({"replica", "event", "t", "n", "n_prime", "shared", "violation", "kill_ok"});
  std::size_t events = 0, shared = 0, viol = 0, kviol = 0;
  for (std::size_t r = 0; r < res.size(); ++r) {
    for (std::size_t e = 0; e < res[r].audit.size(); ++e) {
      const auto& x = res[r].audit[e];
      audit.row({std::to_string(r), std::to_string(e + 1), csv::num(x.t), std::to_string(x.n), std::to_string(x.n_prime),
                 x.shared ? "1" : "0", x.violation ? std::to_string(*x.violation) : "ok",
                 x.kill_coupling_ok ? "1" : "0"});
    }
    events += res[r].events;
    shared += res[r].shared_events;
    viol += res[r].violations;
    kviol += res[r].kill_violations;
  }
  return {{"audit.csv", audit.str()},
          {"summary.json", dump({{"task", "couple"},
                                 {"replicas", replicas},
                                 {"events", events},
                                 {"shared_events", shared},
                                 {"violations", viol},
                                 {"kill_violations", kviol},
                                 {"dominance_held", viol == 0}})}};
}

inline Artifacts solve(const config::View& v) {
  GridParams g = grid_from(v);
  const double T = v.num("pde", "horizon");
  g.store_times = v.nums("pde", "store_times");
  if (g.store_times.empty()) g.store_times = {T};
  std::sort(g.store_times.begin(), g.store_times.end());
  g.store_times.erase(std::unique(g.store_times.begin(), g.store_times.end()), g.store_times.end());
  const double f = v.num("pde", "forcing");
  const Forcing forcing = f == 0.0 ? Forcing{} : Forcing([f](double, double) { return f; });
  const ScalarField field = solve_fkpp(model_source(v), initial_law(v.str("pde", "initial")).cdf, g, T, forcing);
  csv::Writer med({"t", "median"});
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t s = 0; s < field.times.size(); ++s) {
    ScalarField one = field;
    one.times = {field.times[s]};
    one.values = {field.values[s]};
    double m = std::numeric_limits<double>::quiet_NaN();
    try {
      m = median_track(one).front();
    } catch (const std::domain_error&) {
    }
    med.row({csv::num(field.times[s]), csv::num(m)});
    rows.push_back({{"t", field.times[s]}, {"median", csv::num(m)}});
  }
  return {{"field.csv", csv::field(field)},
          {"medians.csv", med.str()},
          {"summary.json", dump({{"task", "solve"}, {"dt", field.dt}, {"dx", field.dx}, {"medians", rows}})}};
}

inline Artifacts wave(const config::View& v) {
  const SourceSpec h = model_source(v);
  WaveOptions wo;
  wo.step = v.num("wave", "step");
  wo.delta = v.num("wave", "delta");
  Artifacts out;
  nlohmann::json fronts = nlohmann::json::array();
  const auto speeds = v.nums("wave", "speeds");
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    const auto p = wavefront(h, speeds[i], wo);
    nlohmann::json e = {{"c", speeds[i]}, {"admissible", p.has_value()}};
    if (p) {
      const std::string name = "wave_" + std::to_string(i) + ".csv";
      out[name] = csv::wave(*p, static_cast<std::size_t>(v.integer("wave", "stride")));
      e["file"] = name;
      e["integral"] = p->integral;
      e["residual"] = p->residual;
    }
    fronts.push_back(e);
  }
  nlohmann::json sum = {{"task", "wave"}, {"fronts", fronts}};
  if (v.flag("wave", "minimal")) {
    MinimalSpeedOptions mo;
    mo.tol = v.num("wave", "bisection_tol");
    mo.cross_check = v.flag("wave", "cross_check");
    mo.track_horizon = v.num("wave", "track_horizon");
    mo.track_dx = v.num("wave", "track_dx");
    mo.wave = wo;
    const auto r = minimal_speed_report(h, mo);
    sum["minimal_speed"] = {{"c_star", r.c_star},         {"linear_bound", r.linear_bound},
                            {"upper_bound", r.upper_bound}, {"pulled", r.pulled},
                            {"bisections", r.bisections},   {"tracked", csv::num(r.tracked)}};
  }
  out["summary.json"] = dump(sum);
  return out;
}

inline Artifacts study(const config::View& v) {
  const NPSpec spec = config::np_from(v, "model");
  std::vector<std::size_t> ns;
  for (auto m : v.ints("study", "ns")) ns.push_back(static_cast<std::size_t>(m));
  const auto seed = static_cast<std::uint64_t>(v.integer("", "seed"));
  const auto threads = static_cast<unsigned>(v.integer("", "threads"));
  const auto replicas = static_cast<std::size_t>(v.integer("study", "replicas"));
  const std::string& kind = v.str("study", "kind");
  const InitialLaw law = initial_law(v.str("run", "init"));
  Artifacts out;
  nlohmann::json sum = {{"task", "study"}, {"kind", kind}};
  if (kind == "chaos") {
    const auto grid = linspace(v.num("study", "grid_min"), v.num("study", "grid_max"),
                               static_cast<std::size_t>(v.integer("study", "grid_points")));
    const auto rep = chaos_gap(
        spec, [&](std::size_t n) { return quantile_init(law.inverse, n); }, v.num("study", "t"),
        static_cast<int>(v.integer("study", "ell")), ns, replicas, seed, grid, threads);
    csv::Writer w({"n", "gap", "se", "x", "mean_f"});
    for (std::size_t i = 0; i < ns.size(); ++i)
      w.row({std::to_string(ns[i]), csv::num(rep.gaps[i].gap), csv::num(rep.gaps[i].se), csv::num(rep.gaps[i].x),
             csv::num(rep.gaps[i].mean_f)});
    out["chaos.csv"] = w.str();
    sum["slope"] = rep.slope;
    sum["slope_se"] = rep.slope_se;
    out["summary.json"] = dump(sum);
    return out;
  }
  StudyConfig cfg;
  cfg.kind = kind;
  cfg.spec = spec;
  cfg.ns = ns;
  cfg.replicas = replicas;
  cfg.seed = seed;
  cfg.t = v.num("study", "t");
  cfg.horizon = v.num("study", "horizon");
  cfg.obs_dt = v.num("study", "obs_dt");
  cfg.burn_in = v.num("study", "burn_in");
  cfg.grid = grid_from(v);
  cfg.u0 = law.cdf;
  cfg.u0_inverse = law.inverse;
  cfg.threads = threads;
  const StudyReport rep = convergence_study(cfg);
  csv::Writer table({"n", "estimate", "se", "replicas"});
  csv::Writer values({"n", "replica", kind == "hydro" ? "sup_distance" : "slope"});
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    table.row({std::to_string(r.n), csv::num(r.estimate), csv::num(r.se), std::to_string(r.replicas)});
    for (std::size_t i = 0; i < r.values.size(); ++i)
      values.row({std::to_string(r.n), std::to_string(i), csv::num(r.values[i])});
    rows.push_back({{"n", r.n}, {"estimate", r.estimate}, {"se", r.se}});
  }
  out["table.csv"] = table.str();
  out[kind == "hydro" ? "distances.csv" : "velocity.csv"] = values.str();
  sum["rows"] = rows;
  sum["trend"] = rep.trend ? nlohmann::json(*rep.trend) : nlohmann::json(nullptr);
  if (kind == "hydro") {
    out["field.csv"] = csv::field(*rep.field);
    // Replica 0 of each N, re-simulated from the same stream as in the study.
    csv::Writer snaps({"n", "t", "quantile", "label", "x"});
    for (std::size_t n : ns) {
      RunOptions o;
      o.horizon = cfg.t;
      o.observation_times = {cfg.t};
      o.seed = seed;
      o.replica = bdbbm::detail::study_replica(n, 0);
      const auto res = simulate_np(spec, quantile_init(law.inverse, n), o);
      snapshot_rows(snaps, std::to_string(n), res.snapshots.back());
    }
    out["snapshots.csv"] = snaps.str();
  }
  out["summary.json"] = dump(sum);
  return out;
}

inline Artifacts clans(const config::View& v) {
  const double t = v.num("clans", "t");
  const bool forward = v.str("clans", "mode") == "forward";
  std::vector<RingRec> marks;
  std::size_t n = 0;
  nlohmann::json sum = {{"task", "clans"}, {"mode", v.str("clans", "mode")}, {"t", t}};
  const std::string& path = v.str("clans", "log");
  if (!path.empty()) {
    const std::string bytes = read_file_bytes(path);
    std::istringstream is(bytes);
    const EventLog log = EventLog::read(is);
    marks = log.collect<RingRec>();
    n = log.initial.size();
    if (marks.empty() && !log.records.empty())
      throw ConfigError("clans.log: the log holds no per-index ring records");
    sum["log_sha256"] = sha256_hex(bytes);
  } else {
    const NPSpec spec = config::np_from(v, "model");
    n = static_cast<std::size_t>(v.integer("run", "n"));
    Rng rng(static_cast<std::uint64_t>(v.integer("", "seed")), 0, kClanStreamTag);
    marks = generate_ring_marks(spec, n, t, rng);
  }
  std::vector<ClanState> sets;
  csv::Writer w({"root", "t", "size", "members"});
  for (auto r : v.ints("clans", "roots")) {
    const auto root = static_cast<std::size_t>(r);
    if (root > n) throw ConfigError("constraint violated: clans.roots <= population of the log");
    sets.push_back(forward ? forward_clan(marks, root, t) : ancestor_set(marks, root, t));
    std::string members;
    for (auto m : sets.back()) members += (members.empty() ? "" : " ") + std::to_string(m);
    w.row({std::to_string(root), csv::num(t), std::to_string(sets.back().size()), members});
  }
  nlohmann::json inter = nlohmann::json::array();
  const auto roots = v.ints("clans", "roots");
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j)
      inter.push_back({{"roots", {roots[i], roots[j]}}, {"intersect", clans_intersect(sets[i], sets[j])}});
  sum["n"] = n;
  sum["marks"] = marks.size();
  sum["intersections"] = inter;
  return {{"clans.csv", w.str()}, {"summary.json", dump(sum)}};
}

}  // namespace detail

/// Runs the task in memory; nothing touches the file system except reading a clan log.
inline Artifacts execute(const config::View& v) {
  const std::string& task = v.str("", "task");
  if (task == "simulate-bd") return detail::simulate(v, false);
  if (task == "simulate-np") return detail::simulate(v, true);
  if (task == "couple") return detail::couple(v);
  if (task == "solve") return detail::solve(v);
  if (task == "wave") return detail::wave(v);
  if (task == "study") return detail::study(v);
  if (task == "clans") return detail::clans(v);
  throw ConfigError("unknown task '" + task + "'");
}

inline Manifest make_manifest(const config::View& v, const Artifacts& a) {
  Manifest m;
  m.config = config::to_json(v.doc());
  m.seed = static_cast<std::uint64_t>(v.integer("", "seed"));
  for (const auto& [name, data] : a) m.artifacts[name] = sha256_hex(data);
  return m;
}

/// Refuses a non-empty directory unless `force`; then writes every artifact and manifest.json.
inline void write_all(const std::filesystem::path& dir, const Artifacts& a, const Manifest& m, bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(dir) && !fs::is_directory(dir)) throw std::runtime_error(dir.string() + " exists and is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir) && !force)
    throw std::runtime_error("output directory " + dir.string() + " already exists (use --force to overwrite)");
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& data) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << data;
  };
  for (const auto& [name, data] : a) put(name, data);
  put("manifest.json", m.to_json().dump(2) + "\n");
}

/// Reads manifest.json from an artifact directory and rebuilds the effective configuration.
inline config::View load_manifest(const std::filesystem::path& dir) {
  const auto m = Manifest::from_json(nlohmann::json::parse(read_file_bytes(dir / "manifest.json")));
  return config::View(config::from_json(m.config));
}

// ---- plot data ----

/// Plot-ready CSV from an artifact directory. Kinds: front, velocity, scaling.
inline std::string plot_data(const std::filesystem::path& dir, const std::string& kind) {
  auto table = [&](const std::string& name) {
    const auto p = dir / name;
    if (!std::filesystem::exists(p))
      throw std::runtime_error("plot-data " + kind + ": missing artifact " + p.string());
    return csv::read_file(p.string());
  };
  if (kind == "front") {
    const auto field = table("field.csv");
    const auto snaps = table("snapshots.csv");
    // Largest population among the snapshot groups, last snapshot time.
    const std::size_t lead = 0, tcol = snaps.column("t"), xcol = snaps.column("x");
    std::string best;
    std::size_t best_n = 0;
    double best_t = -1.0;
    std::map<std::string, std::size_t> sizes;
    for (const auto& r : snaps.rows) ++sizes[r[lead] + "@" + r[tcol]];
    for (const auto& [key, sz] : sizes) {
      const double t = csv::parse_num(key.substr(key.find('@') + 1));
      if (sz > best_n || (sz == best_n && t > best_t)) {
        best_n = sz;
        best_t = t;
        best = key;
      }
    }
    std::vector<double> xs;
    for (const auto& r : snaps.rows)
      if (r[lead] + "@" + r[tcol] == best) xs.push_back(csv::parse_num(r[xcol]));
    const ParticleConfig c = ParticleConfig::from_positions(xs);
    csv::Writer w({"t", "x", "U", "F_N"});
    const std::size_t ft = field.column("t"), fx = field.column("x"), fv = field.column("value");
    bool any = false;
    for (const auto& r : field.rows) {
      if (csv::parse_num(r[ft]) != best_t) continue;
      any = true;
      const double x = csv::parse_num(r[fx]);
      w.row({r[ft], r[fx], r[fv], csv::num(empirical_cdf(c, x))});
    }
    if (!any) throw std::runtime_error("plot-data front: the field has no slice at the snapshot time");
    return w.str();
  }
  if (kind == "velocity") {
    const auto t = table("table.csv");
    csv::Writer w({"N", "w_hat", "se"});
    for (const auto& r : t.rows) w.row({r[t.column("n")], r[t.column("estimate")], r[t.column("se")]});
    return w.str();
  }
  if (kind == "scaling") {
    const auto t = table("chaos.csv");
    std::vector<double> lx, ly;
    for (const auto& r : t.rows) {
      lx.push_back(std::log(csv::parse_num(r[t.column("n")])));
      ly.push_back(std::log(csv::parse_num(r[t.column("gap")])));
    }
    std::optional<stats::OlsFit> fit;
    if (lx.size() >= 2) fit = stats::ols(lx, ly);
    csv::Writer w({"N", "gap", "se", "fit"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      const double f = fit ? std::exp(fit->intercept + fit->slope * lx[i]) : std::numeric_limits<double>::quiet_NaN();
      w.row({r[t.column("n")], r[t.column("gap")], r[t.column("se")], csv::num(f)});
    }
    return w.str();
  }
  throw std::invalid_argument("plot-data: unknown kind '" + kind + "' (expected front, velocity or scaling)");
}

}  // namespace bdbbm::runner
