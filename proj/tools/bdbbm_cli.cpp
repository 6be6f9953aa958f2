// SPDX-License-Identifier: Apache-2.0
// Command-line front end: one subcommand per task, plus `run` (task taken from the config) and `plot-data`.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdbbm/io/runner.hpp"

namespace fs = std::filesystem;
using namespace bdbbm;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  bool force = false;
  std::vector<std::string> set;
  std::string log;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("-c,--config", a.config, "TOML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "master seed (overrides the configuration)");
  cmd->add_option("--threads", a.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", a.out, "output directory");
  cmd->add_flag("--force", a.force, "overwrite an existing output directory");
  cmd->add_option("--set", a.set, "override one setting, e.g. --set pde.boundary_tol=1e-10");
}

fs::path output_dir(const CommonArgs& a, const config::View& v, const Manifest& m) {
  if (!a.out.empty()) return a.out;
  const char* root = std::getenv("BDBBM_OUT_ROOT");
  const fs::path base = root && *root ? fs::path(root) : fs::path("bdbbm-out");
  return base / (v.str("", "task") + "-" + m.config_sha256().substr(0, 12));
}

int run_task(const CommonArgs& a, std::optional<std::string> task) {
  runner::Request req;
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    req.user = toml::parse(f);
  }
  req.task = std::move(task);
  req.seed = a.seed;
  req.threads = a.threads;
  req.overrides = a.set;
  if (!a.log.empty()) req.overrides.push_back("clans.log=\"" + a.log + "\"");
  const config::View v = runner::prepare(req);
  const runner::Artifacts art = runner::execute(v);
  const Manifest m = runner::make_manifest(v, art);
  const fs::path dir = output_dir(a, v, m);
  runner::write_all(dir, art, m, a.force);
  std::cout << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-based branching particle systems: simulation, coupling, PDE limits and studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BDBBM_VERSION);

  static const std::vector<std::pair<std::string, std::string>> tasks = {
      {"simulate-bd", "simulate the variable-population (b, D) model"},
      {"simulate-np", "simulate the fixed-population N-particle model"},
      {"couple", "run the monotone coupling of two (b, D) models and audit dominance"},
      {"solve", "solve the hydrodynamic PDE on a grid"},
      {"wave", "compute travelling waves and the minimal speed"},
      {"study", "run a convergence, velocity or chaos study"},
      {"clans", "compute clans from a stored per-index log or fresh marks"},
  };
  std::vector<CommonArgs> args(tasks.size() + 1);
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    cmds.push_back(app.add_subcommand(tasks[i].first, tasks[i].second));
    add_common(cmds.back(), args[i]);
    if (tasks[i].first == "clans") cmds.back()->add_option("--log", args[i].log, "event log file")->check(CLI::ExistingFile);
  }
  CLI::App* run = app.add_subcommand("run", "run the task named in the configuration");
  add_common(run, args.back());
  run->get_option("--config")->required();

  std::string plot_dir, plot_kind, plot_out;
  bool plot_force = false;
  CLI::App* plot = app.add_subcommand("plot-data", "emit a plot-ready CSV from an artifact directory");
  plot->add_option("dir", plot_dir, "artifact directory")->required()->check(CLI::ExistingDirectory);
  plot->add_option("-k,--kind", plot_kind, "front | velocity | scaling")
      ->required()
      ->check(CLI::IsMember({"front", "velocity", "scaling"}));
  plot->add_option("-o,--out", plot_out, "output file (default: <dir>/plot_<kind>.csv)");
  plot->add_flag("--force", plot_force, "overwrite an existing output file");

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (cmds[i]->parsed()) return run_task(args[i], tasks[i].first);
    if (run->parsed()) return run_task(args.back(), std::nullopt);
    if (plot->parsed()) {
      const std::string data = runner::plot_data(plot_dir, plot_kind);
      const fs::path out = plot_out.empty() ? fs::path(plot_dir) / ("plot_" + plot_kind + ".csv") : fs::path(plot_out);
      if (fs::exists(out) && !plot_force)
        throw std::runtime_error(out.string() + " already exists (use --force to overwrite)");
      std::ofstream f(out, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot write " + out.string());
      f << data;
      std::cout << out.string() << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const toml::ParseError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
