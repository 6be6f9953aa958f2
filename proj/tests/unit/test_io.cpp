// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "bdbbm/io/config.hpp"
#include "bdbbm/io/csv.hpp"
#include "bdbbm/io/manifest.hpp"
#include "bdbbm/io/runner.hpp"
#include "bdbbm/io/toml.hpp"

using namespace bdbbm;
namespace fs = std::filesystem;

namespace {

toml::Document load(const std::string& name) {
  std::ifstream f(std::string(BDBBM_CONFIG_DIR) + "/" + name);
  REQUIRE(f);
  return toml::parse(f);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("bdbbm_test_" + tag + "_" + std::to_string(std::rand()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(BDBBM_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::map<std::string, std::string> artifact_hashes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = sha256_hex(read_file_bytes(e.path()));
  return out;
}

}  // namespace

TEST_CASE("TOML subset parsing", "[io][toml]") {
  const auto d = toml::parse_string(R"(
# comment
task = "solve"   # trailing comment
seed = 42
[pde]
dx = 1e-2
bound = -inf
flag = true
xs = [1, 2.5, -3]
rows = [[1, 2, 0.5], [2, 3, 0.5]]
name = "a \"quoted\" # not a comment"
)");
  CHECK(d.at("").at("task") == toml::Value{std::string("solve")});
  CHECK(d.at("").at("seed") == toml::Value{std::int64_t{42}});
  CHECK(std::get<double>(d.at("pde").at("dx").v) == 0.01);
  CHECK(std::get<double>(d.at("pde").at("bound").v) == -std::numeric_limits<double>::infinity());
  CHECK(d.at("pde").at("flag") == toml::Value{true});
  CHECK(std::get<toml::Array>(d.at("pde").at("xs").v).size() == 3);
  CHECK(std::get<toml::Array>(d.at("pde").at("rows").v).size() == 2);
  CHECK(std::get<std::string>(d.at("pde").at("name").v) == "a \"quoted\" # not a comment");
  CHECK_THROWS_AS(toml::parse_string("x = 1\nx = 2"), toml::ParseError);
  CHECK_THROWS_AS(toml::parse_string("[a]\n[a]"), toml::ParseError);
  CHECK_THROWS_AS(toml::parse_string("x = [1, 2"), toml::ParseError);
  CHECK_THROWS_AS(toml::parse_string("just text"), toml::ParseError);
  CHECK_THAT(error_of([] { toml::parse_string("a = 1\nb = \"open"); }), Catch::Matchers::StartsWith("line 2"));
}

TEST_CASE("schema materializes defaults and rejects bad input", "[io][config]") {
  auto user = toml::parse_string("task = \"solve\"\n");
  const auto doc = config::materialize(user);
  const config::View v(doc);
  CHECK(v.integer("", "seed") == 0);
  CHECK(v.num("model", "lambda") == 0.5);
  CHECK(v.str("pde", "initial") == "heaviside");
  CHECK(v.num("pde", "dx") == 0.01);
  // Materializing twice is idempotent.
  CHECK(config::materialize(doc) == doc);

  CHECK_THAT(error_of([] { config::materialize(toml::parse_string("task = \"solve\"\n[pde]\ndxx = 1")); }),
             Catch::Matchers::ContainsSubstring("pde.dxx"));
  CHECK_THAT(error_of([] { config::materialize(toml::parse_string("task = \"solve\"\n[nope]\na = 1")); }),
             Catch::Matchers::ContainsSubstring("nope"));
  CHECK_THAT(error_of([] { config::materialize(toml::parse_string("task = \"solve\"\n[model]\nk = 1")); }),
             Catch::Matchers::ContainsSubstring("model.k"));
  CHECK_THAT(error_of([] { config::materialize(toml::parse_string("task = \"solve\"\n[run]\nn = \"ten\"")); }),
             Catch::Matchers::ContainsSubstring("run.n"));
  CHECK_THAT(error_of([] { config::materialize(toml::parse_string("task = \"fly\"")); }),
             Catch::Matchers::ContainsSubstring("task"));
  runner::Request no_task;
  no_task.user = toml::parse_string("seed = 3");
  CHECK_THAT(error_of([&] { runner::prepare(no_task); }), Catch::Matchers::ContainsSubstring("task"));
}

TEST_CASE("overrides and JSON round trip", "[io][config]") {
  auto user = load("solve.toml");
  config::set_override(user, "pde.dx=0.05");
  config::set_override(user, "seed=9");
  config::set_override(user, "model.kill_minus_inf=0.25");
  const auto doc = config::materialize(user);
  const config::View v(doc);
  CHECK(v.num("pde", "dx") == 0.05);
  CHECK(v.integer("", "seed") == 9);
  const auto back = config::from_json(nlohmann::json::parse(config::to_json(doc).dump()));
  CHECK(back == doc);
  CHECK_THROWS_AS(config::set_override(user, "no-equals-sign"), ConfigError);

  config::set_override(user, "model.kill=mixed:0.3");
  config::set_override(user, "pde.initial=\"normal\"");
  const config::View w(config::materialize(user));
  CHECK(w.str("model", "kill") == "mixed:0.3");
  CHECK(w.str("pde", "initial") == "normal");
  CHECK_THROWS_AS(config::set_override(user, "pde.store_times=[1, "), toml::ParseError);
}

TEST_CASE("cross-field constraints are named", "[io][config]") {
  runner::Request r;
  r.user = toml::parse_string("task = \"simulate-np\"\n[model]\ntype = \"np\"\nk = 4\n[run]\nn = 3\n");
  CHECK_THAT(error_of([&] { runner::prepare(r); }), Catch::Matchers::ContainsSubstring("model.k <= run.n"));
  CHECK_THROWS_AS(runner::prepare(r), ConfigError);

  runner::Request mismatch;
  mismatch.user = load("solve.toml");
  mismatch.task = "wave";
  CHECK_THAT(error_of([&] { runner::prepare(mismatch); }), Catch::Matchers::ContainsSubstring("task"));

  runner::Request hyp;
  hyp.user = load("couple.toml");
  hyp.overrides = {"model.birth=\"const:2\""};
  CHECK_THAT(error_of([&] { runner::prepare(hyp); }), Catch::Matchers::ContainsSubstring("coupling hypotheses"));

  runner::Request few;
  few.user = load("velocity.toml");
  few.overrides = {"study.horizon=5"};
  CHECK_THAT(error_of([&] { runner::prepare(few); }), Catch::Matchers::ContainsSubstring("after burn-in"));
}

TEST_CASE("CSV numbers round trip and minus infinity is a literal", "[io][csv]") {
  for (double x : {0.0, 10.0, 0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, -std::numeric_limits<double>::infinity()}) {
    const auto s = csv::num(x);
    CHECK(csv::parse_num(s) == x);
  }
  CHECK(csv::num(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(csv::num(10.0) == "10");
  CHECK_THROWS_AS(csv::parse_num("1.5x"), std::invalid_argument);
  std::istringstream is("a,b\n1,-inf\n2,3\n");
  const auto t = csv::read(is);
  CHECK(t.column("b") == 1);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "-inf");
  CHECK_THROWS(t.column("c"));
}

TEST_CASE("SHA-256 and manifest round trip", "[io][manifest]") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  runner::Request r;
  r.user = load("solve.toml");
  r.overrides = {"pde.dx=0.1", "pde.horizon=1.0", "pde.store_times=[0.5, 1.0]"};
  const auto v = runner::prepare(r);
  const auto art = runner::execute(v);
  const auto m = runner::make_manifest(v, art);
  TempDir dir("manifest");
  runner::write_all(dir.path / "out", art, m, false);
  CHECK(runner::load_manifest(dir.path / "out").doc() == v.doc());
  const auto back = Manifest::from_json(nlohmann::json::parse(read_file_bytes(dir.path / "out" / "manifest.json")));
  CHECK(back.artifacts == m.artifacts);
  CHECK(back.version == BDBBM_VERSION);
  for (const auto& [name, hash] : m.artifacts) CHECK(sha256_hex(read_file_bytes(dir.path / "out" / name)) == hash);
  // Collision without force.
  CHECK_THROWS_AS(runner::write_all(dir.path / "out", art, m, false), std::runtime_error);
  CHECK_NOTHROW(runner::write_all(dir.path / "out", art, m, true));
  // Tampered manifest is detected.
  auto j = m.to_json();
  j["config"]["pde"]["dx"] = 0.2;
  CHECK_THROWS_AS(Manifest::from_json(j), std::runtime_error);
}

TEST_CASE("cli runs are reproducible and independent of the thread count", "[io][cli]") {
  TempDir dir("cli");
  const std::string cfg = std::string(BDBBM_CONFIG_DIR) + "/clans.toml";
  const std::string base = " --config " + cfg + " --set run.n=40 --set clans.roots=[1,20]";
  REQUIRE(cli("clans" + base + " -o " + (dir.path / "a").string()) == 0);
  REQUIRE(cli("clans" + base + " -o " + (dir.path / "b").string()) == 0);
  CHECK(artifact_hashes(dir.path / "a") == artifact_hashes(dir.path / "b"));

  const std::string sim = " --config " + std::string(BDBBM_CONFIG_DIR) + "/bbm.toml --set run.horizon=2.0 --set run.replicas=3";
  REQUIRE(cli("simulate-bd" + sim + " --threads 1 -o " + (dir.path / "s1").string()) == 0);
  REQUIRE(cli("simulate-bd" + sim + " --threads 3 -o " + (dir.path / "s3").string()) == 0);
  auto h1 = artifact_hashes(dir.path / "s1");
  auto h3 = artifact_hashes(dir.path / "s3");
  h1.erase("manifest.json");
  h3.erase("manifest.json");
  CHECK(h1 == h3);

  // Collision, then force.
  CHECK(cli("clans" + base + " -o " + (dir.path / "a").string()) == 1);
  CHECK(cli("clans" + base + " --force -o " + (dir.path / "a").string()) == 0);

  // The default output root comes from the environment.
  const std::string env = "BDBBM_OUT_ROOT=" + (dir.path / "root").string() + " ";
  REQUIRE(std::system((env + BDBBM_CLI + " run" + base + " > /dev/null").c_str()) == 0);
  REQUIRE(fs::exists(dir.path / "root"));
  CHECK(fs::directory_iterator(dir.path / "root")->path().filename().string().rfind("clans-", 0) == 0);
}

TEST_CASE("validation failures write nothing", "[io][cli]") {
  TempDir dir("fail");
  const std::string cfg = std::string(BDBBM_CONFIG_DIR) + "/velocity.toml";
  CHECK(cli("study --config " + cfg + " --set model.k=4 --set study.ns=[3] -o " + (dir.path / "x").string()) == 2);
  CHECK_FALSE(fs::exists(dir.path / "x"));
  CHECK(cli("solve --config " + cfg + " -o " + (dir.path / "y").string()) == 2);
  CHECK_FALSE(fs::exists(dir.path / "y"));
  CHECK(cli("solve --set pde.unknown=1 -o " + (dir.path / "z").string()) == 2);
  CHECK_FALSE(fs::exists(dir.path / "z"));
}

TEST_CASE("plot data from artifact sets", "[io][cli]") {
  TempDir dir("plot");
  const std::string c = std::string(BDBBM_CONFIG_DIR);
  REQUIRE(cli("run --config " + c + "/hydro_k2.toml --set study.ns=[50,200] --set study.replicas=3 --set pde.dx=0.05 -o " +
              (dir.path / "h").string()) == 0);
  REQUIRE(cli("plot-data " + (dir.path / "h").string() + " -k front") == 0);
  auto front = csv::read_file((dir.path / "h" / "plot_front.csv").string());
  CHECK(front.header == std::vector<std::string>{"t", "x", "U", "F_N"});
  CHECK_FALSE(front.rows.empty());

  REQUIRE(cli("run --config " + c + "/velocity.toml --set study.ns=[4,16] --set study.replicas=3 --set study.horizon=8 -o " +
              (dir.path / "v").string()) == 0);
  REQUIRE(cli("plot-data " + (dir.path / "v").string() + " -k velocity") == 0);
  CHECK(csv::read_file((dir.path / "v" / "plot_velocity.csv").string()).header ==
        std::vector<std::string>{"N", "w_hat", "se"});

  REQUIRE(cli("run --config " + c + "/chaos.toml --set study.ns=[20,40] --set study.replicas=20 -o " +
              (dir.path / "c").string()) == 0);
  REQUIRE(cli("plot-data " + (dir.path / "c").string() + " -k scaling") == 0);
  const auto sc = csv::read_file((dir.path / "c" / "plot_scaling.csv").string());
  CHECK(sc.header == std::vector<std::string>{"N", "gap", "se", "fit"});
  CHECK(sc.rows.size() == 2);

  // Missing artifact.
  CHECK(cli("plot-data " + (dir.path / "v").string() + " -k scaling") == 1);
  // Existing output needs --force.
  CHECK(cli("plot-data " + (dir.path / "v").string() + " -k velocity") == 1);
  CHECK(cli("plot-data " + (dir.path / "v").string() + " -k velocity --force") == 0);
}
