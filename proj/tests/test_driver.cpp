#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epsflow/driver.hpp"
#include "epsflow/errors.hpp"

using namespace epsflow;

namespace {

std::string tmp_path(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "epsflow_driver_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string write_config(const std::string& name, const ScenarioConfig& cfg) {
  const std::string path = tmp_path(name);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(bool(out));
  out << serialize(cfg);
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ScenarioConfig small_scenario() {
  ScenarioConfig cfg;
  cfg.epsilon = 0.25;
  cfg.c0 = 0.5;
  cfg.n_theta = 16;
  cfg.t_end = 0.01;
  cfg.logS0_coeffs = {0.2};
  cfg.h0_coeffs = {0.4, 0.1};
  return cfg;
}

bool has(const CommandOutcome& out, const char* needle) {
  return out.summary.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("usage problems exit 2 with usage text; help exits 0") {
  CHECK(dispatch({}).exit_code == 2);
  CHECK(has(dispatch({}), "Usage"));
  CHECK(dispatch({"frobnicate"}).exit_code == 2);
  CHECK(dispatch({"run"}).exit_code == 2);
  CHECK(dispatch({"run", "x.json", "--tol=-1"}).exit_code == 2);
  CHECK(dispatch({"gamma", "x.json", "--from", "1,0.1"}).exit_code == 2);
  CHECK(dispatch({"sweep", "x.json"}).exit_code == 2);

  const CommandOutcome help = dispatch({"--help"});
  CHECK(help.exit_code == 0);
  CHECK(has(help, "run"));
  CHECK(has(help, "verify"));
  CHECK(has(help, "gamma"));
  CHECK(has(help, "sweep"));
}

TEST_CASE("run scenario helper produces the margin series for the run") {
  const ScenarioConfig cfg = small_scenario();
  const RunArtifacts art = run_scenario(cfg);
  REQUIRE(art.trajectory.size() >= 2);
  CHECK(art.trajectory.front().t == 0.0);
  CHECK(art.trajectory.back().t == doctest::Approx(cfg.t_end).epsilon(1e-12));
  CHECK(art.margins.samples.size() == art.trajectory.size() - 1);
  CHECK(art.margins.epsilon == cfg.epsilon);
  CHECK(art.margins.c0 == cfg.c0);
}

TEST_CASE("run: validated scenario passes and writes deterministic artifacts") {
  ScenarioConfig cfg = small_scenario();
  cfg.output = tmp_path("run_out");
  cfg.snapshot_times = {0.005};
  const std::string path = write_config("run.json", cfg);

  const CommandOutcome out = dispatch({"run", path});
  CHECK(out.exit_code == 0);
  CHECK(has(out, "status: pass"));
  CHECK(has(out, "m_thm11="));
  CHECK(has(out, "wrote:"));

  const std::string csv = read_file(cfg.output + "_margins.csv");
  const std::string rep = read_file(cfg.output + "_report.json");
  const std::string snap = read_file(cfg.output + "_snapshot_000.csv");
  CHECK(nlohmann::json::parse(rep).at("status") == "pass");

  const CommandOutcome again = dispatch({"run", path});
  CHECK(again.exit_code == 0);
  CHECK(again.summary == out.summary);
  CHECK(read_file(cfg.output + "_margins.csv") == csv);
  CHECK(read_file(cfg.output + "_report.json") == rep);
  CHECK(read_file(cfg.output + "_snapshot_000.csv") == snap);

  // Without an output prefix the run still reports, it just writes nothing.
  const std::string quiet = write_config("quiet.json", small_scenario());
  const CommandOutcome qout = dispatch({"run", quiet});
  CHECK(qout.exit_code == 0);
  CHECK_FALSE(has(qout, "wrote:"));
}

TEST_CASE("run: rejected and broken inputs exit 2 with the reason") {
  ScenarioConfig cfg = small_scenario();
  cfg.c0 = 0.1; // round initial data cannot clear this threshold
  const std::string path = write_config("reject.json", cfg);
  const CommandOutcome out = dispatch({"run", path});
  CHECK(out.exit_code == 2);
  CHECK(has(out, "initial curvature hypothesis"));

  const CommandOutcome missing = dispatch({"run", tmp_path("absent.json")});
  CHECK(missing.exit_code == 2);
  CHECK(has(missing, "cannot read"));

  const std::string garbled = tmp_path("garbled.json");
  {
    std::ofstream g(garbled, std::ios::binary | std::ios::trunc);
    g << "flow{";
  }
  const CommandOutcome bad = dispatch({"run", garbled});
  CHECK(bad.exit_code == 2);
  CHECK(has(bad, "syntax"));
}

TEST_CASE("gamma: reports the inequality pieces and validates its times") {
  ScenarioConfig cfg = small_scenario();
  cfg.snapshot_times = {0.005};
  const std::string path = write_config("gamma.json", cfg);

  const CommandOutcome out =
      dispatch({"gamma", path, "--from", "1.0,0.005", "--to", "1.2,0.01"});
  CHECK(out.exit_code == 0);
  CHECK(has(out, "gamma="));
  CHECK(has(out, "margin="));
  CHECK(has(out, "status: pass"));

  const CommandOutcome reversed =
      dispatch({"gamma", path, "--from", "1.0,0.2", "--to", "1.2,0.01"});
  CHECK(reversed.exit_code == 2);
  CHECK(has(reversed, "requires t1 < t2"));
  CHECK(dispatch({"gamma", path, "--from", "1.0,0.01", "--to", "1.2,0.01"})
            .exit_code == 2);

  const CommandOutcome lopsided =
      dispatch({"gamma", path, "--from", "1.0", "--to", "1.2,0.01"});
  CHECK(lopsided.exit_code == 2);
  CHECK(has(lopsided, "theta,t"));
  CHECK(dispatch({"gamma", path, "--from", "abc,0.005", "--to", "1.2,0.01"})
            .exit_code == 2);

  // One stored segment cannot bridge distant nodes with a one-node window.
  const CommandOutcome tight = dispatch(
      {"gamma", path, "--from", "0.3,0.005", "--to", "2.8,0.01", "--window", "1"});
  CHECK(tight.exit_code == 2);
  CHECK(has(tight, "cannot connect"));

  CHECK(dispatch({"gamma", path, "--from", "1.0,0.005", "--to", "1.2,0.01",
                  "--window", "2", "--layers", "1"})
            .exit_code == 0);
}

TEST_CASE("verify: clean scenario passes at both resolutions") {
  ScenarioConfig cfg = small_scenario();
  cfg.n_theta = 12;
  const std::string path = write_config("verify.json", cfg);
  const CommandOutcome out = dispatch({"verify", path});
  CHECK(out.exit_code == 0);
  CHECK(has(out, "base    n_theta=12"));
  CHECK(has(out, "refined n_theta=24"));
  CHECK(has(out, "negative excursion"));
  CHECK(has(out, "verify: pass"));
}

TEST_CASE("sweep: one run and one report per epsilon value") {
  ScenarioConfig cfg = small_scenario();
  cfg.output = tmp_path("sweep_out");
  const std::string path = write_config("sweep.json", cfg);

  const CommandOutcome out = dispatch({"sweep", path, "--epsilons", "0,0.25"});
  CHECK(out.exit_code == 0);
  CHECK(has(out, "epsilon=0:"));
  CHECK(has(out, "epsilon=0.25:"));
  CHECK(has(out, "sweep: pass over 2 epsilon"));

  const auto rep0 =
      nlohmann::json::parse(read_file(cfg.output + "_eps0_report.json"));
  const auto rep1 =
      nlohmann::json::parse(read_file(cfg.output + "_eps0.25_report.json"));
  CHECK(rep0.at("config").at("epsilon").get<double>() == 0.0);
  CHECK(rep1.at("config").at("epsilon").get<double>() == 0.25);
  CHECK(rep0.at("status") == "pass");
  CHECK(rep1.at("status") == "pass");

  const CommandOutcome negative =
      dispatch({"sweep", path, "--epsilons", "0.25,-1"});
  CHECK(negative.exit_code == 2);
  CHECK(has(negative, "must be finite and >= 0"));
}

TEST_CASE("margin classification feeds the exit code") {
  MarginMinima good;
  good.m_thm11 = 0.5;
  good.m_thmD = 0.4;
  good.m_h_low = 0.1;
  good.m_h_high = 0.1;
  good.m_cond = 0.2;
  good.m_elem = 0.0;
  CHECK(classify_margins(good, {}, 1e-4) == 0);

  MarginMinima soft = good;
  soft.m_thm11 = -5e-5; // inside tolerance
  CHECK(classify_margins(soft, {}, 1e-4) == 0);
  soft.m_thm11 = -2e-4;
  CHECK(classify_margins(soft, {}, 1e-4) == 1);

  MarginMinima bad = good;
  bad.m_h_low = -0.1;
  CHECK(classify_margins(bad, {}, 1e-4) == 1);

  PathResult violating;
  violating.margin = -0.5;
  CHECK(classify_margins(good, {violating}, 1e-4) == 1);
  PathResult healthy;
  healthy.margin = 0.25;
  CHECK(classify_margins(good, {healthy}, 1e-4) == 0);
}
