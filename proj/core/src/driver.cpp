#include "epsflow/driver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "epsflow/errors.hpp"

namespace epsflow {

namespace {

template <class... Args>
std::string msg(const char* fmt, Args... args) {
  char buf[320];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string decimal(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Worst negative excursion of the two differential margins; the strictly
// positive order margins are gated, not refined away.
double excursion(const MarginMinima& m) {
  return std::max(0.0, -std::min(m.m_thm11, m.m_thmD));
}

std::string minima_line(const char* label, const MarginMinima& m) {
  char chow[40];
  if (m.m_chow) std::snprintf(chow, sizeof chow, "%.6g", *m.m_chow);
  else std::snprintf(chow, sizeof chow, "none");
  return msg("%s: m_thm11=%.6g m_thmD=%.6g m_chow=%s m_h_low=%.6g "
             "m_h_high=%.6g m_cond=%.6g m_elem=%.6g min_R=%.6g",
             label, m.m_thm11, m.m_thmD, chow, m.m_h_low, m.m_h_high, m.m_cond,
             m.m_elem, m.min_R);
}

std::pair<double, double> parse_point(const std::string& text,
                                      const char* flag) {
  const auto comma = text.find(',');
  const auto fail = [&]() -> std::pair<double, double> {
    throw ConfigError(msg("%s expects theta,t (got \"%s\")", flag, text.c_str()));
  };
  if (comma == std::string::npos || comma == 0 || comma + 1 == text.size())
    return fail();
  try {
    std::size_t used = 0;
    const std::string head = text.substr(0, comma);
    const std::string tail = text.substr(comma + 1);
    const double theta = std::stod(head, &used);
    if (used != head.size()) return fail();
    const double t = std::stod(tail, &used);
    if (used != tail.size()) return fail();
    return {theta, t};
  } catch (const std::logic_error&) {
    return fail();
  }
}

CommandOutcome do_run(const std::string& path, double tol) {
  const ScenarioConfig cfg = parse_and_validate(read_text_file(path));
  const RunArtifacts art = run_scenario(cfg);
  const int code = classify_margins(art.margins.global_minima, {}, tol);
  const char* status = code == 0 ? "pass" : "margin_violation";

  std::ostringstream sum;
  sum << msg("scenario %s: epsilon=%.6g c0=%.6g n_theta=%d t_end=%.6g steps=%zu",
             path.c_str(), cfg.epsilon, cfg.c0, cfg.n_theta, cfg.t_end,
             art.trajectory.size() - 1)
      << '\n'
      << minima_line("margins", art.margins.global_minima) << '\n';
  if (!cfg.output.empty()) {
    const auto written = write_outputs(art.trajectory, art.margins, {}, cfg, status);
    sum << "wrote:";
    for (const std::string& p : written) sum << ' ' << p;
    sum << '\n';
  }
  sum << msg("status: %s (tol %g)", status, tol);
  return {code, sum.str()};
}

CommandOutcome do_verify(const std::string& path, double tol) {
  const ScenarioConfig cfg = parse_and_validate(read_text_file(path));
  const RunArtifacts base = run_scenario(cfg);

  ScenarioConfig fine = cfg;
  fine.n_theta *= 2; // the diffusive step control then takes dt/4 on its own
  fine.output.clear();
  fine.snapshot_times.clear();
  const RunArtifacts refined = run_scenario(fine);

  const int base_code = classify_margins(base.margins.global_minima, {}, tol);
  const int fine_code = classify_margins(refined.margins.global_minima, {}, tol);
  const double e_base = excursion(base.margins.global_minima);
  const double e_fine = excursion(refined.margins.global_minima);
  const bool decay_ok = e_base == 0.0 || e_fine == 0.0 || e_base / e_fine >= 2.0;
  const int code = (base_code == 0 && fine_code == 0 && decay_ok) ? 0 : 1;
  const char* status = code == 0 ? "pass" : "margin_violation";

  std::ostringstream sum;
  sum << minima_line(msg("base    n_theta=%d", cfg.n_theta).c_str(),
                     base.margins.global_minima)
      << '\n'
      << minima_line(msg("refined n_theta=%d", fine.n_theta).c_str(),
                     refined.margins.global_minima)
      << '\n';
  if (e_base == 0.0)
    sum << "negative excursion: none\n";
  else if (e_fine == 0.0)
    sum << msg("negative excursion: base=%.3g refined=0 (cleared)\n", e_base);
  else
    sum << msg("negative excursion: base=%.3g refined=%.3g decay=%.3g\n",
               e_base, e_fine, e_base / e_fine);
  if (!cfg.output.empty()) {
    const auto written = write_outputs(base.trajectory, base.margins, {}, cfg, status);
    sum << "wrote:";
    for (const std::string& p : written) sum << ' ' << p;
    sum << '\n';
  }
  sum << msg("verify: %s (tol %g)", status, tol);
  return {code, sum.str()};
}

CommandOutcome do_gamma(const std::string& path, const std::string& from_text,
                        const std::string& to_text, int window, int layers,
                        double tol) {
  const auto [theta1, t1] = parse_point(from_text, "--from");
  const auto [theta2, t2] = parse_point(to_text, "--to");
  if (!(t1 < t2))
    throw ConfigError(msg("gamma requires t1 < t2 (got t1=%.6g, t2=%.6g)", t1, t2));

  const ScenarioConfig cfg = parse_and_validate(read_text_file(path));
  const Trajectory traj =
      evolve(initial_state(cfg), cfg.epsilon, step_control(cfg), cfg.t_end, {},
             cfg.snapshot_times);
  const PathResult res = gamma_dp({theta1, theta2, t1, t2}, traj, window, layers);
  const int code = res.margin > 0.0 ? 0 : 1;

  std::ostringstream sum;
  sum << msg("gamma=%.12g lhs=%.12g rhs=%.12g margin=%.12g", res.gamma_value,
             res.lhs, res.rhs, res.margin)
      << '\n'
      << msg("path: %zu samples, (theta=%.6g, t=%.6g) -> (theta=%.6g, t=%.6g)",
             res.path.times.size(), res.path.thetas.front(),
             res.path.times.front(), res.path.thetas.back(),
             res.path.times.back())
      << '\n'
      << msg("status: %s (tol %g)",
             code == 0 ? "pass" : "margin_violation", tol);
  return {code, sum.str()};
}

CommandOutcome do_sweep(const std::string& path,
                        const std::vector<double>& epsilons, double tol) {
  if (epsilons.empty())
    throw ConfigError("sweep needs at least one epsilon value");
  for (const double e : epsilons)
    if (!(std::isfinite(e) && e >= 0.0))
      throw ConfigError(msg("sweep epsilon = %.6g must be finite and >= 0", e));

  const ScenarioConfig cfg = parse_and_validate(read_text_file(path));
  int worst = 0;
  std::ostringstream sum;
  for (const double e : epsilons) {
    ScenarioConfig c = cfg;
    c.epsilon = e;
    if (!cfg.output.empty()) c.output = cfg.output + "_eps" + decimal(e);
    const RunArtifacts art = run_scenario(c);
    const int code = classify_margins(art.margins.global_minima, {}, tol);
    worst = std::max(worst, code);
    if (!c.output.empty())
      write_outputs(art.trajectory, art.margins, {}, c,
                    code == 0 ? "pass" : "margin_violation");
    sum << minima_line(msg("epsilon=%.6g", e).c_str(),
                       art.margins.global_minima)
        << '\n';
  }
  sum << msg("sweep: %s over %zu epsilon values (tol %g)",
             worst == 0 ? "pass" : "margin_violation", epsilons.size(), tol);
  return {worst, sum.str()};
}

} // namespace

RunArtifacts run_scenario(const ScenarioConfig& config) {
  RunArtifacts art;
  art.trajectory = evolve(initial_state(config), config.epsilon,
                          step_control(config), config.t_end, {},
                          config.snapshot_times);
  art.margins = collect_margins(art.trajectory, config.epsilon, config.c0);
  return art;
}

int classify_margins(const MarginMinima& minima,
                     const std::vector<PathResult>& results, double tol) {
  bool ok = margins_pass(minima, tol);
  for (const PathResult& r : results) ok = ok && r.margin > 0.0;
  return ok ? 0 : 1;
}

CommandOutcome dispatch(const std::vector<std::string>& args) {
  CLI::App app{"constrained Harnack margins for the interpolating surface flow"};
  app.name("epsflow");
  app.require_subcommand(1);

  std::string run_path;
  double run_tol = 1e-4;
  CLI::App* cmd_run =
      app.add_subcommand("run", "evolve a scenario and report its margins");
  cmd_run->add_option("config", run_path, "scenario JSON file")->required();
  cmd_run->add_option("--tol", run_tol, "margin tolerance (default 1e-4)")
      ->check(CLI::PositiveNumber);

  std::string verify_path;
  double verify_tol = 1e-4;
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "run, then confirm margin excursions decay at 2x resolution");
  cmd_verify->add_option("config", verify_path, "scenario JSON file")->required();
  cmd_verify->add_option("--tol", verify_tol, "margin tolerance (default 1e-4)")
      ->check(CLI::PositiveNumber);

  std::string gamma_path, from_text, to_text;
  int window = 4, layers = 0;
  double gamma_tol = 1e-4;
  CLI::App* cmd_gamma = app.add_subcommand(
      "gamma", "minimize the path action and check the integrated inequality");
  cmd_gamma->add_option("config", gamma_path, "scenario JSON file")->required();
  cmd_gamma->add_option("--from", from_text, "start point as theta,t")->required();
  cmd_gamma->add_option("--to", to_text, "end point as theta,t")->required();
  cmd_gamma->add_option("--window", window, "node moves per segment (default 4)")
      ->check(CLI::PositiveNumber);
  cmd_gamma->add_option("--layers", layers, "ladder segments, 0 = every stored sample")
      ->check(CLI::NonNegativeNumber);
  cmd_gamma->add_option("--tol", gamma_tol, "margin tolerance (default 1e-4)")
      ->check(CLI::PositiveNumber);

  std::string sweep_path;
  std::vector<double> epsilons;
  double sweep_tol = 1e-4;
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "one run and one report per epsilon value");
  cmd_sweep->add_option("config", sweep_path, "scenario JSON file")->required();
  cmd_sweep->add_option("--epsilons", epsilons, "comma-separated epsilon values")
      ->required()
      ->delimiter(',');
  cmd_sweep->add_option("--tol", sweep_tol, "margin tolerance (default 1e-4)")
      ->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("epsflow");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    return {0, app.help()};
  } catch (const CLI::ParseError& e) {
    return {2, std::string(e.what()) + "\n" + app.help()};
  }

  try {
    if (cmd_run->parsed()) return do_run(run_path, run_tol);
    if (cmd_verify->parsed()) return do_verify(verify_path, verify_tol);
    if (cmd_gamma->parsed())
      return do_gamma(gamma_path, from_text, to_text, window, layers, gamma_tol);
    return do_sweep(sweep_path, epsilons, sweep_tol);
  } catch (const OrderError& e) {
    return {1, std::string("order violation: ") + e.what()};
  } catch (const std::exception& e) {
    return {2, e.what()};
  }
}

} // namespace epsflow
