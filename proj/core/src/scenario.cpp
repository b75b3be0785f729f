#include "epsflow/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "epsflow/errors.hpp"
#include "epsflow/geometry.hpp"
#include "epsflow/grid.hpp"

namespace epsflow {

namespace {

// Validation slacks: the curvature hypothesis is checked strictly (slack 0),
// the order hypothesis keeps h0 a fixed margin away from both ends so the
// run does not start on the boundary of its own preconditions.
constexpr double kCurvatureSlack = 0.0;
constexpr double kOrderSlack = 1e-6;
constexpr double kReportTol = 1e-4;
constexpr double kSnapshotMatchTol = 1e-9;

template <class... Args>
std::string msg(const char* fmt, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return std::string(buf);
}

double poly_eval(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

std::pair<double, double> h0_profile(const ScenarioConfig& cfg) {
  const double d0 = cfg.h0_coeffs.empty() ? 0.5 : cfg.h0_coeffs[0];
  const double d1 = cfg.h0_coeffs.size() > 1 ? cfg.h0_coeffs[1] : 0.0;
  return {d0, d1};
}

// Shortest decimal that parses back to the same double; locale-free.
std::string decimal(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

nlohmann::ordered_json config_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["epsilon"] = c.epsilon;
  j["c0"] = c.c0;
  j["n_theta"] = c.n_theta;
  j["t_end"] = c.t_end;
  j["sigma"] = c.sigma;
  j["nonlinear_term"] = c.nonlinear_term;
  j["u0_coeffs"] = c.u0_coeffs;
  j["logS0_coeffs"] = c.logS0_coeffs;
  j["h0_coeffs"] = c.h0_coeffs;
  j["output"] = c.output;
  j["snapshot_times"] = c.snapshot_times;
  return j;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to \"" + path + "\" failed");
}

} // namespace

double curvature_threshold(double c0) { return -order_ratio(c0) - 1.0; }

ScenarioConfig parse_and_validate(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario syntax error: ") + e.what());
  }
  if (!doc.is_object())
    throw ConfigError("scenario document must be a JSON object");

  static const char* const kKnown[] = {
      "epsilon",      "c0",           "n_theta",   "t_end",
      "sigma",        "nonlinear_term", "u0_coeffs", "logS0_coeffs",
      "h0_coeffs",    "output",       "snapshot_times"};
  for (const auto& item : doc.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || item.key() == k;
    if (!known)
      throw ConfigError("unknown scenario key \"" + item.key() + "\"");
  }

  auto real_at = [&](const char* key, double fallback, bool required) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
      if (required) throw ConfigError(msg("missing required key \"%s\"", key));
      return fallback;
    }
    if (!it->is_number())
      throw ConfigError(msg("key \"%s\" must be a number", key));
    const double x = it->get<double>();
    if (!std::isfinite(x))
      throw ConfigError(msg("key \"%s\" must be finite", key));
    return x;
  };
  auto list_at = [&](const char* key, std::vector<double> fallback) {
    const auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_array())
      throw ConfigError(msg("key \"%s\" must be an array of numbers", key));
    std::vector<double> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number())
        throw ConfigError(msg("key \"%s\" must hold numbers only", key));
      const double x = v.get<double>();
      if (!std::isfinite(x))
        throw ConfigError(msg("key \"%s\" must hold finite numbers", key));
      out.push_back(x);
    }
    return out;
  };

  ScenarioConfig cfg;
  cfg.epsilon = real_at("epsilon", 0.0, true);
  cfg.c0 = real_at("c0", 0.5, true);
  cfg.t_end = real_at("t_end", 0.2, true);
  cfg.sigma = real_at("sigma", cfg.sigma, false);

  {
    const auto it = doc.find("n_theta");
    if (it == doc.end()) throw ConfigError("missing required key \"n_theta\"");
    if (!it->is_number_integer())
      throw ConfigError("key \"n_theta\" must be an integer");
    const long long n = it->get<long long>();
    if (n < 8 || n > 32768)
      throw ConfigError(
          msg("plumbing bound violated: n_theta = %lld outside [8, 32768]", n));
    cfg.n_theta = static_cast<int>(n);
  }
  if (const auto it = doc.find("nonlinear_term"); it != doc.end()) {
    if (!it->is_boolean())
      throw ConfigError("key \"nonlinear_term\" must be true or false");
    cfg.nonlinear_term = it->get<bool>();
  }
  if (const auto it = doc.find("output"); it != doc.end()) {
    if (!it->is_string())
      throw ConfigError("key \"output\" must be a string path prefix");
    cfg.output = it->get<std::string>();
  }
  cfg.u0_coeffs = list_at("u0_coeffs", {});
  cfg.logS0_coeffs = list_at("logS0_coeffs", {});
  cfg.h0_coeffs = list_at("h0_coeffs", cfg.h0_coeffs);
  cfg.snapshot_times = list_at("snapshot_times", {});

  if (!(cfg.c0 > 0.0 && cfg.c0 < 1.0))
    throw ConfigError(msg("c0 = %.6g outside the open interval (0, 1)", cfg.c0));
  if (!(cfg.epsilon >= 0.0))
    throw ConfigError(msg("epsilon = %.6g must be >= 0", cfg.epsilon));
  if (!(cfg.t_end > 0.0 && cfg.t_end <= 10.0))
    throw ConfigError(
        msg("plumbing bound violated: t_end = %.6g outside (0, 10]", cfg.t_end));
  if (!(cfg.sigma > 0.0 && cfg.sigma <= 0.5))
    throw ConfigError(
        msg("plumbing bound violated: sigma = %.6g outside (0, 0.5]", cfg.sigma));
  if (cfg.u0_coeffs.size() > 64 || cfg.logS0_coeffs.size() > 64)
    throw ConfigError(
        "plumbing bound violated: initial polynomials take at most 64 coefficients");
  if (cfg.h0_coeffs.size() > 2)
    throw ConfigError(msg("h0 is affine in cos(theta): h0_coeffs takes at most "
                          "2 entries, got %zu",
                          cfg.h0_coeffs.size()));
  for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
    const double ts = cfg.snapshot_times[i];
    const bool ordered = i == 0 || ts > cfg.snapshot_times[i - 1];
    if (!(ts >= 0.0 && ts <= cfg.t_end && ordered))
      throw ConfigError(msg("snapshot_times must be strictly increasing within "
                            "[0, t_end]; entry %zu = %.6g breaks that",
                            i, ts));
  }

  const Grid grid = make_grid(cfg.n_theta);
  const MetricState metric{ScalarField::sample(grid, [&](double th) {
    return poly_eval(cfg.u0_coeffs, std::cos(th));
  })};
  const double min_r = min_value(scalar_curvature(metric));
  const double threshold = curvature_threshold(cfg.c0);
  if (!(min_r > threshold + kCurvatureSlack))
    throw ConfigError(
        msg("initial curvature hypothesis violated: min R(u0) = %.6g must "
            "exceed -2 ln(c0)/(1 - c0^2) - 1 = %.6g",
            min_r, threshold));

  const auto [d0, d1] = h0_profile(cfg);
  const double h_lo = cfg.c0 + (1.0 - cfg.c0) * (d0 - std::abs(d1));
  const double h_hi = cfg.c0 + (1.0 - cfg.c0) * (d0 + std::abs(d1));
  if (!(h_lo > cfg.c0 + kOrderSlack && h_hi < 1.0 - kOrderSlack))
    throw ConfigError(
        msg("initial order hypothesis violated: h0 ranges over [%.6g, %.6g], "
            "must stay inside (c0 + %g, 1 - %g) = (%.6g, %.6g)",
            h_lo, h_hi, kOrderSlack, kOrderSlack, cfg.c0 + kOrderSlack,
            1.0 - kOrderSlack));

  return cfg;
}

std::string serialize(const ScenarioConfig& config) {
  return config_json(config).dump(2) + "\n";
}

FlowState initial_state(const ScenarioConfig& config) {
  const Grid grid = make_grid(config.n_theta);
  const auto [d0, d1] = h0_profile(config);

  FlowState st;
  st.t = 0.0;
  st.metric.u = ScalarField::sample(grid, [&](double th) {
    return poly_eval(config.u0_coeffs, std::cos(th));
  });
  st.S = ScalarField::sample(grid, [&](double th) {
    return std::exp(poly_eval(config.logS0_coeffs, std::cos(th)));
  });
  const ScalarField h0 = ScalarField::sample(grid, [&](double th) {
    return config.c0 + (1.0 - config.c0) * (d0 + d1 * std::cos(th));
  });
  st.T = ScalarField(grid);
  for (int j = 0; j < grid.n_theta(); ++j)
    st.T.values[j] = h0.values[j] * st.S.values[j];
  st.h_direct = h0;
  return st;
}

StepControl step_control(const ScenarioConfig& config) {
  StepControl ctl;
  ctl.sigma = config.sigma;
  ctl.nonlinear_term = config.nonlinear_term;
  return ctl;
}

bool margins_pass(const MarginMinima& minima, double tol) {
  return minima.m_thm11 > -tol && minima.m_thmD > -tol &&
         minima.m_h_low > 0.0 && minima.m_h_high > 0.0 &&
         minima.m_cond > 0.0 && minima.m_elem >= -1e-12;
}

std::vector<std::string> write_outputs(const Trajectory& traj,
                                       const MarginSeries& margins,
                                       const std::vector<PathResult>& results,
                                       const ScenarioConfig& config,
                                       const std::string& status) {
  if (config.output.empty())
    throw ConfigError("config has no output prefix; nowhere to write");

  std::vector<std::string> written;

  {
    const std::string path = config.output + "_margins.csv";
    std::ofstream out = open_for_write(path);
    out << "t,m_thm11,m_thmD,m_chow,m_h_low,m_h_high,m_cond,m_elem,min_R\n";
    for (const HarnackSample& s : margins.samples) {
      const double chow =
          s.m_chow ? *s.m_chow : std::numeric_limits<double>::quiet_NaN();
      out << decimal(s.t) << ',' << decimal(s.m_thm11) << ','
          << decimal(s.m_thmD) << ',' << decimal(chow) << ','
          << decimal(s.m_h_low) << ',' << decimal(s.m_h_high) << ','
          << decimal(s.m_cond) << ',' << decimal(s.m_elem) << ','
          << decimal(s.min_R) << '\n';
    }
    finish_write(out, path);
    written.push_back(path);
  }

  std::string effective = status;
  if (effective.empty()) {
    if (traj.empty()) {
      effective = "validated";
    } else {
      bool ok = margins.samples.empty() ||
                margins_pass(margins.global_minima, kReportTol);
      for (const PathResult& r : results) ok = ok && r.margin > 0.0;
      effective = ok ? "pass" : "margin_violation";
    }
  }

  {
    nlohmann::ordered_json rep;
    rep["config"] = config_json(config);
    if (margins.samples.empty()) {
      rep["minima"] = nullptr;
    } else {
      nlohmann::ordered_json m;
      const MarginMinima& g = margins.global_minima;
      m["m_thm11"] = g.m_thm11;
      m["m_thmD"] = g.m_thmD;
      if (g.m_chow) m["m_chow"] = *g.m_chow;
      else m["m_chow"] = nullptr;
      m["m_h_low"] = g.m_h_low;
      m["m_h_high"] = g.m_h_high;
      m["m_cond"] = g.m_cond;
      m["m_elem"] = g.m_elem;
      m["min_R"] = g.min_R;
      rep["minima"] = std::move(m);
    }
    rep["path_queries"] = nlohmann::ordered_json::array();
    for (const PathResult& r : results) {
      nlohmann::ordered_json q;
      if (!r.path.times.empty()) {
        q["t1"] = r.path.times.front();
        q["theta1"] = r.path.thetas.front();
        q["t2"] = r.path.times.back();
        q["theta2"] = r.path.thetas.back();
      }
      q["gamma"] = r.gamma_value;
      q["lhs"] = r.lhs;
      q["rhs"] = r.rhs;
      q["margin"] = r.margin;
      rep["path_queries"].push_back(std::move(q));
    }
    rep["status"] = effective;

    const std::string path = config.output + "_report.json";
    std::ofstream out = open_for_write(path);
    out << rep.dump(2) << '\n';
    finish_write(out, path);
    written.push_back(path);
  }

  if (!traj.empty()) {
    for (std::size_t i = 0; i < config.snapshot_times.size(); ++i) {
      const double ts = config.snapshot_times[i];
      const FlowState* hit = nullptr;
      for (const FlowState& st : traj)
        if (std::abs(st.t - ts) <= kSnapshotMatchTol) {
          hit = &st;
          break;
        }
      if (!hit)
        throw ConfigError(msg("snapshot time %.6g has no stored state; pass "
                              "snapshot times as stop times",
                              ts));

      char suffix[40];
      std::snprintf(suffix, sizeof suffix, "_snapshot_%03zu.csv", i);
      const std::string path = config.output + suffix;
      std::ofstream out = open_for_write(path);
      out << "theta,u,S,T,R,h,Q,P\n";

      const Grid& grid = hit->metric.u.grid;
      const ScalarField r_field = scalar_curvature(hit->metric);
      const ScalarField q_field = q_quantity(*hit, config.epsilon);
      const ScalarField ct = constrained_term(*hit);
      for (int j = 0; j < grid.n_theta(); ++j) {
        out << decimal(grid.node(j)) << ',' << decimal(hit->metric.u.values[j])
            << ',' << decimal(hit->S.values[j]) << ','
            << decimal(hit->T.values[j]) << ',' << decimal(r_field.values[j])
            << ',' << decimal(hit->T.values[j] / hit->S.values[j]) << ','
            << decimal(q_field.values[j]) << ','
            << decimal(q_field.values[j] - ct.values[j]) << '\n';
      }
      finish_write(out, path);
      written.push_back(path);
    }
  }

  return written;
}

} // namespace epsflow
