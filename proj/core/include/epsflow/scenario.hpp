#pragma once

// Scenario configuration: parsing with hypothesis validation, initial data
// construction, and the run artifacts (margin CSV, JSON report, snapshots).

#include <string>
#include <vector>

#include "epsflow/dynamics.hpp"
#include "epsflow/harnack.hpp"
#include "epsflow/pathopt.hpp"

namespace epsflow {

// A complete run description.  Initial data are polynomials in cos(theta),
//   u0     = sum_k u0_coeffs[k]    cos^k(theta)
//   ln S0  = sum_k logS0_coeffs[k] cos^k(theta)
//   h0     = c0 + (1 - c0) (d0 + d1 cos(theta)),  h0_coeffs = {d0, d1},
// which keeps every initial profile smooth across the poles.
struct ScenarioConfig {
  double epsilon = 0.0;
  double c0 = 0.5;
  int n_theta = 128;
  double t_end = 0.2;
  double sigma = 0.2;
  bool nonlinear_term = true;
  std::vector<double> u0_coeffs;
  std::vector<double> logS0_coeffs;
  std::vector<double> h0_coeffs{0.5, 0.0};
  std::string output;                 // file path prefix; empty = no files
  std::vector<double> snapshot_times; // strictly increasing, within [0, t_end]

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Curvature floor the initial data must clear: -2 ln(c0)/(1 - c0^2) - 1.
// Decreasing in c0: a tighter initial order pins h0 nearer 1 and asks less
// of the curvature, e.g. 0.848392 at c0 = 0.5 but 3.651687 at c0 = 0.1.
double curvature_threshold(double c0);

// Parse a JSON scenario document (keys = ScenarioConfig field names; unknown
// keys rejected; epsilon, c0, n_theta and t_end required, the rest
// defaulted) and enforce the run hypotheses:
//   - c0 in (0,1), epsilon finite and >= 0, plumbing bounds on n_theta,
//     t_end, sigma and the coefficient lists;
//   - min R(u0) strictly above curvature_threshold(c0);
//   - h0 inside (c0 + 1e-6, 1 - 1e-6) everywhere, so 0 < c0 S0 < T0 < S0.
// Throws ConfigError naming the violated check and the offending numbers.
ScenarioConfig parse_and_validate(const std::string& text);

// Serialize to the exact document form parse_and_validate accepts.
// parse_and_validate(serialize(c)) reproduces every field bit for bit.
std::string serialize(const ScenarioConfig& config);

// Build the t = 0 flow state on the configured grid: u0, S0 = e^{ln S0},
// T0 = h0 S0, with the direct h evolution engaged as a cross-check.
FlowState initial_state(const ScenarioConfig& config);

StepControl step_control(const ScenarioConfig& config);

// Margin gate shared by the report writer and the command-line driver:
// the two differential margins sit above -tol, the order margins and the
// curvature-condition margin are positive, and the algebraic slack is no
// worse than rounding.  The trace margin is reported but not gated (it is
// only meaningful while the curvature stays positive).
bool margins_pass(const MarginMinima& minima, double tol);

// Write the run artifacts next to the configured output prefix:
//   <prefix>_margins.csv        t,m_thm11,m_thmD,m_chow,m_h_low,m_h_high,
//                               m_cond,m_elem,min_R; one row per sample;
//                               full round-trip decimals, "nan" for an
//                               absent trace margin
//   <prefix>_report.json        config echo, global minima, path-query
//                               results, status
//   <prefix>_snapshot_NNN.csv   theta,u,S,T,R,h,Q,P at each snapshot time
//                               (each must coincide with a stored state)
// Returns the written paths.  `status` overrides the derived value, which is
// "validated" for an empty trajectory and otherwise "pass" or
// "margin_violation" per margins_pass at tol 1e-4 plus positivity of every
// path-query margin.  Throws IoError when a file cannot be written.
std::vector<std::string> write_outputs(const Trajectory& traj,
                                       const MarginSeries& margins,
                                       const std::vector<PathResult>& results,
                                       const ScenarioConfig& config,
                                       const std::string& status = {});

} // namespace epsflow
