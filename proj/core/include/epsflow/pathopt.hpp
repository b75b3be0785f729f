#pragma once

// Space-time path action and its minimization over the stored trajectory.
// The action of a path gamma is  1/4 * integral e^t (|gamma'|^2_g + 4/t) dt,
// with the velocity measured in the evolving metric at the current time.
// A layered dynamic program over (stored time sample) x (grid node) states
// produces an upper bound on the infimum; the integrated inequality
// e^{t1} ln S(x1,t1) < e^{t2} ln S(x2,t2) + Gamma is then checked directly.

#include <vector>

#include "epsflow/dynamics.hpp"

namespace epsflow {

// Per-segment quadrature rule for the action integrand.  The trapezoid rule
// is the default: the 4/t part of the integrand is convex, so trapezoid
// values over-estimate it and shrink monotonically under nested refinement,
// which keeps the DP value a conservative upper bound.  The midpoint rule
// (which under-estimates convex integrands) is retained for Richardson-style
// bracketing in tests.
enum class SegmentRule { trapezoid, midpoint };

// Endpoints of an integrated-inequality query.  Colatitudes snap to the
// nearest grid node and times to the nearest stored sample; the snapped
// values are what the result's path records.
struct PathQuery {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

struct SpaceTimePath {
  std::vector<double> times;  // strictly increasing
  std::vector<double> thetas; // one colatitude per time
};

struct PathResult {
  double gamma_value = 0.0; // upper bound on the path-action infimum
  SpaceTimePath path;       // the minimizing node path
  double lhs = 0.0;         // e^{t1} ln S at the first endpoint
  double rhs = 0.0;         // e^{t2} ln S at the second endpoint + gamma
  double margin = 0.0;      // rhs - lhs; positive confirms the inequality
};

// Quadrature value of the action along one explicit path.  Path times must
// lie inside the stored time range (conformal factors are interpolated
// linearly in time and colatitude where samples fall between stored data).
// Throws std::invalid_argument for malformed paths or times out of range.
double action(const SpaceTimePath& path, const Trajectory& traj,
              SegmentRule rule = SegmentRule::trapezoid);

// Layered DP minimization between the snapped endpoints.  Layers are stored
// samples; `layers` selects an evenly spread sub-ladder of that many segments
// (0 = use every stored sample), which nests under doubling so refined values
// can only improve.  Transitions move at most `window` nodes per segment;
// cost ties break toward the smallest index step.  Throws
// std::invalid_argument for malformed queries or too-short trajectories and
// ConfigError when `window` cannot connect the endpoints.
PathResult gamma_dp(const PathQuery& query, const Trajectory& traj, int window,
                    int layers = 0, SegmentRule rule = SegmentRule::trapezoid);

// Evaluate the integrated inequality for one query via gamma_dp on the full
// stored ladder.  Since gamma_value over-estimates the infimum, a positive
// margin is a conservative confirmation; a negative one flags a genuine
// violation candidate for refinement analysis.
PathResult verify_integrated(const PathQuery& query, const Trajectory& traj,
                             int window = 4);

// Margin of the differential form of the inequality at each interior path
// sample: d/dt(e^t ln S(gamma(t), t)) + e^t(|gamma'|^2_g/4 + 1/t), the total
// derivative expanded by the chain rule with centered differences in time and
// colatitude.  Path samples must coincide with stored times.
std::vector<double> pathwise_differential_check(const SpaceTimePath& path,
                                                const Trajectory& traj);

} // namespace epsflow
