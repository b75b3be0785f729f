#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "epsflow/geometry.hpp"
#include "epsflow/grid.hpp"

namespace epsflow {

// State of the coupled flow at one instant: conformal metric factor, the two
// positive solutions S and T, and optionally a second copy of h = T/S evolved
// through its own equation as a cross-check.
struct FlowState {
  double t = 0.0;
  MetricState metric;
  ScalarField S;
  ScalarField T;
  std::optional<ScalarField> h_direct;
};

struct StepControl {
  double sigma = 0.2;     // CFL safety factor, dt = sigma d_theta^2 / max e^{-2u}
  double dt_min = 1e-10;
  double dt_max = 1e-2;
  bool nonlinear_term = true; // include the -S ln S / -T ln T / -h ln h reactions
  double r_ceiling = 1e3; // abort when max R exceeds this
};

struct FlowDerivatives {
  ScalarField du_dt;
  ScalarField dS_dt;
  ScalarField dT_dt;
  std::optional<ScalarField> dh_dt;
};

// Time derivatives of the coupled system
//   du/dt = -(epsilon/2) R
//   dS/dt = Lap_g S - S ln S + epsilon R S   (ln term only in nonlinear mode)
//   dT/dt = Lap_g T - T ln T + epsilon R T
//   dh/dt = Lap_g h + 2 grad h . grad ln S - h ln h
// The S and T lines are evaluated through their logarithms, which is exact for
// spatially constant data and keeps the two equations positivity-compatible.
FlowDerivatives rhs(const FlowState& state, double epsilon, const StepControl& ctl);

// Diffusive CFL step: clamp(sigma d_theta^2 / max e^{-2u}, dt_min, dt_max),
// additionally capped so the step does not cross t_stop.
double select_dt(const FlowState& state, const StepControl& ctl,
                 double t_stop = std::numeric_limits<double>::infinity());

// One classical Runge-Kutta step of the coupled system.  u, ln S and ln T are
// the integrated variables; h_direct is integrated in value form.
FlowState step_rk4(const FlowState& state, double dt, double epsilon,
                   const StepControl& ctl);

using Trajectory = std::vector<FlowState>;
using Observer = std::function<void(const FlowState&)>;

// March from the initial state to t_end, storing every accepted state
// (the initial one included) and firing the observers after each step.
// stop_times are hit exactly, which makes snapshots and references sharp.
Trajectory evolve(const FlowState& initial, double epsilon, const StepControl& ctl,
                  double t_end, const std::vector<Observer>& observers = {},
                  std::vector<double> stop_times = {});

// Closed-form / quadrature references for homogeneous data.
enum class ReferenceCase {
  round_r,    // R(t) = R0 / (1 - epsilon R0 t)
  const_logs, // ln S for spatially constant S: L' = -L + epsilon R(t)
  const_h,    // spatially constant h: h(t) = alpha^(e^{-t})
};

struct ReferenceParams {
  double epsilon = 0.0;
  double r0 = 2.0;    // initial curvature for round_r / const_logs
  double logs0 = 0.0; // initial ln S for const_logs
  double alpha = 0.5; // initial h for const_h
};

std::function<double(double)> exact_reference(ReferenceCase which,
                                              const ReferenceParams& params);

// Residual of the curvature evolution law dR/dt = epsilon (Lap_g R + R^2),
// with dR/dt from non-uniform centered differences of the stored states.
// One max-norm value per interior stored time.
std::vector<double> r_evolution_residual(const Trajectory& traj, double epsilon);

// Sup-norm gap between the directly evolved h and T/S, per stored time.
std::vector<double> h_consistency(const Trajectory& traj);

} // namespace epsflow
