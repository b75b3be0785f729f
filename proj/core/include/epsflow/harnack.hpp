#pragma once

// Differential-inequality margins evaluated on flow states.  Every quantity
// here is a pointwise field (Q, the gradient-constraint term) or a scalar
// margin whose nonnegativity the solver is expected to maintain; margins are
// reported as (worst node value) + 1/t so that "margin > 0" means the
// corresponding inequality holds strictly at that instant.

#include <optional>
#include <vector>

#include "epsflow/dynamics.hpp"
#include "epsflow/geometry.hpp"
#include "epsflow/grid.hpp"

namespace epsflow {

// One evaluation instant.  m_chow is absent when the curvature changes sign,
// since the trace-Harnack expression involves ln R.
struct HarnackSample {
  double t = 0.0;
  double m_thm11 = 0.0; // constrained margin: min(Q - grad term) + 1/t
  double m_thmD = 0.0;  // unconstrained margin: min(Q) + 1/t
  std::optional<double> m_chow; // trace margin: min(eps(lap ln R + R)) + 1/t
  double m_h_low = 0.0;  // min(h) - c0
  double m_h_high = 0.0; // 1 - max(h)
  double m_cond = 0.0;   // min R + 1 + 2 ln(c0)/(1 - c0^2)
  double m_elem = 0.0;   // min(|M|^2 - P^2/2), slack of the 2-D trace bound
  double min_R = 0.0;
};

// Fieldwise minima over a series of samples; m_chow is the minimum over the
// samples where it applied, absent if it never did.
struct MarginMinima {
  double m_thm11 = 0.0;
  double m_thmD = 0.0;
  std::optional<double> m_chow;
  double m_h_low = 0.0;
  double m_h_high = 0.0;
  double m_cond = 0.0;
  double m_elem = 0.0;
  double min_R = 0.0;
};

struct MarginSeries {
  double epsilon = 0.0;
  double c0 = 0.0;
  std::vector<HarnackSample> samples; // strictly increasing in t
  MarginMinima global_minima;
};

// Q = lap_g ln S + eps R.  Throws PositivityError unless S > 0 everywhere.
ScalarField q_quantity(const FlowState& state, double epsilon);

// |grad h|^2_g / (1 - h^2) with h = T/S.  Throws PositivityError unless
// S, T > 0 and OrderError if h reaches 1 anywhere.
ScalarField constrained_term(const FlowState& state);

// 2 ln(h) / (1 - h^2); increasing on (0,1), which is why evaluating it at the
// lower bound c0 suffices for the curvature condition.  Throws
// std::domain_error outside (0,1).
double order_ratio(double h);

// Evaluate every margin at one state.  Throws std::domain_error for t <= 0
// (the 1/t terms are undefined) and propagates the field-level errors above.
HarnackSample margins(const FlowState& state, double epsilon, double c0);

// Re-express the constrained quantities through the unit-scale metric
// (conformal factor divided by eps) and return the worst absolute mismatch
// against the direct computation.  Exactly zero for eps = 1; throws
// std::domain_error unless eps > 0.
double rescale_identity_check(const FlowState& state, double epsilon);

// Margins for every stored state with t > 0, plus their global minima.
// Throws std::invalid_argument when no state is eligible.
MarginSeries collect_margins(const Trajectory& traj, double epsilon, double c0);

} // namespace epsflow
