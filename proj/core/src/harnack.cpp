#include "epsflow/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "epsflow/errors.hpp"

namespace epsflow {

namespace {

std::string at_time(double t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, " at t = %.12g", t);
  return buf;
}

void require_positive(const ScalarField& f, const char* name, double t) {
  for (int j = 0; j < f.size(); ++j)
    if (!(f.values[j] > 0.0))
      throw PositivityError(std::string(name) + " is not positive at node " +
                            std::to_string(j) + at_time(t));
}

ScalarField log_field(const ScalarField& f) {
  ScalarField out(f.grid);
  for (int j = 0; j < f.size(); ++j) out.values[j] = std::log(f.values[j]);
  return out;
}

// h = T/S, checked to lie strictly below 1 (positivity of S and T makes the
// lower bound automatic).
ScalarField ratio_field(const FlowState& state) {
  require_positive(state.S, "S", state.t);
  require_positive(state.T, "T", state.t);
  ScalarField h(state.S.grid);
  for (int j = 0; j < h.size(); ++j) {
    h.values[j] = state.T.values[j] / state.S.values[j];
    if (!(h.values[j] < 1.0)) {
      char buf[96];
      std::snprintf(buf, sizeof buf,
                    "order violated: h = T/S reaches %.6g at theta = %.6g",
                    h.values[j], h.grid.node(j));
      throw OrderError(buf + at_time(state.t));
    }
  }
  return h;
}

void update_min(double& acc, double v) { acc = std::min(acc, v); }

} // namespace

ScalarField q_quantity(const FlowState& state, double epsilon) {
  require_positive(state.S, "S", state.t);
  ScalarField lap = laplace_g(log_field(state.S), state.metric);
  ScalarField r = scalar_curvature(state.metric);
  ScalarField q(state.S.grid);
  for (int j = 0; j < q.size(); ++j)
    q.values[j] = lap.values[j] + epsilon * r.values[j];
  return q;
}

ScalarField constrained_term(const FlowState& state) {
  ScalarField h = ratio_field(state);
  ScalarField grad = grad_sq_g(h, state.metric);
  ScalarField out(h.grid);
  for (int j = 0; j < h.size(); ++j)
    out.values[j] = grad.values[j] / (1.0 - h.values[j] * h.values[j]);
  return out;
}

double order_ratio(double h) {
  if (!(h > 0.0 && h < 1.0))
    throw std::domain_error("order_ratio is defined on (0, 1) only");
  return 2.0 * std::log(h) / (1.0 - h * h);
}

HarnackSample margins(const FlowState& state, double epsilon, double c0) {
  if (!(state.t > 0.0))
    throw std::domain_error("margins need t > 0; the 1/t terms are undefined" +
                            at_time(state.t));

  const Grid& g = state.S.grid;
  const int n = g.n_theta();
  const double inv_t = 1.0 / state.t;

  ScalarField q = q_quantity(state, epsilon);
  ScalarField ct = constrained_term(state);
  ScalarField h = ratio_field(state);
  ScalarField r = scalar_curvature(state.metric);

  HarnackSample out;
  out.t = state.t;
  out.min_R = min_value(r);
  out.m_thmD = min_value(q) + inv_t;

  double p_min = q.values[0] - ct.values[0];
  for (int j = 1; j < n; ++j) update_min(p_min, q.values[j] - ct.values[j]);
  out.m_thm11 = p_min + inv_t;

  if (out.min_R > 0.0) {
    ScalarField lap_lnr = laplace_g(log_field(r), state.metric);
    double chow = epsilon * (lap_lnr.values[0] + r.values[0]);
    for (int j = 1; j < n; ++j)
      update_min(chow, epsilon * (lap_lnr.values[j] + r.values[j]));
    out.m_chow = chow + inv_t;
  }

  out.m_h_low = min_value(h) - c0;
  out.m_h_high = 1.0 - max_value(h);
  out.m_cond = out.min_R + 1.0 + order_ratio(c0);

  // M = Hess ln S + (eps/2) R g - (grad h (x) grad h)/(1 - h^2), assembled in
  // round components so the stock contraction applies; its trace reproduces
  // P = Q - constrained term node by node, so |M|^2 >= P^2/2 up to rounding.
  SymTensorField m = hessian_g(log_field(state.S), state.metric);
  ScalarField dth_h = theta_derivative(h);
  for (int j = 0; j < n; ++j) {
    const double th = g.node(j);
    const double s2 = std::sin(th) * std::sin(th);
    const double half_erg = 0.5 * epsilon * r.values[j] *
                            std::exp(2.0 * state.metric.u.values[j]);
    const double pinch = dth_h.values[j] * dth_h.values[j] /
                         (1.0 - h.values[j] * h.values[j]);
    m.a_tt.values[j] += half_erg - pinch;
    m.a_pp.values[j] += half_erg * s2;
  }
  TensorContraction mc = tensor_contract(m, state.metric);
  double elem = mc.norm_sq.values[0] -
                0.5 * (q.values[0] - ct.values[0]) * (q.values[0] - ct.values[0]);
  for (int j = 1; j < n; ++j) {
    const double p = q.values[j] - ct.values[j];
    update_min(elem, mc.norm_sq.values[j] - 0.5 * p * p);
  }
  out.m_elem = elem;

  const double entries[] = {out.m_thm11, out.m_thmD, out.m_h_low, out.m_h_high,
                            out.m_cond,  out.m_elem, out.min_R,
                            out.m_chow.value_or(0.0)};
  for (double v : entries)
    if (!std::isfinite(v))
      throw NonFiniteError("margin evaluation produced a non-finite value" +
                           at_time(state.t));
  return out;
}

double rescale_identity_check(const FlowState& state, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::domain_error("rescale_identity_check needs epsilon > 0");

  ScalarField ln_s = log_field(state.S);
  ScalarField lap = laplace_g(ln_s, state.metric);
  ScalarField r = scalar_curvature(state.metric);
  ScalarField ct = constrained_term(state);

  // Unit-scale description: conformal factor e^{2u}/eps, coefficient 1/eps in
  // front of its Laplacian and gradient terms.
  const double shift = 0.5 * std::log(epsilon);
  MetricState scaled;
  scaled.u = ScalarField(state.metric.u.grid);
  for (int j = 0; j < scaled.u.size(); ++j)
    scaled.u.values[j] = state.metric.u.values[j] - shift;

  FlowState rescaled = state;
  rescaled.metric = scaled;

  ScalarField lap_s = laplace_g(ln_s, scaled);
  ScalarField r_s = scalar_curvature(scaled);
  ScalarField ct_s = constrained_term(rescaled);

  const double alpha = 1.0 / epsilon;
  double worst = 0.0;
  for (int j = 0; j < ln_s.size(); ++j) {
    const double lhs_q = alpha * lap_s.values[j] + r_s.values[j];
    const double rhs_q = lap.values[j] + epsilon * r.values[j];
    worst = std::max(worst, std::abs(lhs_q - rhs_q));
    worst = std::max(worst, std::abs(alpha * ct_s.values[j] - ct.values[j]));
  }
  return worst;
}

MarginSeries collect_margins(const Trajectory& traj, double epsilon, double c0) {
  MarginSeries out;
  out.epsilon = epsilon;
  out.c0 = c0;
  for (const FlowState& state : traj)
    if (state.t > 0.0) out.samples.push_back(margins(state, epsilon, c0));
  if (out.samples.empty())
    throw std::invalid_argument("margin collection needs at least one state with t > 0");

  MarginMinima& gm = out.global_minima;
  const HarnackSample& first = out.samples.front();
  gm.m_thm11 = first.m_thm11;
  gm.m_thmD = first.m_thmD;
  gm.m_chow = first.m_chow;
  gm.m_h_low = first.m_h_low;
  gm.m_h_high = first.m_h_high;
  gm.m_cond = first.m_cond;
  gm.m_elem = first.m_elem;
  gm.min_R = first.min_R;
  for (std::size_t k = 1; k < out.samples.size(); ++k) {
    const HarnackSample& s = out.samples[k];
    update_min(gm.m_thm11, s.m_thm11);
    update_min(gm.m_thmD, s.m_thmD);
    if (s.m_chow)
      gm.m_chow = gm.m_chow ? std::min(*gm.m_chow, *s.m_chow) : *s.m_chow;
    update_min(gm.m_h_low, s.m_h_low);
    update_min(gm.m_h_high, s.m_h_high);
    update_min(gm.m_cond, s.m_cond);
    update_min(gm.m_elem, s.m_elem);
    update_min(gm.min_R, s.min_R);
  }
  return out;
}

} // namespace epsflow
