#include "epsflow/dynamics.hpp"

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

void require_finite(const ScalarField& f, const char* name, double t) {
  if (!all_finite(f))
    throw NonFiniteError(std::string(name) + " contains non-finite values" + at_time(t));
}

// Integration variables: u, l = ln S, m = ln T, and h in value form.
struct SysState {
  ScalarField u, l, m;
  std::optional<ScalarField> h;
};

struct SysDeriv {
  ScalarField du, dl, dm;
  std::optional<ScalarField> dh;
};

SysDeriv sys_rhs(const SysState& y, double eps, bool nonlinear, double t) {
  const Grid& g = y.u.grid;
  const int n = g.n_theta();

  ScalarField r = scalar_curvature(MetricState{y.u});
  ScalarField conf(g);
  for (int j = 0; j < n; ++j) conf.values[j] = std::exp(-2.0 * y.u.values[j]);

  SysDeriv d{ScalarField(g), ScalarField(g), ScalarField(g), std::nullopt};
  if (eps > 0.0)
    for (int j = 0; j < n; ++j) d.du.values[j] = -0.5 * eps * r.values[j];

  // ln S and ln T obey  dL/dt = Lap_g L + |grad L|^2 - L + eps R,
  // with the -L term dropped in linear mode.
  ScalarField lap_l = laplace_round(y.l);
  ScalarField dth_l = theta_derivative(y.l);
  ScalarField lap_m = laplace_round(y.m);
  ScalarField dth_m = theta_derivative(y.m);
  for (int j = 0; j < n; ++j) {
    const double gl = dth_l.values[j];
    const double gm = dth_m.values[j];
    d.dl.values[j] = conf.values[j] * (lap_l.values[j] + gl * gl) + eps * r.values[j] -
                     (nonlinear ? y.l.values[j] : 0.0);
    d.dm.values[j] = conf.values[j] * (lap_m.values[j] + gm * gm) + eps * r.values[j] -
                     (nonlinear ? y.m.values[j] : 0.0);
  }

  if (y.h) {
    ScalarField lap_h = laplace_round(*y.h);
    ScalarField dth_h = theta_derivative(*y.h);
    ScalarField dh(g);
    for (int j = 0; j < n; ++j) {
      const double hv = y.h->values[j];
      double reaction = 0.0;
      if (nonlinear) {
        if (!(hv > 0.0))
          throw PositivityError("direct h track reached a non-positive value" + at_time(t));
        reaction = hv * std::log(hv);
      }
      dh.values[j] = conf.values[j] * (lap_h.values[j] + 2.0 * dth_h.values[j] * dth_l.values[j]) -
                     reaction;
    }
    d.dh = std::move(dh);
  }
  return d;
}

void axpy_into(ScalarField& out, const ScalarField& y, double a, const ScalarField& k) {
  for (int j = 0; j < y.size(); ++j) out.values[j] = y.values[j] + a * k.values[j];
}

SysState stage_state(const SysState& y, double a, const SysDeriv& k, bool freeze_u) {
  SysState s{ScalarField(y.u.grid), ScalarField(y.u.grid), ScalarField(y.u.grid), std::nullopt};
  if (freeze_u)
    s.u = y.u;
  else
    axpy_into(s.u, y.u, a, k.du);
  axpy_into(s.l, y.l, a, k.dl);
  axpy_into(s.m, y.m, a, k.dm);
  if (y.h) {
    ScalarField h(y.u.grid);
    axpy_into(h, *y.h, a, *k.dh);
    s.h = std::move(h);
  }
  return s;
}

void combine_into(ScalarField& out, const ScalarField& y, double w, const ScalarField& k1,
                  const ScalarField& k2, const ScalarField& k3, const ScalarField& k4) {
  for (int j = 0; j < y.size(); ++j)
    out.values[j] = y.values[j] + w * (k1.values[j] + 2.0 * k2.values[j] +
                                       2.0 * k3.values[j] + k4.values[j]);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

FlowDerivatives rhs(const FlowState& state, double epsilon, const StepControl& ctl) {
  require_positive(state.S, "S", state.t);
  require_positive(state.T, "T", state.t);
  require_finite(state.metric.u, "u", state.t);

  const Grid& g = state.S.grid;
  SysState y{state.metric.u, ScalarField(g), ScalarField(g), state.h_direct};
  for (int j = 0; j < g.n_theta(); ++j) {
    y.l.values[j] = std::log(state.S.values[j]);
    y.m.values[j] = std::log(state.T.values[j]);
  }
  SysDeriv d = sys_rhs(y, epsilon, ctl.nonlinear_term, state.t);

  FlowDerivatives out{std::move(d.du), ScalarField(g), ScalarField(g), std::nullopt};
  for (int j = 0; j < g.n_theta(); ++j) {
    out.dS_dt.values[j] = state.S.values[j] * d.dl.values[j];
    out.dT_dt.values[j] = state.T.values[j] * d.dm.values[j];
  }
  out.dh_dt = std::move(d.dh);
  return out;
}

double select_dt(const FlowState& state, const StepControl& ctl, double t_stop) {
  const Grid& g = state.metric.u.grid;
  const double conf_max = std::exp(-2.0 * min_value(state.metric.u));
  double dt = ctl.sigma * g.d_theta() * g.d_theta() / conf_max;
  dt = std::clamp(dt, ctl.dt_min, ctl.dt_max);
  if (std::isfinite(t_stop)) dt = std::min(dt, t_stop - state.t);
  return dt;
}

FlowState step_rk4(const FlowState& state, double dt, double epsilon,
                   const StepControl& ctl) {
  if (dt < 0.0) throw std::invalid_argument("step_rk4 requires dt >= 0");
  if (dt == 0.0) return state;
  require_positive(state.S, "S", state.t);
  require_positive(state.T, "T", state.t);

  const Grid& g = state.S.grid;
  const bool freeze_u = (epsilon == 0.0);
  SysState y{state.metric.u, ScalarField(g), ScalarField(g), state.h_direct};
  for (int j = 0; j < g.n_theta(); ++j) {
    y.l.values[j] = std::log(state.S.values[j]);
    y.m.values[j] = std::log(state.T.values[j]);
  }

  const SysDeriv k1 = sys_rhs(y, epsilon, ctl.nonlinear_term, state.t);
  const SysState y2 = stage_state(y, 0.5 * dt, k1, freeze_u);
  const SysDeriv k2 = sys_rhs(y2, epsilon, ctl.nonlinear_term, state.t);
  const SysState y3 = stage_state(y, 0.5 * dt, k2, freeze_u);
  const SysDeriv k3 = sys_rhs(y3, epsilon, ctl.nonlinear_term, state.t);
  const SysState y4 = stage_state(y, dt, k3, freeze_u);
  const SysDeriv k4 = sys_rhs(y4, epsilon, ctl.nonlinear_term, state.t);

  const double w = dt / 6.0;
  FlowState out;
  out.t = state.t + dt;
  if (freeze_u) {
    out.metric.u = state.metric.u;
  } else {
    out.metric.u = ScalarField(g);
    combine_into(out.metric.u, y.u, w, k1.du, k2.du, k3.du, k4.du);
  }
  ScalarField l_new(g), m_new(g);
  combine_into(l_new, y.l, w, k1.dl, k2.dl, k3.dl, k4.dl);
  combine_into(m_new, y.m, w, k1.dm, k2.dm, k3.dm, k4.dm);
  require_finite(out.metric.u, "u", out.t);
  require_finite(l_new, "ln S", out.t);
  require_finite(m_new, "ln T", out.t);

  out.S = ScalarField(g);
  out.T = ScalarField(g);
  for (int j = 0; j < g.n_theta(); ++j) {
    out.S.values[j] = std::exp(l_new.values[j]);
    out.T.values[j] = std::exp(m_new.values[j]);
  }
  require_finite(out.S, "S", out.t);
  require_finite(out.T, "T", out.t);
  require_positive(out.S, "S", out.t); // exp underflow is an abort, not a clip
  require_positive(out.T, "T", out.t);

  if (y.h) {
    ScalarField h_new(g);
    combine_into(h_new, *y.h, w, *k1.dh, *k2.dh, *k3.dh, *k4.dh);
    require_finite(h_new, "direct h", out.t);
    if (ctl.nonlinear_term) require_positive(h_new, "direct h", out.t);
    out.h_direct = std::move(h_new);
  }
  return out;
}

Trajectory evolve(const FlowState& initial, double epsilon, const StepControl& ctl,
                  double t_end, const std::vector<Observer>& observers,
                  std::vector<double> stop_times) {
  if (!(t_end > initial.t))
    throw std::invalid_argument("evolve requires t_end > initial time");
  require_positive(initial.S, "S", initial.t);
  require_positive(initial.T, "T", initial.t);
  require_finite(initial.metric.u, "u", initial.t);

  std::sort(stop_times.begin(), stop_times.end());
  stop_times.erase(std::unique(stop_times.begin(), stop_times.end()), stop_times.end());

  constexpr double kTimeTol = 1e-13;
  constexpr long kMaxSteps = 5'000'000;

  Trajectory traj{initial};
  FlowState state = initial;
  std::size_t next_stop = 0;
  long steps = 0;
  while (state.t < t_end - kTimeTol) {
    while (next_stop < stop_times.size() && stop_times[next_stop] <= state.t + kTimeTol)
      ++next_stop;
    double t_stop = t_end;
    if (next_stop < stop_times.size() && stop_times[next_stop] < t_end)
      t_stop = stop_times[next_stop];

    const double dt = select_dt(state, ctl, t_stop);
    state = step_rk4(state, dt, epsilon, ctl);

    const double r_max = max_value(scalar_curvature(state.metric));
    if (r_max > ctl.r_ceiling) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "curvature ceiling exceeded: max R = %.6g > %.6g",
                    r_max, ctl.r_ceiling);
      throw BlowupError(buf + at_time(state.t));
    }

    traj.push_back(state);
    for (const auto& obs : observers) obs(state);

    if (++steps > kMaxSteps)
      throw ConfigError("step budget exceeded; check dt_min and t_end");
  }
  return traj;
}

std::function<double(double)> exact_reference(ReferenceCase which,
                                              const ReferenceParams& params) {
  const double eps = params.epsilon;
  if (eps < 0.0) throw std::invalid_argument("epsilon must be nonnegative");

  switch (which) {
  case ReferenceCase::round_r: {
    const double r0 = params.r0;
    return [eps, r0](double t) {
      const double denom = 1.0 - eps * r0 * t;
      if (!(denom > 0.0))
        throw std::domain_error("round_r reference queried at or past the extinction time");
      return r0 / denom;
    };
  }
  case ReferenceCase::const_logs: {
    const double r0 = params.r0;
    const double l0 = params.logs0;
    if (eps == 0.0)
      return [l0](double t) { return l0 * std::exp(-t); };
    return [eps, r0, l0](double t) {
      if (!(1.0 - eps * r0 * t > 0.0))
        throw std::domain_error("const_logs reference queried at or past the extinction time");
      auto forcing = [eps, r0](double s) {
        return std::exp(s) * eps * r0 / (1.0 - eps * r0 * s);
      };
      return std::exp(-t) * (l0 + integrate(forcing, 0.0, t, 1e-13));
    };
  }
  case ReferenceCase::const_h: {
    const double alpha = params.alpha;
    if (!(alpha > 0.0)) throw std::invalid_argument("const_h requires alpha > 0");
    const double log_alpha = std::log(alpha);
    return [log_alpha](double t) { return std::exp(log_alpha * std::exp(-t)); };
  }
  }
  throw std::invalid_argument("unknown reference case");
}

std::vector<double> r_evolution_residual(const Trajectory& traj, double epsilon) {
  const std::size_t n = traj.size();
  if (n < 3) return {};

  std::vector<ScalarField> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = scalar_curvature(traj[i].metric);

  std::vector<double> out(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dt1 = traj[i].t - traj[i - 1].t;
    const double dt2 = traj[i + 1].t - traj[i].t;
    ScalarField lap = laplace_g(r[i], traj[i].metric);
    double worst = 0.0;
    for (int j = 0; j < r[i].size(); ++j) {
      const double fwd = (r[i + 1].values[j] - r[i].values[j]) / dt2;
      const double bwd = (r[i].values[j] - r[i - 1].values[j]) / dt1;
      const double drdt = (dt1 * fwd + dt2 * bwd) / (dt1 + dt2);
      const double law = epsilon * (lap.values[j] + r[i].values[j] * r[i].values[j]);
      worst = std::max(worst, std::abs(drdt - law));
    }
    out[i - 1] = worst;
  }
  return out;
}

std::vector<double> h_consistency(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& state : traj) {
    if (!state.h_direct)
      throw std::invalid_argument("trajectory does not carry the direct h track");
    double worst = 0.0;
    for (int j = 0; j < state.S.size(); ++j) {
      const double ratio = state.T.values[j] / state.S.values[j];
      worst = std::max(worst, std::abs(state.h_direct->values[j] - ratio));
    }
    out.push_back(worst);
  }
  return out;
}

} // namespace epsflow
