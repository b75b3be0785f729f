#include "epsflow/pathopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "epsflow/errors.hpp"
#include "epsflow/geometry.hpp"

namespace epsflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeTol = 1e-12;

void validate_trajectory(const Trajectory& traj) {
  if (traj.size() < 2)
    throw std::invalid_argument("trajectory too short: need at least two stored states");
}

// Index of the stored state nearest to t (times are strictly increasing).
std::size_t nearest_state(const Trajectory& traj, double t) {
  if (t < traj.front().t - kTimeTol || t > traj.back().t + kTimeTol)
    throw std::invalid_argument("time " + std::to_string(t) +
                                " is outside the stored trajectory range");
  std::size_t lo = 0, hi = traj.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (traj[mid].t <= t ? lo : hi) = mid;
  }
  return (t - traj[lo].t <= traj[hi].t - t) ? lo : hi;
}

// Stored state whose time matches t; stricter than nearest_state.
std::size_t exact_state(const Trajectory& traj, double t) {
  const std::size_t k = nearest_state(traj, t);
  if (std::abs(traj[k].t - t) > kTimeTol)
    throw std::invalid_argument("path sample time " + std::to_string(t) +
                                " does not coincide with a stored state");
  return k;
}

int snap_node(const Grid& g, double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi))
    throw std::invalid_argument("colatitude must lie strictly inside (0, pi)");
  const long j = std::lround(theta / g.d_theta() - 0.5);
  return static_cast<int>(std::clamp<long>(j, 0, g.n_theta() - 1));
}

// Conformal exponent u at (t, theta), linear in time between the bracketing
// stored states and linear in colatitude between the bracketing nodes (the
// half-cells touching the poles clamp to the nearest node).
double u_at(const Trajectory& traj, double t, double theta) {
  std::size_t lo = nearest_state(traj, t);
  if (traj[lo].t > t && lo > 0) --lo;
  const std::size_t hi = std::min(lo + 1, traj.size() - 1);
  const double span = traj[hi].t - traj[lo].t;
  const double wt = (span > 0.0) ? std::clamp((t - traj[lo].t) / span, 0.0, 1.0) : 0.0;

  const Grid& g = traj[lo].metric.u.grid;
  const double pos = theta / g.d_theta() - 0.5;
  const int jlo = static_cast<int>(std::clamp(std::floor(pos), 0.0,
                                              static_cast<double>(g.n_theta() - 1)));
  const int jhi = std::min(jlo + 1, g.n_theta() - 1);
  const double wj = std::clamp(pos - jlo, 0.0, 1.0);

  const auto& ulo = traj[lo].metric.u.values;
  const auto& uhi = traj[hi].metric.u.values;
  const double u_t_lo = (1.0 - wt) * ulo[jlo] + wt * uhi[jlo];
  const double u_t_hi = (1.0 - wt) * ulo[jhi] + wt * uhi[jhi];
  return (1.0 - wj) * u_t_lo + wj * u_t_hi;
}

double integrand(const Trajectory& traj, double t, double theta, double v2) {
  return std::exp(t) * (std::exp(2.0 * u_at(traj, t, theta)) * v2 + 4.0 / t);
}

double ln_s_at(const FlowState& state, int node) {
  const double s = state.S.values[node];
  if (!(s > 0.0))
    throw PositivityError("S is not positive at the queried endpoint");
  return std::log(s);
}

} // namespace

double action(const SpaceTimePath& path, const Trajectory& traj, SegmentRule rule) {
  validate_trajectory(traj);
  if (path.times.size() != path.thetas.size())
    throw std::invalid_argument("path needs one colatitude per time sample");
  if (path.times.size() < 2)
    throw std::invalid_argument("path needs at least two samples");
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k)
    if (!(path.times[k] < path.times[k + 1]))
      throw std::invalid_argument("path times must increase strictly");
  if (path.times.front() < traj.front().t - kTimeTol ||
      path.times.back() > traj.back().t + kTimeTol)
    throw std::invalid_argument("path exits the stored time range");
  if (!(path.times.front() > 0.0))
    throw std::invalid_argument("path must start at a positive time");

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const double ta = path.times[k], tb = path.times[k + 1];
    const double tha = path.thetas[k], thb = path.thetas[k + 1];
    const double dt = tb - ta;
    const double v = (thb - tha) / dt;
    const double v2 = v * v;
    double seg;
    if (rule == SegmentRule::trapezoid) {
      seg = 0.5 * dt * (integrand(traj, ta, tha, v2) + integrand(traj, tb, thb, v2));
    } else {
      seg = dt * integrand(traj, 0.5 * (ta + tb), 0.5 * (tha + thb), v2);
    }
    total += 0.25 * seg;
  }
  return total;
}

PathResult gamma_dp(const PathQuery& query, const Trajectory& traj, int window,
                    int layers, SegmentRule rule) {
  validate_trajectory(traj);
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  if (layers < 0) throw std::invalid_argument("layers must be nonnegative");
  if (!(query.t1 < query.t2))
    throw std::invalid_argument("query needs t1 < t2");

  const std::size_t i1 = nearest_state(traj, query.t1);
  const std::size_t i2 = nearest_state(traj, query.t2);
  if (i2 <= i1)
    throw std::invalid_argument("query times snap to fewer than two distinct stored states");
  if (!(traj[i1].t > 0.0))
    throw std::invalid_argument("query start snaps to a nonpositive time");

  const Grid& g = traj[i1].metric.u.grid;
  const int n = g.n_theta();
  const int j1 = snap_node(g, query.theta1);
  const int j2 = snap_node(g, query.theta2);

  // Evenly spread sub-ladder of stored indices; spreading by count rather
  // than stride keeps ladders nested when the segment count doubles.
  std::vector<std::size_t> ladder;
  const std::size_t span = i2 - i1;
  if (layers == 0 || static_cast<std::size_t>(layers) >= span) {
    ladder.resize(span + 1);
    for (std::size_t k = 0; k <= span; ++k) ladder[k] = i1 + k;
  } else {
    ladder.push_back(i1);
    for (int j = 1; j <= layers; ++j) {
      const std::size_t idx =
          i1 + static_cast<std::size_t>(std::lround(
                   static_cast<double>(span) * j / layers));
      if (idx > ladder.back()) ladder.push_back(idx);
    }
  }
  const std::size_t n_layers = ladder.size();

  // Per-layer tables: time factors and conformal factors per node.
  std::vector<double> layer_t(n_layers), layer_exp(n_layers), layer_fourt(n_layers);
  std::vector<std::vector<double>> conf(n_layers, std::vector<double>(n));
  for (std::size_t k = 0; k < n_layers; ++k) {
    const FlowState& st = traj[ladder[k]];
    layer_t[k] = st.t;
    layer_exp[k] = std::exp(st.t);
    layer_fourt[k] = 4.0 / st.t;
    for (int j = 0; j < n; ++j)
      conf[k][j] = std::exp(2.0 * st.metric.u.values[j]);
  }

  auto seg_cost = [&](std::size_t k, int src, int dst) {
    const double dt = layer_t[k + 1] - layer_t[k];
    const double v = (g.node(dst) - g.node(src)) / dt;
    const double v2 = v * v;
    if (rule == SegmentRule::trapezoid) {
      const double fa = layer_exp[k] * (conf[k][src] * v2 + layer_fourt[k]);
      const double fb = layer_exp[k + 1] * (conf[k + 1][dst] * v2 + layer_fourt[k + 1]);
      return 0.125 * dt * (fa + fb);
    }
    // Midpoint rule: u interpolated to the segment's midpoint time (average
    // of the two layers) and colatitude (average of the bracketing nodes).
    const double tm = 0.5 * (layer_t[k] + layer_t[k + 1]);
    const int jm_lo = (src + dst) / 2, jm_hi = (src + dst + 1) / 2;
    const auto& ua = traj[ladder[k]].metric.u.values;
    const auto& ub = traj[ladder[k + 1]].metric.u.values;
    const double um = 0.25 * (ua[jm_lo] + ub[jm_lo] + ua[jm_hi] + ub[jm_hi]);
    return 0.25 * dt * std::exp(tm) * (std::exp(2.0 * um) * v2 + 4.0 / tm);
  };

  std::vector<double> cost(n, kInf), next(n, kInf);
  std::vector<std::vector<int>> parent(n_layers - 1, std::vector<int>(n, -1));
  cost[j1] = 0.0;
  for (std::size_t k = 0; k + 1 < n_layers; ++k) {
    std::fill(next.begin(), next.end(), kInf);
    for (int dst = 0; dst < n; ++dst) {
      double best = kInf;
      int best_src = -1;
      // Candidates in ascending |step| so that strict improvement implements
      // the smallest-move tie-break.
      for (int step = 0; step <= window; ++step) {
        const int n_dirs = (step == 0) ? 1 : 2;
        for (int q = 0; q < n_dirs; ++q) {
          const int src = dst - ((q == 0) ? -step : step);
          if (src < 0 || src >= n || !std::isfinite(cost[src])) continue;
          const double c = cost[src] + seg_cost(k, src, dst);
          if (c < best) {
            best = c;
            best_src = src;
          }
        }
      }
      next[dst] = best;
      parent[k][dst] = best_src;
    }
    std::swap(cost, next);
  }

  if (!std::isfinite(cost[j2])) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "window %d cannot connect nodes %d and %d over %zu layers",
                  window, j1, j2, n_layers);
    throw ConfigError(buf);
  }

  PathResult out;
  out.gamma_value = cost[j2];
  out.path.times.resize(n_layers);
  out.path.thetas.resize(n_layers);
  int node = j2;
  for (std::size_t k = n_layers; k-- > 0;) {
    out.path.times[k] = layer_t[k];
    out.path.thetas[k] = g.node(node);
    if (k > 0) node = parent[k - 1][node];
  }

  out.lhs = std::exp(traj[i1].t) * ln_s_at(traj[i1], j1);
  out.rhs = std::exp(traj[i2].t) * ln_s_at(traj[i2], j2) + out.gamma_value;
  out.margin = out.rhs - out.lhs;
  if (!std::isfinite(out.margin))
    throw NonFiniteError("integrated-inequality margin is not finite");
  return out;
}

PathResult verify_integrated(const PathQuery& query, const Trajectory& traj,
                             int window) {
  return gamma_dp(query, traj, window);
}

std::vector<double> pathwise_differential_check(const SpaceTimePath& path,
                                                const Trajectory& traj) {
  validate_trajectory(traj);
  if (path.times.size() != path.thetas.size())
    throw std::invalid_argument("path needs one colatitude per time sample");
  if (path.times.size() < 2)
    throw std::invalid_argument("path needs at least two samples");

  const std::size_t count = path.times.size();
  std::vector<std::size_t> at(count);
  for (std::size_t k = 0; k < count; ++k)
    at[k] = exact_state(traj, path.times[k]);

  const Grid& g = traj.front().metric.u.grid;
  std::vector<double> margins;
  if (count < 3) return margins;
  margins.reserve(count - 2);

  for (std::size_t k = 1; k + 1 < count; ++k) {
    const FlowState& prev = traj[at[k - 1]];
    const FlowState& here = traj[at[k]];
    const FlowState& next = traj[at[k + 1]];
    const int jk = snap_node(g, path.thetas[k]);
    // Weighted centered differences stay second-order even where stored
    // steps are uneven (the stride before a requested stop time is clipped).
    const double dt_fwd = next.t - here.t;
    const double dt_bwd = here.t - prev.t;

    ScalarField ln_s(g);
    for (int j = 0; j < g.n_theta(); ++j)
      ln_s.values[j] = std::log(here.S.values[j]);
    const double l_here = ln_s.values[jk];
    auto centered = [&](double fp, double fh, double fn) {
      const double fwd = (fn - fh) / dt_fwd;
      const double bwd = (fh - fp) / dt_bwd;
      return (dt_bwd * fwd + dt_fwd * bwd) / (dt_fwd + dt_bwd);
    };
    const double dl_dt = centered(std::log(prev.S.values[jk]), l_here,
                                  std::log(next.S.values[jk]));
    const double l_th = theta_derivative(ln_s).values[jk];
    const double v =
        centered(path.thetas[k - 1], path.thetas[k], path.thetas[k + 1]);
    const double conf = std::exp(2.0 * here.metric.u.values[jk]);

    const double et = std::exp(here.t);
    margins.push_back(et * (l_here + dl_dt + l_th * v) +
                      et * (0.25 * conf * v * v + 1.0 / here.t));
  }
  return margins;
}

} // namespace epsflow
