#include "epsflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace epsflow {

namespace {

void check_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("fields live on different grids");
}

// Even reflection across the poles: the ghost mirror of node -1 is node 0,
// of node n is node n-1.
inline double ghost_lo(const ScalarField& f) { return f.values[0]; }
inline double ghost_hi(const ScalarField& f) { return f.values[f.size() - 1]; }

inline double neighbor(const ScalarField& f, int j) {
  if (j < 0) return ghost_lo(f);
  if (j >= f.size()) return ghost_hi(f);
  return f.values[j];
}

ScalarField theta_second_derivative(const ScalarField& f) {
  const int n = f.size();
  const double inv_d2 = 1.0 / (f.grid.d_theta() * f.grid.d_theta());
  ScalarField out(f.grid);
  for (int j = 0; j < n; ++j) {
    const double fm = neighbor(f, j - 1);
    const double fp = neighbor(f, j + 1);
    out.values[j] = (fp - 2.0 * f.values[j] + fm) * inv_d2;
  }
  return out;
}

} // namespace

ScalarField theta_derivative(const ScalarField& f) {
  const int n = f.size();
  const double inv_2d = 1.0 / (2.0 * f.grid.d_theta());
  ScalarField out(f.grid);
  for (int j = 0; j < n; ++j)
    out.values[j] = (neighbor(f, j + 1) - neighbor(f, j - 1)) * inv_2d;
  return out;
}

ScalarField laplace_round(const ScalarField& f) {
  const Grid& g = f.grid;
  const int n = f.size();
  const double d = g.d_theta();
  const double inv_d2 = 1.0 / (d * d);
  const double inv_2d = 1.0 / (2.0 * d);
  ScalarField out(g);
  for (int j = 0; j < n; ++j) {
    const double fm = neighbor(f, j - 1);
    const double fp = neighbor(f, j + 1);
    const double theta = g.node(j);
    const double cot = std::cos(theta) / std::sin(theta);
    out.values[j] = (fp - 2.0 * f.values[j] + fm) * inv_d2 + cot * (fp - fm) * inv_2d;
  }
  return out;
}

ScalarField scalar_curvature(const MetricState& m) {
  ScalarField lap = laplace_round(m.u);
  ScalarField out(m.u.grid);
  for (int j = 0; j < out.size(); ++j)
    out.values[j] = 2.0 * std::exp(-2.0 * m.u.values[j]) * (1.0 - lap.values[j]);
  return out;
}

ScalarField laplace_g(const ScalarField& f, const MetricState& m) {
  check_same_grid(f, m.u);
  ScalarField out = laplace_round(f);
  for (int j = 0; j < out.size(); ++j)
    out.values[j] *= std::exp(-2.0 * m.u.values[j]);
  return out;
}

ScalarField grad_sq_g(const ScalarField& f, const MetricState& m) {
  check_same_grid(f, m.u);
  ScalarField df = theta_derivative(f);
  ScalarField out(f.grid);
  for (int j = 0; j < out.size(); ++j)
    out.values[j] = std::exp(-2.0 * m.u.values[j]) * df.values[j] * df.values[j];
  return out;
}

SymTensorField hessian_g(const ScalarField& f, const MetricState& m) {
  check_same_grid(f, m.u);
  const Grid& g = f.grid;
  ScalarField df = theta_derivative(f);
  ScalarField d2f = theta_second_derivative(f);
  ScalarField du = theta_derivative(m.u);
  SymTensorField out{ScalarField(g), ScalarField(g)};
  for (int j = 0; j < g.n_theta(); ++j) {
    const double theta = g.node(j);
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double uf = du.values[j] * df.values[j];
    out.a_tt.values[j] = d2f.values[j] - uf;
    out.a_pp.values[j] = s * c * df.values[j] + uf * s * s;
  }
  return out;
}

TensorContraction tensor_contract(const SymTensorField& a, const MetricState& m) {
  check_same_grid(a.a_tt, a.a_pp);
  check_same_grid(a.a_tt, m.u);
  const Grid& g = a.a_tt.grid;
  TensorContraction out{ScalarField(g), ScalarField(g)};
  for (int j = 0; j < g.n_theta(); ++j) {
    const double s = std::sin(g.node(j));
    const double conf = std::exp(-2.0 * m.u.values[j]);
    // Orthonormal-frame components: both O(1) near the poles for smooth data.
    const double at = conf * a.a_tt.values[j];
    const double ap = conf * a.a_pp.values[j] / (s * s);
    out.trace.values[j] = at + ap;
    out.norm_sq.values[j] = at * at + ap * ap;
  }
  return out;
}

} // namespace epsflow
