#pragma once

#include <vector>

namespace epsflow {

// Cell-centered colatitude grid on (0, pi).  Nodes sit at
// theta_j = (j + 1/2) * pi / n, so neither pole carries a node; derivative
// stencils close with even-reflection ghost values across the poles.
class Grid {
public:
  Grid() = default;
  explicit Grid(int n_theta);

  int n_theta() const { return n_; }
  double d_theta() const { return d_; }
  double node(int j) const { return (j + 0.5) * d_; }
  std::vector<double> nodes() const;

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  int n_ = 0;
  double d_ = 0.0;
};

// n_theta >= 8 keeps the pole-adjacent stencils meaningful.
Grid make_grid(int n_theta);

// Axisymmetric scalar sampled at the grid nodes.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g) : grid(g), values(g.n_theta(), 0.0) {}
  ScalarField(const Grid& g, double fill) : grid(g), values(g.n_theta(), fill) {}

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int j) const { return values[j]; }
  double& operator[](int j) { return values[j]; }

  template <class Fn>
  static ScalarField sample(const Grid& g, Fn&& fn) {
    ScalarField f(g);
    for (int j = 0; j < g.n_theta(); ++j) f.values[j] = fn(g.node(j));
    return f;
  }
};

double min_value(const ScalarField& f);
double max_value(const ScalarField& f);
bool all_finite(const ScalarField& f);

} // namespace epsflow
