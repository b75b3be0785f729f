#include "epsflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "epsflow/errors.hpp"

namespace epsflow {

Grid::Grid(int n_theta) : n_(n_theta), d_(std::numbers::pi / n_theta) {}

std::vector<double> Grid::nodes() const {
  std::vector<double> out(n_);
  for (int j = 0; j < n_; ++j) out[j] = node(j);
  return out;
}

Grid make_grid(int n_theta) {
  if (n_theta < 8)
    throw ConfigError("n_theta must be at least 8, got " + std::to_string(n_theta));
  return Grid(n_theta);
}

double min_value(const ScalarField& f) {
  return *std::min_element(f.values.begin(), f.values.end());
}

double max_value(const ScalarField& f) {
  return *std::max_element(f.values.begin(), f.values.end());
}

bool all_finite(const ScalarField& f) {
  return std::all_of(f.values.begin(), f.values.end(),
                     [](double v) { return std::isfinite(v); });
}

} // namespace epsflow
