#pragma once

#include "epsflow/grid.hpp"

namespace epsflow {

// Conformal factor of an axisymmetric metric g = e^{2u} g_round on the
// 2-sphere, stored through u.
struct MetricState {
  ScalarField u;
};

// Axisymmetric symmetric 2-tensor in round coordinates: the (theta,theta)
// and (phi,phi) components; mixed components vanish by symmetry.
struct SymTensorField {
  ScalarField a_tt;
  ScalarField a_pp;
};

struct TensorContraction {
  ScalarField trace;    // g^{ab} A_ab
  ScalarField norm_sq;  // A_ab A^ab
};

// d/dtheta by second-order central differences with even-reflection ghosts.
ScalarField theta_derivative(const ScalarField& f);

// Round-sphere Laplacian of an axisymmetric function,
//   f'' + cot(theta) f',
// second-order accurate including the pole-adjacent nodes.
ScalarField laplace_round(const ScalarField& f);

// R = 2 e^{-2u} (1 - laplace_round(u)).  The round sphere (u = 0) gives 2.
ScalarField scalar_curvature(const MetricState& m);

// Laplace-Beltrami of g = e^{2u} g_round: e^{-2u} laplace_round(f).
ScalarField laplace_g(const ScalarField& f, const MetricState& m);

// |grad f|^2 in the metric g: e^{-2u} (f')^2.
ScalarField grad_sq_g(const ScalarField& f, const MetricState& m);

// Covariant Hessian of f in g, in round coordinates:
//   (theta,theta): f'' - u' f'
//   (phi,phi):     sin(theta) cos(theta) f' + u' f' sin^2(theta)
SymTensorField hessian_g(const ScalarField& f, const MetricState& m);

// Trace and squared norm of A with indices raised by g:
//   trace   = e^{-2u} (A_tt + A_pp / sin^2)
//   norm_sq = e^{-4u} (A_tt^2 + A_pp^2 / sin^4)
TensorContraction tensor_contract(const SymTensorField& a, const MetricState& m);

} // namespace epsflow
