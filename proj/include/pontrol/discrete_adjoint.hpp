#pragma once

#include <vector>

#include "pontrol/integrators.hpp"
#include "pontrol/model.hpp"
#include "pontrol/ocp.hpp"

namespace pontrol {

/// Transposed Jacobian-vector product of the controlled right-hand side:
/// returns (df/dx)^T v.
NormalizedState rhs_pullback_state(ModelKind kind, const NormalizedState& x,
                                   double u, const EpidemicParams& p,
                                   const NormalizedState& v);

/// (df/du) . v.
double rhs_pullback_control(ModelKind kind, const NormalizedState& x, double u,
                            const EpidemicParams& p, const NormalizedState& v);

struct DiscreteGradient {
  StateTrajectory states;
  double objective = 0.0;
  /// dQ/du_k of the trapezoid-discretized objective under the RK4 scheme.
  std::vector<double> gradient;
};

/// Exact gradient of the discretized objective with respect to the node
/// controls, by reverse-mode differentiation of the RK4 steps.
DiscreteGradient discrete_objective_gradient(const OcpProblem& problem,
                                             const ControlTrajectory& control);

}  // namespace pontrol
