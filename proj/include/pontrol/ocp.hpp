#pragma once

#include <optional>
#include <vector>

#include "pontrol/adjoint.hpp"
#include "pontrol/integrators.hpp"
#include "pontrol/model.hpp"

namespace pontrol {

/// Coefficients of the Model1 Hamiltonian written as -A u^2 + B u - C.
struct HamiltonianCoeffs {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;  // diagnostics only; never affects the maximizer
};

/// An optimal quarantine problem on a fixed horizon.
struct OcpProblem {
  ModelKind kind = ModelKind::Model1;
  EpidemicParams params;
  ObjectiveWeights weights;
  ControlBounds bounds;
  NormalizedState initial;
  TimeGrid grid{60.0, 5000};

  void validate() const;

  /// Reference rates for `r0`, default weights and bounds, the reference
  /// initial state and a uniform grid of `steps` steps on [0, horizon].
  static OcpProblem reference(ModelKind kind, double r0, double horizon,
                              std::size_t steps = 5000);
};

enum class Quadrature { Trapezoid, Simpson };

/// Q = a1 (e+i+j)(T) + a2 int (e+i+j) + 0.5 a3 int u^2 on the shared grid.
/// Simpson requires an even number of steps.
double objective(const StateTrajectory& states,
                 const ControlTrajectory& control, const ObjectiveWeights& w,
                 Quadrature rule = Quadrature::Trapezoid);

HamiltonianCoeffs hamiltonian_coeffs_m1(const NormalizedState& x,
                                        const AdjointState& c,
                                        const EpidemicParams& p,
                                        const ObjectiveWeights& w);

/// Threshold below which |A| is treated as zero.
inline constexpr double kDegenerateQuadratic = 1e-14;

/// B / (2A), or empty when |A| < 1e-14.
std::optional<double> indicator_m1(const HamiltonianCoeffs& h);

/// Pointwise maximizer of the Model1 Hamiltonian on [0, u_max]:
/// clamp(B/2A) when A > 0, zero otherwise.
double synthesize_u_m1(const HamiltonianCoeffs& h, const ControlBounds& b);

/// b1 s i (phi1 - phi2) / (a3 n). Throws SingularityError when n <= 1e-12.
double indicator_m2(const NormalizedState& x, const AdjointState& c,
                    const EpidemicParams& p, const ObjectiveWeights& w);

double synthesize_u_m2(double lambda, const ControlBounds& b);

/// PMP control synthesized at every node from states and costates.
std::vector<double> synthesize_control(const OcpProblem& problem,
                                       const StateTrajectory& states,
                                       const AdjointTrajectory& costates);

/// Indicator value at every node (NaN where undefined for Model1).
std::vector<double> indicator_trajectory(const OcpProblem& problem,
                                         const StateTrajectory& states,
                                         const AdjointTrajectory& costates);

/// Nodewise L2 gradient of Q with respect to u(t), i.e. -dH/du:
///   Model1: a3 u - s (2 b1 (1-u) i + b2 j)(psi1 - psi2)
///   Model2: a3 u - b1 s i (phi1 - phi2) / n
/// The derivative of the discretized objective with respect to the node
/// value u_k is approximately weight_k * gradient_k (trapezoid weights).
std::vector<double> objective_gradient(const OcpProblem& problem,
                                       const ControlTrajectory& control,
                                       const StateTrajectory& states,
                                       const AdjointTrajectory& costates);

/// Forward state pass followed by the backward costate pass for `control`.
struct Sweep {
  StateTrajectory states;
  AdjointTrajectory costates;
};
Sweep sweep_once(const OcpProblem& problem, const ControlTrajectory& control);

}  // namespace pontrol
