#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pontrol/integrators.hpp"
#include "pontrol/ocp.hpp"
#include "pontrol/verification.hpp"

namespace pontrol {

/// Forward-backward sweep settings.
struct SweepSettings {
  double relaxation = 0.5;      // theta in u <- (1-theta) u + theta u_hat
  std::size_t max_iters = 500;
  double tol_u = 1e-6;          // sup-norm stationarity tolerance
  double tol_q = 1e-8;          // relative objective-change tolerance
  /// Constant starting control; empty selects u_max.
  std::optional<double> initial_guess;

  void validate() const;
};

enum class GradientSource {
  /// Exact derivative of the discretized objective (reverse-mode RK4).
  Discrete,
  /// Nodewise -dH/du from the continuous costate equations.
  Continuous,
};

/// Projected gradient settings. The descent direction is the L2 gradient
/// (dQ/du_k divided by the quadrature weight), the trial step starts from
/// 1/alpha3 and is halved until the Armijo condition holds.
///
/// The continuous source is consistent with the discretized objective only
/// to O(h^2), so with it the iteration usually stalls above `tol`.
struct GradientSettings {
  GradientSource source = GradientSource::Discrete;
  std::size_t max_iters = 20000;
  double tol = 1e-6;          // stationarity tolerance in control units
  double armijo = 1e-4;
  double backtrack = 0.5;
  std::size_t max_backtracks = 60;
  std::optional<double> initial_guess;

  void validate() const;
};

enum class SolverKind { Sweep, ProjectedGradient };

struct SolveReport {
  OcpProblem problem;
  SolverKind solver = SolverKind::Sweep;
  ControlTrajectory u_star;
  StateTrajectory states;
  AdjointTrajectory costates;
  double q_star = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Termination measure of the solver: for the sweep, max_k |u_k - u_hat_k|
  /// with u_hat synthesized from the continuous costate; for the gradient
  /// solver, the sup-norm projected-gradient step |P(u - g/a3) - u|.
  double stationarity_residual = 0.0;
  /// max_k |u_k - u_hat_k| for the reported trajectories, for either solver.
  double pmp_residual = 0.0;
  /// Gradient solver only: stopped because the predicted decrease fell
  /// below the resolution of Q rather than on the tolerance.
  bool precision_floor = false;
  /// Per-iteration stationarity residual (sweep) or projected-gradient
  /// measure (gradient solver).
  std::vector<double> residual_history;
  /// Objective values of accepted iterates.
  std::vector<double> objective_history;
  std::vector<ProbeReport> lemma_probes;

  /// Indicator and Hamiltonian coefficients along the reported solution.
  std::vector<double> indicator() const;
  std::vector<HamiltonianCoeffs> coefficients() const;
};

/// Indirect solution through the maximum-principle boundary value problem:
/// forward state, backward costate, pointwise synthesis, relaxed update.
/// Non-convergence is reported with converged = false.
SolveReport solve_fbsm(const OcpProblem& problem,
                       const SweepSettings& settings = {});

/// Direct solution: projected gradient descent on the node values.
SolveReport solve_projected_gradient(const OcpProblem& problem,
                                     const GradientSettings& settings = {});

struct CrossValidation {
  SolveReport sweep;
  SolveReport gradient;
  double relative_objective_gap = 0.0;  // |dQ| / max(|Q|)
  double control_gap = 0.0;             // sup-norm of u_sweep - u_gradient
  std::vector<double> sweep_residuals;  // |u - synthesized| per node
  std::vector<double> gradient_residuals;
  /// False when either solver failed to converge.
  bool complete = false;
};

CrossValidation cross_validate(const OcpProblem& problem,
                               const SweepSettings& sweep = {},
                               const GradientSettings& gradient = {});

/// Objective of a given control (one forward pass).
double evaluate_objective(const OcpProblem& problem,
                          const ControlTrajectory& control);

/// |u_k - synthesized_k| at every node of a report.
std::vector<double> stationarity_residuals(const SolveReport& report);

std::string_view to_string(SolverKind kind);

}  // namespace pontrol
