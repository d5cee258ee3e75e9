#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pontrol/integrators.hpp"
#include "pontrol/ocp.hpp"

namespace pontrol {

struct SolveReport;

/// Outcome of one runtime check. `pass` holds exactly when violations == 0.
struct ProbeReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_residual = 0.0;
  bool pass = true;
  /// The premise of the checked implication never occurred.
  bool vacuous = false;
  std::string detail;
};

/// Positivity (> -1e-9), boundedness (<= 1), non-increasing n and the
/// conservation identity (to 1e-9) at every node. A node failing any of
/// them counts as one violation.
ProbeReport probe_lemma1(const StateTrajectory& trajectory);

/// For every entry with A < 0 the indicator B/2A must exceed u_max / 2.
ProbeReport probe_lemma3(std::span<const HamiltonianCoeffs> coeffs,
                         const ControlBounds& bounds);
/// Same check along a converged Model1 solve, on the nodes before T.
ProbeReport probe_lemma3(const SolveReport& report);

/// u(T) > 0 whenever the terminal weight alpha1 is positive.
ProbeReport probe_terminal_control(const ControlTrajectory& control,
                                   const ObjectiveWeights& weights);

/// Max inter-node control jump must shrink with the step: coarse / fine
/// jump ratio at least `min_ratio` times the step ratio (2 for halving).
ProbeReport probe_continuity(const ControlTrajectory& fine,
                             const ControlTrajectory& coarse,
                             double min_ratio = 0.95);

/// Sup-norm control change non-increasing over the last `window` sweep
/// iterations of a converged run.
ProbeReport probe_contraction(const SolveReport& report,
                              std::size_t window = 10);

/// Q(u*) <= Q(0) and Q(u*) <= Q(u_max).
ProbeReport probe_optimality_sanity(const SolveReport& report);

/// Root w in [w_min, 1] of M w^2 + L w = lam f(w_hat) + (1-lam) f(w_tilde)
/// with f(w) = M w^2 + L w.
double convexity_midpoint(double M, double L, double w_hat, double w_tilde,
                          double lam);

struct ConvexityProbeConfig {
  std::size_t trials = 10000;
  std::uint64_t seed = 20200701;
  double u_max = 0.9;
  double alpha3 = 5.0e-5;
  double beta1 = 0.0;  // 0 selects the R0 = 3 reference rates
  double beta2 = 0.0;
};

/// Randomized check of the convexity construction for the velocity set
/// of the Model1 problem; see convexity_midpoint.
ProbeReport probe_convexity(const ConvexityProbeConfig& config = {});

struct GradientProbeConfig {
  std::size_t directions = 20;
  std::uint64_t seed = 7;
  double fd_step = 1e-6;
  double tolerance = 1e-4;
};

/// Compares weight_k * objective_gradient against central differences of
/// the discretized objective under single-node bumps of the control.
ProbeReport probe_gradient(const OcpProblem& problem,
                           const ControlTrajectory& control,
                           const GradientProbeConfig& config = {});

}  // namespace pontrol
