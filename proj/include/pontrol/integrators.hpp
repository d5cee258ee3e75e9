#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pontrol/adjoint.hpp"
#include "pontrol/model.hpp"

namespace pontrol {

/// Uniform time grid t_k = k * T / n_steps, k = 0..n_steps.
class TimeGrid {
 public:
  /// Throws InvalidInput unless horizon > 0 and n_steps >= 2.
  TimeGrid(double horizon, std::size_t n_steps);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::size_t nodes() const { return steps_ + 1; }
  double step() const { return horizon_ / static_cast<double>(steps_); }
  double time(std::size_t k) const {
    return k == steps_ ? horizon_ : static_cast<double>(k) * step();
  }

  /// Grid over the same horizon with `factor` times as many steps.
  TimeGrid refined(std::size_t factor) const;

  /// Trapezoid quadrature weights (h/2 at the ends, h inside).
  std::vector<double> trapezoid_weights() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t steps_;
};

/// Node values of a piecewise-linear quarantine intensity.
class ControlTrajectory {
 public:
  /// Throws InvalidControl if a value is outside [0, 1) and InvalidInput
  /// if the length differs from grid.nodes().
  ControlTrajectory(TimeGrid grid, std::vector<double> values);

  static ControlTrajectory constant(const TimeGrid& grid, double u);

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }

  /// Control at t_k + frac * h by linear interpolation, frac in [0, 1].
  double between(std::size_t k, double frac) const;

  /// Resamples onto a grid over the same horizon (linear interpolation).
  ControlTrajectory resampled(const TimeGrid& target) const;

  /// Largest |u_{k+1} - u_k|.
  double max_jump() const;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

struct StateTrajectory {
  TimeGrid grid;
  std::vector<NormalizedState> states;

  const NormalizedState& terminal() const { return states.back(); }

  /// Largest |s + e + i + j + r - n| over the nodes.
  double max_conservation_residual() const;
};

struct AdjointTrajectory {
  TimeGrid grid;
  std::vector<AdjointState> costates;
};

/// Classical RK4 on the uncontrolled system. The initial state must be a
/// partition of unity (s+e+i+j+r = 1, n = 1). Throws IntegrationFailure if
/// a compartment drops below -1e-9 or becomes non-finite.
StateTrajectory integrate_forward(ModelKind kind, const EpidemicParams& p,
                                  const NormalizedState& initial,
                                  const TimeGrid& grid);

/// Classical RK4 on the controlled system; substage controls are linear
/// interpolates of the node values.
StateTrajectory integrate_forward(ModelKind kind, const EpidemicParams& p,
                                  const NormalizedState& initial,
                                  const ControlTrajectory& control);

/// RK4 on the costate system from t = T down to t = 0. States and controls
/// at half steps are linear interpolates of the node values. Throws
/// IntegrationFailure on non-finite costates.
AdjointTrajectory integrate_adjoint_backward(ModelKind kind,
                                             const EpidemicParams& p,
                                             const ObjectiveWeights& w,
                                             const StateTrajectory& states,
                                             const ControlTrajectory& control,
                                             const AdjointState& terminal);

struct RefinementResult {
  double coarse_difference = 0.0;  // |y(n) - y(2n)| at t = T
  double fine_difference = 0.0;    // |y(2n) - y(4n)| at t = T
  /// log2(coarse / fine); empty when both differences vanish.
  std::optional<double> order;
};

/// Richardson estimate of the observed order from terminal states on n,
/// 2n and 4n steps. Differences use the largest componentwise relative
/// deviation. Pass `control = nullptr` for the uncontrolled system.
RefinementResult step_refinement_check(ModelKind kind, const EpidemicParams& p,
                                       const NormalizedState& initial,
                                       const ControlTrajectory* control,
                                       const TimeGrid& grid);

}  // namespace pontrol
