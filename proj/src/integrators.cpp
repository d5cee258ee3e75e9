#include "pontrol/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pontrol/errors.hpp"

namespace pontrol {

namespace {

constexpr double kPositivityTol = 1e-9;
constexpr double kPartitionTol = 1e-9;

void check_initial(const NormalizedState& x) {
  for (double v : x.as_array()) {
    if (!(v >= 0.0)) throw InvalidInput("initial fractions must be >= 0");
  }
  if (std::abs(x.s + x.e + x.i + x.j + x.r - 1.0) > kPartitionTol ||
      std::abs(x.n - 1.0) > kPartitionTol) {
    throw InvalidInput("initial fractions must add up to n(0) = 1");
  }
}

void check_node(const NormalizedState& x, std::size_t k) {
  for (double v : x.as_array()) {
    if (!std::isfinite(v) || v < -kPositivityTol) {
      throw IntegrationFailure("state lost positivity at node " +
                               std::to_string(k));
    }
  }
}

template <typename Rhs>
StateTrajectory march_forward(const TimeGrid& grid,
                              const NormalizedState& initial, Rhs&& rhs) {
  check_initial(initial);
  StateTrajectory out{grid, {}};
  out.states.reserve(grid.nodes());
  out.states.push_back(initial);
  const double h = grid.step();
  NormalizedState x = initial;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const NormalizedState k1 = rhs(k, 0.0, x);
    const NormalizedState k2 = rhs(k, 0.5, x + (0.5 * h) * k1);
    const NormalizedState k3 = rhs(k, 0.5, x + (0.5 * h) * k2);
    const NormalizedState k4 = rhs(k, 1.0, x + h * k3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_node(x, k + 1);
    out.states.push_back(x);
  }
  return out;
}

NormalizedState lerp(const NormalizedState& a, const NormalizedState& b,
                     double frac) {
  return a + frac * (b - a);
}

double relative_gap(const NormalizedState& a, const NormalizedState& b) {
  const auto x = a.as_array();
  const auto y = b.as_array();
  double worst = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double diff = std::abs(x[c] - y[c]);
    if (diff == 0.0) continue;
    worst = std::max(worst, diff / std::max(std::abs(y[c]), 1e-300));
  }
  return worst;
}

}  // namespace

TimeGrid::TimeGrid(double horizon, std::size_t n_steps)
    : horizon_(horizon), steps_(n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidInput("time horizon must be positive");
  }
  if (n_steps < 2) throw InvalidInput("time grid needs at least 2 steps");
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
  return TimeGrid(horizon_, steps_ * factor);
}

std::vector<double> TimeGrid::trapezoid_weights() const {
  std::vector<double> w(nodes(), step());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

ControlTrajectory::ControlTrajectory(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.nodes()) {
    throw InvalidInput("control length does not match the grid");
  }
  for (double u : values_) {
    if (!(u >= 0.0 && u < 1.0)) {
      throw InvalidControl("control value " + std::to_string(u) +
                           " outside [0, 1)");
    }
  }
}

ControlTrajectory ControlTrajectory::constant(const TimeGrid& grid, double u) {
  return ControlTrajectory(grid, std::vector<double>(grid.nodes(), u));
}

double ControlTrajectory::between(std::size_t k, double frac) const {
  if (frac == 0.0) return values_[k];
  if (frac == 1.0) return values_[k + 1];
  return values_[k] + frac * (values_[k + 1] - values_[k]);
}

ControlTrajectory ControlTrajectory::resampled(const TimeGrid& target) const {
  if (target.horizon() != grid_.horizon()) {
    throw InvalidInput("cannot resample control onto a different horizon");
  }
  std::vector<double> out(target.nodes());
  const double scale = static_cast<double>(grid_.steps()) /
                       static_cast<double>(target.steps());
  for (std::size_t k = 0; k < target.nodes(); ++k) {
    const double pos = static_cast<double>(k) * scale;
    const auto left = std::min<std::size_t>(static_cast<std::size_t>(pos),
                                            grid_.steps() - 1);
    out[k] = between(left, std::min(pos - static_cast<double>(left), 1.0));
  }
  return ControlTrajectory(target, std::move(out));
}

double ControlTrajectory::max_jump() const {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
    worst = std::max(worst, std::abs(values_[k + 1] - values_[k]));
  }
  return worst;
}

double StateTrajectory::max_conservation_residual() const {
  double worst = 0.0;
  for (const auto& x : states) {
    worst = std::max(worst, std::abs(x.conservation_residual()));
  }
  return worst;
}

StateTrajectory integrate_forward(ModelKind kind, const EpidemicParams& p,
                                  const NormalizedState& initial,
                                  const TimeGrid& grid) {
  return march_forward(grid, initial,
                       [&](std::size_t, double, const NormalizedState& x) {
                         return rhs_uncontrolled(kind, x, p);
                       });
}

StateTrajectory integrate_forward(ModelKind kind, const EpidemicParams& p,
                                  const NormalizedState& initial,
                                  const ControlTrajectory& control) {
  return march_forward(
      control.grid(), initial,
      [&](std::size_t k, double frac, const NormalizedState& x) {
        return rhs_controlled(kind, x, control.between(k, frac), p);
      });
}

AdjointTrajectory integrate_adjoint_backward(ModelKind kind,
                                             const EpidemicParams& p,
                                             const ObjectiveWeights& w,
                                             const StateTrajectory& states,
                                             const ControlTrajectory& control,
                                             const AdjointState& terminal) {
  const TimeGrid& grid = states.grid;
  if (!(grid == control.grid()) || states.states.size() != grid.nodes()) {
    throw InvalidInput("state and control trajectories must share a grid");
  }
  AdjointTrajectory out{grid, std::vector<AdjointState>(grid.nodes())};
  const double h = grid.step();
  AdjointState c = terminal;
  out.costates.back() = c;
  for (std::size_t k = grid.steps(); k-- > 0;) {
    const NormalizedState& x_right = states.states[k + 1];
    const NormalizedState& x_left = states.states[k];
    const NormalizedState x_mid = lerp(x_left, x_right, 0.5);
    const double u_right = control[k + 1];
    const double u_left = control[k];
    const double u_mid = control.between(k, 0.5);

    const AdjointState k1 = adjoint_rhs(kind, x_right, u_right, c, p, w);
    const AdjointState k2 =
        adjoint_rhs(kind, x_mid, u_mid, c + (-0.5 * h) * k1, p, w);
    const AdjointState k3 =
        adjoint_rhs(kind, x_mid, u_mid, c + (-0.5 * h) * k2, p, w);
    const AdjointState k4 =
        adjoint_rhs(kind, x_left, u_left, c + (-h) * k3, p, w);
    c = c + (-h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    for (double v : {c.s, c.e, c.i, c.j, c.n}) {
      if (!std::isfinite(v)) {
        throw IntegrationFailure("costate became non-finite at node " +
                                 std::to_string(k));
      }
    }
    out.costates[k] = c;
  }
  return out;
}

RefinementResult step_refinement_check(ModelKind kind, const EpidemicParams& p,
                                       const NormalizedState& initial,
                                       const ControlTrajectory* control,
                                       const TimeGrid& grid) {
  auto terminal_on = [&](std::size_t factor) {
    const TimeGrid g = grid.refined(factor);
    if (control == nullptr) {
      return integrate_forward(kind, p, initial, g).terminal();
    }
    return integrate_forward(kind, p, initial, control->resampled(g))
        .terminal();
  };
  const NormalizedState y1 = terminal_on(1);
  const NormalizedState y2 = terminal_on(2);
  const NormalizedState y4 = terminal_on(4);

  RefinementResult out;
  out.coarse_difference = relative_gap(y1, y2);
  out.fine_difference = relative_gap(y2, y4);
  if (out.coarse_difference > 0.0 && out.fine_difference > 0.0) {
    out.order = std::log2(out.coarse_difference / out.fine_difference);
  }
  return out;
}

}  // namespace pontrol
