#include "pontrol/ocp.hpp"

#include <cmath>
#include <limits>

#include "pontrol/errors.hpp"

namespace pontrol {

void OcpProblem::validate() const {
  params.validate();
  weights.validate();
  bounds.validate();
  for (double v : initial.as_array()) {
    if (!(v >= 0.0)) throw InvalidInput("initial fractions must be >= 0");
  }
  if (std::abs(initial.s + initial.e + initial.i + initial.j + initial.r -
               1.0) > 1e-9 ||
      std::abs(initial.n - 1.0) > 1e-9) {
    throw InvalidInput("initial fractions must add up to n(0) = 1");
  }
}

OcpProblem OcpProblem::reference(ModelKind kind, double r0, double horizon,
                                 std::size_t steps) {
  OcpProblem p;
  p.kind = kind;
  p.params = reference_params(r0);
  p.initial = reference_initial_state();
  p.grid = TimeGrid(horizon, steps);
  return p;
}

double objective(const StateTrajectory& states,
                 const ControlTrajectory& control, const ObjectiveWeights& w,
                 Quadrature rule) {
  const TimeGrid& grid = states.grid;
  if (!(grid == control.grid())) {
    throw InvalidInput("objective needs state and control on one grid");
  }
  const std::size_t n = grid.steps();
  const double h = grid.step();
  auto running = [&](std::size_t k) {
    const double u = control[k];
    return w.alpha2 * states.states[k].infected() + 0.5 * w.alpha3 * u * u;
  };

  double integral = 0.0;
  if (rule == Quadrature::Trapezoid) {
    for (std::size_t k = 1; k < n; ++k) integral += running(k);
    integral += 0.5 * (running(0) + running(n));
    integral *= h;
  } else {
    if (n % 2 != 0) throw InvalidInput("Simpson rule needs an even step count");
    for (std::size_t k = 1; k < n; ++k) {
      integral += (k % 2 == 1 ? 4.0 : 2.0) * running(k);
    }
    integral += running(0) + running(n);
    integral *= h / 3.0;
  }
  return w.terminal_term(states.terminal()) + integral;
}

HamiltonianCoeffs hamiltonian_coeffs_m1(const NormalizedState& x,
                                        const AdjointState& c,
                                        const EpidemicParams& p,
                                        const ObjectiveWeights& w) {
  const double gap = c.infection_gap();
  HamiltonianCoeffs h;
  h.A = p.beta1 * x.s * x.i * gap + 0.5 * w.alpha3;
  h.B = x.s * (2.0 * p.beta1 * x.i + p.beta2 * x.j) * gap;
  h.C = x.s * (p.beta1 * x.i + p.beta2 * x.j) * gap +
        p.gamma * x.e * (c.e - p.sigma1 * c.i - p.sigma2 * c.j) +
        p.rho1 * x.i * c.i + p.rho2 * x.j * c.j + w.alpha2 * x.infected();
  return h;
}

std::optional<double> indicator_m1(const HamiltonianCoeffs& h) {
  if (std::abs(h.A) < kDegenerateQuadratic) return std::nullopt;
  return 0.5 * h.B / h.A;
}

double synthesize_u_m1(const HamiltonianCoeffs& h, const ControlBounds& b) {
  if (h.A < kDegenerateQuadratic) return 0.0;
  return b.clamp(0.5 * h.B / h.A);
}

double indicator_m2(const NormalizedState& x, const AdjointState& c,
                    const EpidemicParams& p, const ObjectiveWeights& w) {
  if (!(x.n > 1e-12)) {
    throw SingularityError("indicator undefined for vanishing population");
  }
  return p.beta1 * x.s * x.i * c.infection_gap() / (w.alpha3 * x.n);
}

double synthesize_u_m2(double lambda, const ControlBounds& b) {
  return b.clamp(lambda);
}

std::vector<double> synthesize_control(const OcpProblem& problem,
                                       const StateTrajectory& states,
                                       const AdjointTrajectory& costates) {
  std::vector<double> u(states.states.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto& x = states.states[k];
    const auto& c = costates.costates[k];
    if (problem.kind == ModelKind::Model1) {
      u[k] = synthesize_u_m1(
          hamiltonian_coeffs_m1(x, c, problem.params, problem.weights),
          problem.bounds);
    } else {
      u[k] = synthesize_u_m2(
          indicator_m2(x, c, problem.params, problem.weights), problem.bounds);
    }
  }
  return u;
}

std::vector<double> indicator_trajectory(const OcpProblem& problem,
                                         const StateTrajectory& states,
                                         const AdjointTrajectory& costates) {
  std::vector<double> lambda(states.states.size());
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const auto& x = states.states[k];
    const auto& c = costates.costates[k];
    if (problem.kind == ModelKind::Model1) {
      lambda[k] = indicator_m1(hamiltonian_coeffs_m1(x, c, problem.params,
                                                     problem.weights))
                      .value_or(std::numeric_limits<double>::quiet_NaN());
    } else {
      lambda[k] = indicator_m2(x, c, problem.params, problem.weights);
    }
  }
  return lambda;
}

std::vector<double> objective_gradient(const OcpProblem& problem,
                                       const ControlTrajectory& control,
                                       const StateTrajectory& states,
                                       const AdjointTrajectory& costates) {
  const auto& p = problem.params;
  const double a3 = problem.weights.alpha3;
  std::vector<double> g(control.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& x = states.states[k];
    const double gap = costates.costates[k].infection_gap();
    const double u = control[k];
    if (problem.kind == ModelKind::Model1) {
      g[k] = a3 * u -
             x.s * (2.0 * p.beta1 * (1.0 - u) * x.i + p.beta2 * x.j) * gap;
    } else {
      g[k] = a3 * u - p.beta1 * x.s * x.i * gap / x.n;
    }
  }
  return g;
}

Sweep sweep_once(const OcpProblem& problem, const ControlTrajectory& control) {
  StateTrajectory states =
      integrate_forward(problem.kind, problem.params, problem.initial, control);
  AdjointTrajectory costates = integrate_adjoint_backward(
      problem.kind, problem.params, problem.weights, states, control,
      terminal_adjoint(problem.weights));
  return {std::move(states), std::move(costates)};
}

}  // namespace pontrol
