#include "pontrol/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pontrol/discrete_adjoint.hpp"
#include "pontrol/errors.hpp"

namespace pontrol {

namespace {

// Objective changes below this absolute level count as converged even when
// the relative change is large (e.g. Q -> 0 when alpha1 = alpha2 = 0).
constexpr double kObjectiveFloor = 1e-12;

// Relative round-off of an N-term quadrature sum, ~sqrt(N) eps.
// Consecutive accepted steps without a strict decrease of Q before the
// gradient solver gives up on further progress.
constexpr std::size_t kFlatSteps = 3;

double objective_resolution(const TimeGrid& grid) {
  return std::sqrt(static_cast<double>(grid.nodes())) *
         std::numeric_limits<double>::epsilon();
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

double start_value(const OcpProblem& problem, std::optional<double> guess) {
  return problem.bounds.clamp(guess.value_or(problem.bounds.u_max));
}

bool objective_settled(double q, double q_prev, double tol) {
  if (!std::isfinite(q_prev)) return false;
  const double scale = std::max({std::abs(q), std::abs(q_prev), kObjectiveFloor});
  return std::abs(q - q_prev) <= tol * scale;
}

void attach_probes(SolveReport& report) {
  report.lemma_probes.clear();
  report.lemma_probes.push_back(
      probe_terminal_control(report.u_star, report.problem.weights));
  if (report.problem.kind == ModelKind::Model1) {
    report.lemma_probes.push_back(probe_lemma3(report));
  }
}

SolveReport make_report(const OcpProblem& problem, SolverKind solver,
                        ControlTrajectory control, Sweep sweep) {
  const double q = objective(sweep.states, control, problem.weights);
  return SolveReport{.problem = problem,
                     .solver = solver,
                     .u_star = std::move(control),
                     .states = std::move(sweep.states),
                     .costates = std::move(sweep.costates),
                     .q_star = q,
                     .residual_history = {},
                     .objective_history = {},
                     .lemma_probes = {}};
}

// Projected gradient stationarity in control units: |P(u - g/a3) - u|.
double projected_step(const OcpProblem& problem,
                      const ControlTrajectory& control,
                      std::span<const double> gradient) {
  const double a3 = problem.weights.alpha3;
  double worst = 0.0;
  for (std::size_t k = 0; k < gradient.size(); ++k) {
    const double target = problem.bounds.clamp(control[k] - gradient[k] / a3);
    worst = std::max(worst, std::abs(target - control[k]));
  }
  return worst;
}

}  // namespace

std::string_view to_string(SolverKind kind) {
  return kind == SolverKind::Sweep ? "fbsm" : "pgrad";
}

void SweepSettings::validate() const {
  if (!(relaxation > 0.0 && relaxation <= 1.0)) {
    throw InvalidInput("relaxation must lie in (0, 1]");
  }
  if (!(tol_u > 0.0 && tol_q > 0.0)) {
    throw InvalidInput("sweep tolerances must be positive");
  }
  if (max_iters == 0) throw InvalidInput("max_iters must be positive");
}

void GradientSettings::validate() const {
  if (!(tol > 0.0)) throw InvalidInput("gradient tolerance must be positive");
  if (!(armijo > 0.0 && armijo < 1.0)) {
    throw InvalidInput("Armijo constant must lie in (0, 1)");
  }
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw InvalidInput("backtracking factor must lie in (0, 1)");
  }
  if (max_iters == 0) throw InvalidInput("max_iters must be positive");
}

std::vector<double> SolveReport::indicator() const {
  return indicator_trajectory(problem, states, costates);
}

std::vector<HamiltonianCoeffs> SolveReport::coefficients() const {
  std::vector<HamiltonianCoeffs> out(states.states.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = hamiltonian_coeffs_m1(states.states[k], costates.costates[k],
                                   problem.params, problem.weights);
  }
  return out;
}

double evaluate_objective(const OcpProblem& problem,
                          const ControlTrajectory& control) {
  const auto states =
      integrate_forward(problem.kind, problem.params, problem.initial, control);
  return objective(states, control, problem.weights);
}

std::vector<double> stationarity_residuals(const SolveReport& report) {
  const auto target =
      synthesize_control(report.problem, report.states, report.costates);
  std::vector<double> out(target.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::abs(report.u_star[k] - target[k]);
  }
  return out;
}

SolveReport solve_fbsm(const OcpProblem& problem,
                       const SweepSettings& settings) {
  problem.validate();
  settings.validate();
  const double theta = settings.relaxation;

  auto control = ControlTrajectory::constant(
      problem.grid, start_value(problem, settings.initial_guess));
  std::vector<double> residuals;
  std::vector<double> objectives;
  double q_prev = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t it = 1; it <= settings.max_iters; ++it) {
    Sweep sweep = sweep_once(problem, control);
    const auto target =
        synthesize_control(problem, sweep.states, sweep.costates);
    const double residual = sup_distance(control.values(), target);
    const double q = objective(sweep.states, control, problem.weights);
    residuals.push_back(residual);
    objectives.push_back(q);

    if (residual <= settings.tol_u &&
        objective_settled(q, q_prev, settings.tol_q)) {
      // Take the synthesized control itself and re-sweep, so the reported
      // trajectories correspond to the reported control.
      ControlTrajectory polished(problem.grid, target);
      Sweep final_sweep = sweep_once(problem, polished);
      const auto final_target =
          synthesize_control(problem, final_sweep.states, final_sweep.costates);
      const double final_residual =
          sup_distance(polished.values(), final_target);
      if (final_residual <= settings.tol_u) {
        SolveReport report = make_report(problem, SolverKind::Sweep,
                                         std::move(polished),
                                         std::move(final_sweep));
        report.iterations = it;
        report.converged = true;
        report.stationarity_residual = final_residual;
        report.pmp_residual = final_residual;
        residuals.push_back(final_residual);
        objectives.push_back(report.q_star);
        report.residual_history = std::move(residuals);
        report.objective_history = std::move(objectives);
        attach_probes(report);
        return report;
      }
    }

    if (it == settings.max_iters) {
      SolveReport report = make_report(problem, SolverKind::Sweep,
                                       std::move(control), std::move(sweep));
      report.iterations = it;
      report.converged = false;
      report.stationarity_residual = residual;
      report.pmp_residual = residual;
      report.residual_history = std::move(residuals);
      report.objective_history = std::move(objectives);
      attach_probes(report);
      return report;
    }

    std::vector<double> next(control.size());
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k] = problem.bounds.clamp((1.0 - theta) * control[k] +
                                     theta * target[k]);
    }
    control = ControlTrajectory(problem.grid, std::move(next));
    q_prev = q;
  }
  throw Error("unreachable: sweep loop exited without a report");
}

SolveReport solve_projected_gradient(const OcpProblem& problem,
                                     const GradientSettings& settings) {
  problem.validate();
  settings.validate();
  const double a3 = problem.weights.alpha3;
  const auto quad = problem.grid.trapezoid_weights();

  // Objective and L2 gradient of an iterate.
  struct Evaluation {
    StateTrajectory states;
    double q;
    std::vector<double> gradient;
  };
  auto evaluate = [&](const ControlTrajectory& u) {
    if (settings.source == GradientSource::Discrete) {
      auto d = discrete_objective_gradient(problem, u);
      for (std::size_t k = 0; k < d.gradient.size(); ++k) {
        d.gradient[k] /= quad[k];
      }
      return Evaluation{std::move(d.states), d.objective,
                        std::move(d.gradient)};
    }
    Sweep sw = sweep_once(problem, u);
    auto g = objective_gradient(problem, u, sw.states, sw.costates);
    const double q = objective(sw.states, u, problem.weights);
    return Evaluation{std::move(sw.states), q, std::move(g)};
  };

  auto control = ControlTrajectory::constant(
      problem.grid, start_value(problem, settings.initial_guess));
  Evaluation current = evaluate(control);

  std::vector<double> history;
  std::vector<double> objectives{current.q};
  const double initial_step = 1.0 / a3;
  const double resolution = objective_resolution(problem.grid);
  double step = initial_step;
  bool converged = false;
  bool floor_reached = false;
  std::size_t flat_steps = 0;
  double measure = 0.0;
  std::size_t it = 0;

  for (; it < settings.max_iters; ++it) {
    measure = projected_step(problem, control, current.gradient);
    history.push_back(measure);
    if (measure <= settings.tol) {
      converged = true;
      break;
    }
    // A full projected step whose first-order decrease is below the
    // resolution of Q cannot be certified by any line search.
    double predicted = 0.0;
    for (std::size_t k = 0; k < control.size(); ++k) {
      const double d =
          problem.bounds.clamp(control[k] - initial_step * current.gradient[k]) -
          control[k];
      predicted -= quad[k] * current.gradient[k] * d;
    }
    if (predicted <= resolution * std::max(std::abs(current.q), kObjectiveFloor)) {
      converged = true;
      floor_reached = true;
      break;
    }

    bool accepted = false;
    // Let the step grow back towards 1/a3 after earlier backtracking.
    step = std::min(initial_step, 2.0 * step);
    for (std::size_t ls = 0; ls < settings.max_backtracks; ++ls) {
      std::vector<double> trial(control.size());
      double slope = 0.0;
      for (std::size_t k = 0; k < trial.size(); ++k) {
        trial[k] =
            problem.bounds.clamp(control[k] - step * current.gradient[k]);
        slope += quad[k] * current.gradient[k] * (trial[k] - control[k]);
      }
      ControlTrajectory candidate(problem.grid, std::move(trial));
      const double q_trial = evaluate_objective(problem, candidate);
      if (q_trial <= current.q + settings.armijo * slope &&
          q_trial <= current.q) {
        flat_steps = q_trial < current.q ? 0 : flat_steps + 1;
        control = std::move(candidate);
        current = evaluate(control);
        objectives.push_back(current.q);
        accepted = true;
        break;
      }
      step *= settings.backtrack;
    }
    if (!accepted) break;
    if (flat_steps >= kFlatSteps) {
      converged = true;
      floor_reached = true;
      ++it;
      break;
    }
  }

  Sweep sweep = sweep_once(problem, control);
  SolveReport report = make_report(problem, SolverKind::ProjectedGradient,
                                   std::move(control), std::move(sweep));
  report.iterations = it;
  report.converged = converged;
  report.stationarity_residual = measure;
  report.precision_floor = floor_reached;
  const auto per_node = stationarity_residuals(report);
  report.pmp_residual = *std::max_element(per_node.begin(), per_node.end());
  report.residual_history = std::move(history);
  report.objective_history = std::move(objectives);
  attach_probes(report);
  return report;
}

CrossValidation cross_validate(const OcpProblem& problem,
                               const SweepSettings& sweep,
                               const GradientSettings& gradient) {
  CrossValidation out{.sweep = solve_fbsm(problem, sweep),
                      .gradient = solve_projected_gradient(problem, gradient),
                      .sweep_residuals = {},
                      .gradient_residuals = {}};
  const double qa = out.sweep.q_star;
  const double qb = out.gradient.q_star;
  const double scale = std::max(std::abs(qa), std::abs(qb));
  out.relative_objective_gap = scale > 0.0 ? std::abs(qa - qb) / scale : 0.0;
  out.control_gap =
      sup_distance(out.sweep.u_star.values(), out.gradient.u_star.values());
  out.sweep_residuals = stationarity_residuals(out.sweep);
  out.gradient_residuals = stationarity_residuals(out.gradient);
  out.complete = out.sweep.converged && out.gradient.converged;
  return out;
}

}  // namespace pontrol
