#include "pontrol/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "pontrol/errors.hpp"
#include "pontrol/solvers.hpp"

namespace pontrol {

namespace {

constexpr double kPositivityTol = 1e-9;
constexpr double kConservationTol = 1e-9;
constexpr double kBoundTol = 1e-12;
constexpr double kMonotoneTol = 1e-15;

ProbeReport named(std::string name, std::size_t trials = 0) {
  ProbeReport r;
  r.name = std::move(name);
  r.trials = trials;
  return r;
}

void finish(ProbeReport& r) { r.pass = r.violations == 0; }

}  // namespace

ProbeReport probe_lemma1(const StateTrajectory& trajectory) {
  ProbeReport r = named("lemma1_positivity");
  std::ostringstream first;
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const auto& x = trajectory.states[k];
    double worst = std::abs(x.conservation_residual());
    bool bad = worst > kConservationTol;
    for (double v : x.as_array()) {
      if (!std::isfinite(v)) {
        bad = true;
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      if (v <= -kPositivityTol) bad = true;
      if (v > 1.0 + kBoundTol) bad = true;
      worst = std::max({worst, -v, v - 1.0});
    }
    if (k > 0) {
      const double rise = x.n - trajectory.states[k - 1].n;
      if (rise > kMonotoneTol) bad = true;
      worst = std::max(worst, rise);
    }
    ++r.trials;
    r.worst_residual = std::max(r.worst_residual, worst);
    if (bad) {
      if (r.violations == 0) first << "first violation at node " << k;
      ++r.violations;
    }
  }
  r.detail = first.str();
  finish(r);
  return r;
}

ProbeReport probe_lemma3(std::span<const HamiltonianCoeffs> coeffs,
                         const ControlBounds& bounds) {
  ProbeReport r = named("lemma3_indicator");
  const double threshold = 0.5 * bounds.u_max;
  for (const auto& h : coeffs) {
    if (!(h.A < 0.0)) continue;
    ++r.trials;
    const double lambda = 0.5 * h.B / h.A;
    if (!(lambda > threshold)) {
      ++r.violations;
      r.worst_residual = std::max(r.worst_residual, threshold - lambda);
    }
  }
  r.vacuous = r.trials == 0;
  r.detail = r.vacuous ? "no node with A < 0" : "";
  finish(r);
  return r;
}

ProbeReport probe_lemma3(const SolveReport& report) {
  if (report.problem.kind != ModelKind::Model1) {
    throw InvalidInput("the A < 0 indicator bound applies to Model1 only");
  }
  auto coeffs = report.coefficients();
  // The statement concerns t in [0, T); drop the terminal node.
  if (!coeffs.empty()) coeffs.pop_back();
  return probe_lemma3(coeffs, report.problem.bounds);
}

ProbeReport probe_terminal_control(const ControlTrajectory& control,
                                   const ObjectiveWeights& weights) {
  ProbeReport r = named("terminal_control_positive", 1);
  if (!(weights.alpha1 > 0.0)) {
    r.vacuous = true;
    r.detail = "alpha1 = 0";
    finish(r);
    return r;
  }
  const double u_T = control[control.size() - 1];
  if (!(u_T > 0.0)) {
    r.violations = 1;
    r.worst_residual = -u_T;
  }
  r.detail = "u(T) = " + std::to_string(u_T);
  finish(r);
  return r;
}

ProbeReport probe_continuity(const ControlTrajectory& fine,
                             const ControlTrajectory& coarse,
                             double min_ratio) {
  if (fine.grid().horizon() != coarse.grid().horizon() ||
      fine.grid().steps() <= coarse.grid().steps()) {
    throw InvalidInput("continuity probe needs a finer and a coarser grid");
  }
  ProbeReport r = named("control_continuity", 1);
  const double refinement = static_cast<double>(fine.grid().steps()) /
                            static_cast<double>(coarse.grid().steps());
  const double jf = fine.max_jump();
  const double jc = coarse.max_jump();
  // A constant control has no jumps at any resolution.
  const double ratio = jf > 0.0 ? jc / jf : refinement;
  if (!(ratio >= min_ratio * refinement)) {
    r.violations = 1;
    r.worst_residual = min_ratio * refinement - ratio;
  }
  std::ostringstream d;
  d << "max jump " << jc << " -> " << jf << ", ratio " << ratio;
  r.detail = d.str();
  finish(r);
  return r;
}

ProbeReport probe_contraction(const SolveReport& report, std::size_t window) {
  if (report.solver != SolverKind::Sweep) {
    throw InvalidInput("contraction probe applies to sweep reports");
  }
  ProbeReport r = named("sweep_contraction");
  const auto& h = report.residual_history;
  // The last entry belongs to the post-convergence re-sweep.
  const std::size_t end = report.converged && h.size() > 1 ? h.size() - 1 : h.size();
  const std::size_t begin = end > window ? end - window : 0;
  for (std::size_t k = begin; k + 1 < end; ++k) {
    ++r.trials;
    if (h[k + 1] > h[k]) {
      ++r.violations;
      r.worst_residual = std::max(r.worst_residual, h[k + 1] - h[k]);
    }
  }
  r.vacuous = r.trials == 0;
  finish(r);
  return r;
}

ProbeReport probe_optimality_sanity(const SolveReport& report) {
  const auto& pr = report.problem;
  const double q0 =
      evaluate_objective(pr, ControlTrajectory::constant(pr.grid, 0.0));
  const double qm = evaluate_objective(
      pr, ControlTrajectory::constant(pr.grid, pr.bounds.u_max));
  ProbeReport r = named("optimality_sanity", 2);
  for (double q : {q0, qm}) {
    if (report.q_star > q) {
      ++r.violations;
      r.worst_residual = std::max(r.worst_residual, report.q_star - q);
    }
  }
  std::ostringstream d;
  d << "Q* = " << report.q_star << ", Q(0) = " << q0 << ", Q(u_max) = " << qm;
  r.detail = d.str();
  finish(r);
  return r;
}

double convexity_midpoint(double M, double L, double w_hat, double w_tilde,
                          double lam) {
  if (w_hat == w_tilde || lam == 1.0) return w_hat;
  if (lam == 0.0) return w_tilde;
  const double target = lam * (M * w_hat * w_hat + L * w_hat) +
                        (1.0 - lam) * (M * w_tilde * w_tilde + L * w_tilde);
  if (M > 0.0) {
    // Positive root of M w^2 + L w - target, cancellation-free form.
    return 2.0 * target / (L + std::sqrt(L * L + 4.0 * M * target));
  }
  if (L > 0.0) return target / L;
  throw InvalidInput("convexity construction needs M > 0 or L > 0");
}

ProbeReport probe_convexity(const ConvexityProbeConfig& config) {
  if (config.trials == 0) throw InvalidInput("convexity probe needs trials");
  double beta1 = config.beta1;
  double beta2 = config.beta2;
  if (beta1 == 0.0 && beta2 == 0.0) {
    const auto p = reference_params(3.0);
    beta1 = p.beta1;
    beta2 = p.beta2;
  }
  const double w_min = 1.0 - config.u_max;
  const double K = 0.5 * config.alpha3;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto positive_unit = [&] { return 1.0 - unit(rng); };  // (0, 1]
  auto control = [&] { return w_min + (1.0 - w_min) * unit(rng); };

  ProbeReport r = named("convexity_construction");
  for (std::size_t t = 0; t < config.trials; ++t) {
    const double s = positive_unit();
    const double e = positive_unit();  // drawn for fidelity; does not enter
    const double i = positive_unit();
    const double j = positive_unit();
    (void)e;
    const double M = beta1 * s * i;
    const double L = beta2 * s * j;
    const double w_hat = control();
    const double w_tilde = control();
    const double lam = unit(rng);

    const double w_bar = convexity_midpoint(M, L, w_hat, w_tilde, lam);
    const double w_mix = lam * w_hat + (1.0 - lam) * w_tilde;
    const double f_bar = M * w_bar * w_bar + L * w_bar;
    const double f_mix = lam * (M * w_hat * w_hat + L * w_hat) +
                         (1.0 - lam) * (M * w_tilde * w_tilde + L * w_tilde);
    const double cost_bar = K * (1.0 - w_bar) * (1.0 - w_bar);
    const double cost_mix = lam * K * (1.0 - w_hat) * (1.0 - w_hat) +
                            (1.0 - lam) * K * (1.0 - w_tilde) * (1.0 - w_tilde);
    const double cost_of_mix = K * (1.0 - w_mix) * (1.0 - w_mix);

    const double slack = 1e-12;
    double worst = 0.0;
    worst = std::max(worst, (w_min - w_bar) - slack);
    worst = std::max(worst, (w_bar - 1.0) - slack);
    worst = std::max(worst, std::abs(f_bar - f_mix) - slack * f_mix);
    worst = std::max(worst, (w_mix - w_bar) - slack);
    worst = std::max(worst, (cost_of_mix - cost_mix) - slack * K);
    worst = std::max(worst, (cost_bar - cost_of_mix) - slack * K);

    ++r.trials;
    if (worst > 0.0 || !std::isfinite(w_bar)) {
      ++r.violations;
      r.worst_residual = std::max(r.worst_residual, worst);
    }
  }
  finish(r);
  return r;
}

ProbeReport probe_gradient(const OcpProblem& problem,
                           const ControlTrajectory& control,
                           const GradientProbeConfig& config) {
  problem.validate();
  if (!(control.grid() == problem.grid)) {
    throw InvalidInput("gradient probe control must live on the problem grid");
  }
  const double delta = config.fd_step;
  const double u_max = problem.bounds.u_max;

  std::vector<std::size_t> eligible;
  for (std::size_t k = 1; k + 1 < control.size(); ++k) {
    if (control[k] - delta >= 0.0 && control[k] + delta <= u_max) {
      eligible.push_back(k);
    }
  }
  if (eligible.empty()) {
    throw InvalidInput("gradient probe needs strictly interior control nodes");
  }
  std::mt19937_64 rng(config.seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  const std::size_t count = std::min(config.directions, eligible.size());
  std::vector<std::size_t> nodes(eligible.begin(), eligible.begin() + count);
  std::sort(nodes.begin(), nodes.end());

  const Sweep sweep = sweep_once(problem, control);
  const auto gradient =
      objective_gradient(problem, control, sweep.states, sweep.costates);
  const auto weights = problem.grid.trapezoid_weights();

  ProbeReport r = named("adjoint_gradient");
  std::vector<double> bumped(control.values().begin(), control.values().end());
  for (std::size_t k : nodes) {
    bumped[k] = control[k] + delta;
    const double q_plus =
        evaluate_objective(problem, ControlTrajectory(problem.grid, bumped));
    bumped[k] = control[k] - delta;
    const double q_minus =
        evaluate_objective(problem, ControlTrajectory(problem.grid, bumped));
    bumped[k] = control[k];

    const double fd = (q_plus - q_minus) / (2.0 * delta);
    const double adj = weights[k] * gradient[k];
    const double scale = std::max(std::abs(fd), std::abs(adj));
    const double rel = scale > 0.0 ? std::abs(fd - adj) / scale : 0.0;
    ++r.trials;
    r.worst_residual = std::max(r.worst_residual, rel);
    if (!(rel <= config.tolerance)) ++r.violations;
  }
  finish(r);
  return r;
}

}  // namespace pontrol
