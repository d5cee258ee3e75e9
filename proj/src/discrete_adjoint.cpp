#include "pontrol/discrete_adjoint.hpp"

#include "pontrol/errors.hpp"

namespace pontrol {

namespace {

// Partial derivatives of the incidence term F = s * force(x, u).
struct IncidencePartials {
  double ds = 0.0;
  double di = 0.0;
  double dj = 0.0;
  double dn = 0.0;
  double du = 0.0;
};

IncidencePartials incidence_partials(ModelKind kind, const NormalizedState& x,
                                     double u, const EpidemicParams& p) {
  const double w = 1.0 - u;
  IncidencePartials d;
  if (kind == ModelKind::Model1) {
    d.ds = p.beta1 * w * w * x.i + p.beta2 * w * x.j;
    d.di = x.s * p.beta1 * w * w;
    d.dj = x.s * p.beta2 * w;
    d.du = -x.s * (2.0 * p.beta1 * w * x.i + p.beta2 * x.j);
    return d;
  }
  if (!(x.n > 1e-12)) {
    throw SingularityError("population fraction too small in pullback");
  }
  const double inv_n = 1.0 / x.n;
  const double force = (p.beta1 * w * x.i + p.beta2 * x.j) * inv_n;
  d.ds = force;
  d.di = x.s * p.beta1 * w * inv_n;
  d.dj = x.s * p.beta2 * inv_n;
  d.dn = -x.s * force * inv_n;
  d.du = -x.s * p.beta1 * x.i * inv_n;
  return d;
}

}  // namespace

NormalizedState rhs_pullback_state(ModelKind kind, const NormalizedState& x,
                                   double u, const EpidemicParams& p,
                                   const NormalizedState& v) {
  const auto F = incidence_partials(kind, x, u, p);
  const double flow = v.e - v.s;  // F leaves s and enters e
  NormalizedState out;
  out.s = flow * F.ds;
  out.e = -p.gamma * v.e + p.sigma1 * p.gamma * v.i + p.sigma2 * p.gamma * v.j;
  out.i = flow * F.di - p.rho1 * v.i + p.rho1 * v.r;
  out.j = flow * F.dj - p.rho2 * v.j + (1.0 - p.q) * p.rho2 * v.r -
          p.q * p.rho2 * v.n;
  out.r = 0.0;
  out.n = flow * F.dn;
  return out;
}

double rhs_pullback_control(ModelKind kind, const NormalizedState& x, double u,
                            const EpidemicParams& p, const NormalizedState& v) {
  return (v.e - v.s) * incidence_partials(kind, x, u, p).du;
}

DiscreteGradient discrete_objective_gradient(const OcpProblem& problem,
                                             const ControlTrajectory& control) {
  const auto kind = problem.kind;
  const auto& p = problem.params;
  const auto& w = problem.weights;
  StateTrajectory states = integrate_forward(kind, p, problem.initial, control);
  const TimeGrid& grid = states.grid;
  const std::size_t n = grid.steps();
  const double h = grid.step();
  const auto quad = grid.trapezoid_weights();

  auto infected_seed = [](double scale) {
    return NormalizedState{0.0, scale, scale, scale, 0.0, 0.0};
  };

  std::vector<double> grad(grid.nodes(), 0.0);
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    grad[k] = quad[k] * w.alpha3 * control[k];
  }

  NormalizedState lam = infected_seed(w.alpha1 + quad[n] * w.alpha2);
  for (std::size_t k = n; k-- > 0;) {
    const NormalizedState& x = states.states[k];
    const double u0 = control[k];
    const double u1 = control[k + 1];
    const double um = control.between(k, 0.5);

    // Recompute the stage points of the forward step.
    const NormalizedState k1 = rhs_controlled(kind, x, u0, p);
    const NormalizedState y2 = x + (0.5 * h) * k1;
    const NormalizedState k2 = rhs_controlled(kind, y2, um, p);
    const NormalizedState y3 = x + (0.5 * h) * k2;
    const NormalizedState k3 = rhs_controlled(kind, y3, um, p);
    const NormalizedState y4 = x + h * k3;

    NormalizedState a1 = (h / 6.0) * lam;
    NormalizedState a2 = (h / 3.0) * lam;
    NormalizedState a3 = (h / 3.0) * lam;
    const NormalizedState a4 = (h / 6.0) * lam;
    NormalizedState ax = lam;
    double au0 = 0.0;
    double au1 = 0.0;
    double aum = 0.0;

    const NormalizedState ay4 = rhs_pullback_state(kind, y4, u1, p, a4);
    au1 += rhs_pullback_control(kind, y4, u1, p, a4);
    ax = ax + ay4;
    a3 = a3 + h * ay4;

    const NormalizedState ay3 = rhs_pullback_state(kind, y3, um, p, a3);
    aum += rhs_pullback_control(kind, y3, um, p, a3);
    ax = ax + ay3;
    a2 = a2 + (0.5 * h) * ay3;

    const NormalizedState ay2 = rhs_pullback_state(kind, y2, um, p, a2);
    aum += rhs_pullback_control(kind, y2, um, p, a2);
    ax = ax + ay2;
    a1 = a1 + (0.5 * h) * ay2;

    ax = ax + rhs_pullback_state(kind, x, u0, p, a1);
    au0 += rhs_pullback_control(kind, x, u0, p, a1);

    grad[k] += au0 + 0.5 * aum;
    grad[k + 1] += au1 + 0.5 * aum;
    lam = ax + infected_seed(quad[k] * w.alpha2);
  }

  const double q = objective(states, control, w);
  return {std::move(states), q, std::move(grad)};
}

}  // namespace pontrol
