#include "pontrol/adjoint.hpp"

#include <string>

#include "pontrol/errors.hpp"

namespace pontrol {

AdjointState terminal_adjoint(const ObjectiveWeights& w) {
  return {0.0, -w.alpha1, -w.alpha1, -w.alpha1, 0.0};
}

AdjointState adjoint_rhs(ModelKind kind, const NormalizedState& x, double u,
                         const AdjointState& c, const EpidemicParams& p,
                         const ObjectiveWeights& w) {
  const double gap = c.infection_gap();
  const double keep = 1.0 - u;
  AdjointState d;
  d.e = p.gamma * (c.e - p.sigma1 * c.i - p.sigma2 * c.j) + w.alpha2;

  if (kind == ModelKind::Model1) {
    const double asym = p.beta1 * keep * keep;
    const double sym = p.beta2 * keep;
    d.s = (asym * x.i + sym * x.j) * gap;
    d.i = asym * x.s * gap + p.rho1 * c.i + w.alpha2;
    d.j = sym * x.s * gap + p.rho2 * c.j + w.alpha2;
    d.n = 0.0;
    return d;
  }

  if (!(x.n > 1e-12)) {
    throw SingularityError("population fraction n=" + std::to_string(x.n) +
                           " too small in costate equations");
  }
  const double inv_n = 1.0 / x.n;
  const double force = p.beta1 * keep * x.i + p.beta2 * x.j;
  d.s = inv_n * force * gap;
  d.i = p.beta1 * keep * x.s * inv_n * gap + p.rho1 * c.i + w.alpha2;
  d.j = p.beta2 * x.s * inv_n * gap + p.rho2 * (c.j + p.q * c.n) + w.alpha2;
  d.n = -x.s * inv_n * inv_n * force * gap;
  return d;
}

}  // namespace pontrol
