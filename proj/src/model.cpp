#include "pontrol/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pontrol/errors.hpp"

namespace pontrol {

namespace {

constexpr double kSigmaSumTol = 1e-12;
constexpr double kPopulationFloor = 1e-12;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

void require_admissible(double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw InvalidControl("control value " + std::to_string(u) +
                         " outside [0, 1)");
  }
}

double guarded_population(const NormalizedState& x) {
  if (!(x.n > kPopulationFloor)) {
    throw SingularityError("population fraction n=" + std::to_string(x.n) +
                           " too small for standard incidence");
  }
  return x.n;
}

// The two flows share the same shape; only the force of infection differs.
NormalizedState assemble(const NormalizedState& x, double incidence,
                         const EpidemicParams& p) {
  NormalizedState d;
  d.s = -incidence;
  d.e = incidence - p.gamma * x.e;
  d.i = p.sigma1 * p.gamma * x.e - p.rho1 * x.i;
  d.j = p.sigma2 * p.gamma * x.e - p.rho2 * x.j;
  d.r = p.rho1 * x.i + (1.0 - p.q) * p.rho2 * x.j;
  d.n = -p.q * p.rho2 * x.j;
  return d;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::Model1 ? "model1" : "model2";
}

void EpidemicParams::validate() const {
  require(std::abs(sigma1 + sigma2 - 1.0) <= kSigmaSumTol,
          "sigma1 + sigma2 must equal 1");
  require(beta1 >= 0.0 && beta2 >= 0.0 && gamma >= 0.0 && sigma1 >= 0.0 &&
              sigma2 >= 0.0 && rho1 >= 0.0 && rho2 >= 0.0,
          "rates must be non-negative");
  require(q >= 0.0 && q <= 1.0, "death probability q must lie in [0, 1]");
  require(beta1 >= beta2, "beta1 must not be smaller than beta2");
}

void ControlBounds::validate() const {
  require(u_max > 0.0 && u_max < 1.0, "u_max must lie in (0, 1)");
}

double ControlBounds::clamp(double u) const {
  return std::clamp(u, 0.0, u_max);
}

void ObjectiveWeights::validate() const {
  require(alpha1 >= 0.0 && alpha2 >= 0.0, "alpha1, alpha2 must be >= 0");
  require(alpha3 > 0.0, "alpha3 must be > 0");
}

NormalizationResult normalize(const RawPopulation& raw) {
  require(raw.N > 0.0, "population size N must be positive");
  require(raw.S >= 0.0 && raw.E >= 0.0 && raw.I >= 0.0 && raw.J >= 0.0 &&
              raw.R >= 0.0,
          "compartment counts must be non-negative");
  const double total = raw.S + raw.E + raw.I + raw.J + raw.R;
  require(std::abs(total - raw.N) <= 1e-6 * raw.N,
          "compartments must add up to N");

  const double inv = 1.0 / raw.N;
  NormalizationResult out;
  out.state = {raw.S * inv, raw.E * inv, raw.I * inv,
               raw.J * inv, raw.R * inv, 1.0};
  out.rates = {raw.beta1_tilde * raw.N, raw.beta2_tilde * raw.N};
  return out;
}

NormalizedState rhs_uncontrolled(ModelKind kind, const NormalizedState& x,
                                 const EpidemicParams& p) {
  double force = p.beta1 * x.i + p.beta2 * x.j;
  if (kind == ModelKind::Model2) force /= guarded_population(x);
  return assemble(x, x.s * force, p);
}

NormalizedState rhs_controlled(ModelKind kind, const NormalizedState& x,
                               double u, const EpidemicParams& p) {
  require_admissible(u);
  const double w = 1.0 - u;
  double force = 0.0;
  if (kind == ModelKind::Model1) {
    force = p.beta1 * w * w * x.i + p.beta2 * w * x.j;
  } else {
    force = (p.beta1 * w * x.i + p.beta2 * x.j) / guarded_population(x);
  }
  return assemble(x, x.s * force, p);
}

double r0_basic(const EpidemicParams& p) {
  require(p.rho1 > 0.0 && p.rho2 > 0.0, "removal rates must be positive");
  return p.beta1 * p.sigma1 / p.rho1 + p.beta2 * p.sigma2 / p.rho2;
}

double r0_controlled(ModelKind kind, const EpidemicParams& p, double u) {
  require_admissible(u);
  require(p.rho1 > 0.0 && p.rho2 > 0.0, "removal rates must be positive");
  const double w = 1.0 - u;
  const double asym = p.beta1 * p.sigma1 / p.rho1;
  const double sym = p.beta2 * p.sigma2 / p.rho2;
  if (kind == ModelKind::Model1) return w * w * asym + w * sym;
  return w * asym + sym;
}

TransmissionRates beta_from_r0(double r0, const EpidemicParams& p,
                               double beta_ratio) {
  require(r0 > 0.0, "r0 must be positive");
  require(beta_ratio >= 0.0, "beta ratio must be non-negative");
  require(p.rho1 > 0.0 && p.rho2 > 0.0, "removal rates must be positive");
  const double per_beta1 =
      p.sigma1 / p.rho1 + beta_ratio * p.sigma2 / p.rho2;
  require(per_beta1 > 0.0 && std::isfinite(per_beta1),
          "degenerate reproductive-ratio denominator");
  const double beta1 = r0 / per_beta1;
  return {beta1, beta_ratio * beta1};
}

EpidemicParams with_r0(EpidemicParams p, double r0, double beta_ratio) {
  const auto rates = beta_from_r0(r0, p, beta_ratio);
  p.beta1 = rates.beta1;
  p.beta2 = rates.beta2;
  return p;
}

RawPopulation reference_population() {
  RawPopulation raw;
  raw.N = 1.0e7;
  raw.E = 500.0;
  raw.I = 800.0;
  raw.J = 200.0;
  raw.R = 0.0;
  raw.S = raw.N - 1500.0;
  return raw;
}

NormalizedState reference_initial_state() {
  return normalize(reference_population()).state;
}

EpidemicParams reference_params(double r0) {
  return with_r0(EpidemicParams{}, r0);
}

}  // namespace pontrol
