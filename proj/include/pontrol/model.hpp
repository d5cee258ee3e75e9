#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace pontrol {

/// Incidence law of the transmission model.
///  - Model1: bilinear incidence, quarantine enters as (1-u)^2 on the
///    asymptomatic route and (1-u) on the symptomatic route.
///  - Model2: standard incidence (force of infection divided by n), the
///    quarantine enters linearly on the asymptomatic route only.
enum class ModelKind { Model1, Model2 };

std::string_view to_string(ModelKind kind);

/// Epidemiological rate constants, normalized to population fractions.
struct EpidemicParams {
  double beta1 = 0.0;   // transmission from asymptomatic carriers, 1/day
  double beta2 = 0.0;   // transmission from symptomatic patients, 1/day
  double gamma = 0.18;  // exit rate from the latent class, 1/day
  double sigma1 = 0.8;  // fraction of exposed becoming asymptomatic
  double sigma2 = 0.2;  // fraction of exposed becoming symptomatic
  double rho1 = 1.0 / 14.0;  // removal rate of asymptomatic carriers, 1/day
  double rho2 = 1.0 / 21.0;  // removal rate of symptomatic patients, 1/day
  double q = 0.15;           // death probability of symptomatic patients

  /// Throws InvalidInput when sigma1 + sigma2 != 1 (to 1e-12), a rate is
  /// negative, q is outside [0,1] or beta1 < beta2.
  void validate() const;
};

/// Raw head counts and per-person transmission rates before normalization.
struct RawPopulation {
  double S = 0.0;
  double E = 0.0;
  double I = 0.0;
  double J = 0.0;
  double R = 0.0;
  double N = 0.0;
  double beta1_tilde = 0.0;  // 1/(person*day)
  double beta2_tilde = 0.0;
};

/// Compartment fractions of the initial population size.
struct NormalizedState {
  double s = 0.0;
  double e = 0.0;
  double i = 0.0;
  double j = 0.0;
  double r = 0.0;
  double n = 0.0;

  static constexpr std::size_t kSize = 6;

  std::array<double, kSize> as_array() const { return {s, e, i, j, r, n}; }

  /// s + e + i + j + r - n; zero along exact solutions.
  double conservation_residual() const { return s + e + i + j + r - n; }

  /// e + i + j, the infected mass entering the objective.
  double infected() const { return e + i + j; }

  /// i + j, the active (infectious) cases.
  double active() const { return i + j; }

  friend NormalizedState operator+(const NormalizedState& a,
                                   const NormalizedState& b) {
    return {a.s + b.s, a.e + b.e, a.i + b.i, a.j + b.j, a.r + b.r, a.n + b.n};
  }
  friend NormalizedState operator-(const NormalizedState& a,
                                   const NormalizedState& b) {
    return {a.s - b.s, a.e - b.e, a.i - b.i, a.j - b.j, a.r - b.r, a.n - b.n};
  }
  friend NormalizedState operator*(double k, const NormalizedState& a) {
    return {k * a.s, k * a.e, k * a.i, k * a.j, k * a.r, k * a.n};
  }
  friend bool operator==(const NormalizedState&,
                         const NormalizedState&) = default;
};

/// Upper bound of the quarantine intensity, 0 < u_max < 1.
struct ControlBounds {
  double u_max = 0.9;

  void validate() const;
  double clamp(double u) const;
};

/// Weights of the Bolza objective
///   Q = a1 (e+i+j)(T) + a2 int (e+i+j) dt + 0.5 a3 int u^2 dt.
struct ObjectiveWeights {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 5.0e-5;

  void validate() const;

  /// Terminal part P = a1 (e(T) + i(T) + j(T)).
  double terminal_term(const NormalizedState& at_T) const {
    return alpha1 * at_T.infected();
  }
};

struct TransmissionRates {
  double beta1 = 0.0;
  double beta2 = 0.0;
};

struct NormalizationResult {
  NormalizedState state;
  TransmissionRates rates;
};

/// Divides every compartment by N and scales the per-person transmission
/// rates by N. Throws InvalidInput when N <= 0, a count is negative, or the
/// counts do not add up to N (within 1e-6 N).
NormalizationResult normalize(const RawPopulation& raw);

/// Right-hand side of the system without quarantine. Model2 throws
/// SingularityError when n <= 1e-12.
NormalizedState rhs_uncontrolled(ModelKind kind, const NormalizedState& x,
                                 const EpidemicParams& p);

/// Right-hand side of the quarantine-controlled system for intensity u.
/// Throws InvalidControl when u is outside [0, 1).
NormalizedState rhs_controlled(ModelKind kind, const NormalizedState& x,
                               double u, const EpidemicParams& p);

/// Basic reproductive ratio b1 s1 / r1 + b2 s2 / r2, identical for both
/// incidence laws. Throws InvalidInput on a zero removal rate.
double r0_basic(const EpidemicParams& p);

/// Reproductive ratio under a constant quarantine intensity u in [0,1).
double r0_controlled(ModelKind kind, const EpidemicParams& p, double u);

/// Transmission rates reproducing `r0` when beta2 = beta_ratio * beta1.
TransmissionRates beta_from_r0(double r0, const EpidemicParams& p,
                               double beta_ratio = 0.1);

/// Returns `p` with beta1, beta2 replaced by beta_from_r0(r0, p, ratio).
EpidemicParams with_r0(EpidemicParams p, double r0, double beta_ratio = 0.1);

/// Reference scenario: 10^7 people with 500 exposed, 800 asymptomatic and
/// 200 symptomatic carriers at t = 0.
RawPopulation reference_population();
NormalizedState reference_initial_state();

/// Rates with the reference removal/latency values and betas set from r0.
EpidemicParams reference_params(double r0);

}  // namespace pontrol
