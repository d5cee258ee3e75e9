#pragma once

#include "pontrol/model.hpp"

namespace pontrol {

/// Costate of the reduced optimal-control system. Each field is the
/// multiplier conjugate to the state component of the same name
/// (psi1..psi4 for Model1 map to s, e, i, j; phi1..phi5 for Model2 map to
/// s, e, i, j, n). For Model1 the `n` field stays identically zero.
///
/// Sign convention: the Hamiltonian is maximized with the running cost
/// negated, so terminal values are minus the gradient of the terminal cost.
struct AdjointState {
  double s = 0.0;
  double e = 0.0;
  double i = 0.0;
  double j = 0.0;
  double n = 0.0;

  static constexpr std::size_t kSize = 5;

  /// psi1 - psi2 (resp. phi1 - phi2), the factor every control term carries.
  double infection_gap() const { return s - e; }

  friend AdjointState operator+(const AdjointState& a, const AdjointState& b) {
    return {a.s + b.s, a.e + b.e, a.i + b.i, a.j + b.j, a.n + b.n};
  }
  friend AdjointState operator*(double k, const AdjointState& a) {
    return {k * a.s, k * a.e, k * a.i, k * a.j, k * a.n};
  }
  friend bool operator==(const AdjointState&, const AdjointState&) = default;
};

/// Transversality data at t = T: (0, -a1, -a1, -a1[, 0]).
AdjointState terminal_adjoint(const ObjectiveWeights& w);

/// Time derivative of the costate along the state `x` under control `u`.
AdjointState adjoint_rhs(ModelKind kind, const NormalizedState& x, double u,
                         const AdjointState& costate, const EpidemicParams& p,
                         const ObjectiveWeights& w);

}  // namespace pontrol
