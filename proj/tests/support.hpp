#pragma once

#include <cmath>
#include <numbers>

#include "scjarz/hamiltonian.hpp"

namespace scjarz::test {

inline FrequencyProtocol ramp(double omega_i = 1.0, double omega_f = 2.0) {
  return {0.0, 1.0, omega_i, omega_f, ProtocolShape::Linear};
}

inline HamiltonianModel harmonic_ramp() { return HamiltonianModel::harmonic(1.0, ramp()); }
inline HamiltonianModel quartic_ramp(double lambda = 0.1) {
  return HamiltonianModel::quartic(1.0, ramp(), lambda);
}
inline HamiltonianModel harmonic_constant(double omega = 1.0, double m = 1.0) {
  return HamiltonianModel::harmonic(m, FrequencyProtocol::constant(omega));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 2/(beta hbar omega) tanh(beta hbar omega / 2)
inline double harmonic_g_factor(double beta, double hbar, double omega) {
  const double x = beta * hbar * omega;
  return 2.0 / x * std::tanh(0.5 * x);
}

}  // namespace scjarz::test
