#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "scjarz/complex_dynamics.hpp"

namespace scjarz {

// Outcome of inverting a real map of the phase plane.
struct RealMapSolve {
  RealPoint solution;
  double residual = 0.0;       // |map(solution) - target|
  double jacobian_det = 0.0;   // last finite-difference Jacobian determinant
  int newton_iters = 0;        // summed over all continuation stages
  int stages = 1;              // accepted continuation stages; 1 for a direct solve
  // Residual after every accepted Newton step, across stages, in order.
  std::vector<double> residual_history;
  // Converged residual of each accepted continuation stage.
  std::vector<double> stage_residuals;
};

// A real map of the plane parametrised by hbar*beta.
using FamilyMap = std::function<RealPoint(RealPoint, double hbar_beta)>;

// Damped Newton iteration on map(z) = target with central-difference
// Jacobians. Without a warm guess the branch is selected by adaptive
// continuation in hbar*beta starting from hbar*beta / 2^stages; with one,
// continuation is only the fallback when the direct solve fails. Throws
// CausticEncountered when the followed branch folds (det J -> 0) and
// NewtonDiverged when the iteration stalls elsewhere.
RealMapSolve invert_real_map(const FamilyMap& map, RealPoint target, double hbar_beta,
                             RealPoint initial_guess, const IntegratorSettings& settings,
                             bool warm = false);

struct MidpointSolve {
  RealPoint target;
  RealPoint center;
  ImaginaryArc arc;
  int newton_iters = 0;
  double jacobian_det = 0.0;
  double residual = 0.0;
  RealMapSolve trace;
};

// Real part of the frozen-time imaginary half-flow endpoint; equals the chord
// midpoint of the arc centred on z by conjugation symmetry.
RealPoint midpoint_map(const HamiltonianModel& model, double t, RealPoint z, double hbar_beta,
                       const IntegratorSettings& settings);

MidpointSolve invert_midpoint(const HamiltonianModel& model, double t, RealPoint target,
                              double hbar_beta, const IntegratorSettings& settings,
                              std::optional<RealPoint> warm_start = std::nullopt);

struct PseudoHamiltonianValue {
  double G = 0.0;                    // H_t(center) - A / (hbar beta)
  double G_from_total_action = 0.0;  // (-p Q + S) / (i hbar beta), real part
  double G_imag = 0.0;               // imaginary residue of the total-action route
  RealPoint center;
  ImaginaryArc arc;
  double jacobian_det = 0.0;
  int newton_iters = 0;
  std::optional<double> prefactor;
};

PseudoHamiltonianValue pseudo_hamiltonian(const HamiltonianModel& model, double t,
                                          RealPoint target, double beta, double hbar,
                                          const IntegratorSettings& settings,
                                          bool with_prefactor = false,
                                          std::optional<RealPoint> warm_start = std::nullopt);

// Second derivatives of the endpoint action S(q0, q1) of an arc, obtained by
// finite differences of the imaginary flow from its sigma = -hbar*beta/2 end.
struct EndpointHessian {
  cplx s00;  // d2S/dq0^2
  cplx s11;  // d2S/dq1^2
  cplx s01;  // d2S/dq0 dq1
};

EndpointHessian endpoint_action_hessian(const HamiltonianModel& model, const ImaginaryArc& arc,
                                        const IntegratorSettings& settings);

// Van Vleck times stationary-phase Gaussian prefactor of the thermal symbol.
double thermal_prefactor(const EndpointHessian& hessian, double hbar);

}  // namespace scjarz
