#pragma once

#include <optional>
#include <vector>

#include "scjarz/stationary_phase.hpp"

namespace scjarz {

// Frozen-t_f imaginary half-flow followed by backward real-time flow to t_i,
// projected on the real plane (the two conjugate branches average to it).
RealPoint composite_map(const HamiltonianModel& model, double t_i, double t_f, RealPoint z,
                        double hbar_beta, const IntegratorSettings& settings);

// Stationary construction for one final time t_f.
struct PseudoState {
  double t = 0.0;
  RealPoint target;
  RealPoint center;   // real arc centre at frozen time t
  ImaginaryArc arc;   // frozen-t arc through the centre
  RealPoint check;    // chord midpoint of the arc: the pseudo-trajectory point
  RealMapSolve trace;

  const ComplexPoint& z_plus() const { return arc.z_plus; }
  const ComplexPoint& z_minus() const { return arc.z_minus; }
};

PseudoState solve_pseudo_state(const HamiltonianModel& model, double t_i, double t_f,
                               RealPoint target, double hbar_beta,
                               const IntegratorSettings& settings,
                               std::optional<RealPoint> warm_start = std::nullopt);

// (1 / hbar beta) * integral of dH_t/dt over the arc (sigma measure).
double pseudo_power(const HamiltonianModel& model, const ImaginaryArc& arc,
                    const IntegratorSettings& settings);

// Propagated pseudo-energy G_{t_f}^{(t_i)}(p, q) from the total action of the
// three legs: real-time branch into the arc's lower end, the frozen arc, and
// the real-time branch into its upper end (counted negatively).
struct PropagatedEnergy {
  double G = 0.0;
  double G_imag = 0.0;
  cplx chord_at_t_i = 0.0;   // Q: difference of the two branch positions at t_i
  ComplexPoint lower_branch_at_t_i;  // branch ending at the sigma = -hbar*beta/2 end
  ComplexPoint upper_branch_at_t_i;  // branch ending at the sigma = +hbar*beta/2 end
};

PropagatedEnergy propagated_energy(const HamiltonianModel& model, double t_i,
                                   const PseudoState& state, const IntegratorSettings& settings);

struct PseudoNode {
  double t = 0.0;
  RealPoint center;
  ComplexPoint z_plus;
  RealPoint check;
  double power = 0.0;
  double residual = 0.0;
};

struct PseudoTrajectory {
  RealPoint target;
  std::vector<PseudoNode> nodes;
};

struct WorkResult {
  double W = 0.0;
  double W_endpoint = 0.0;
  double G_initial = 0.0;     // G_{t_i}(p, q)
  double G_propagated = 0.0;  // G_{t_f}^{(t_i)}(p, q)
  PseudoTrajectory trajectory;

  double mismatch() const { return std::abs(W - W_endpoint); }
};

// Pseudo-work along the pseudo-trajectory started at target, by composite
// Simpson over n_time_steps intervals, plus the endpoint-difference value.
// Throws WorkMismatch when the two disagree beyond work_tol unless
// enforce_match is false.
WorkResult pseudo_work(const HamiltonianModel& model, double t_i, double t_f, RealPoint target,
                       double hbar_beta, const IntegratorSettings& settings,
                       bool enforce_match = true);

}  // namespace scjarz
