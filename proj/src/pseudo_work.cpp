#include "scjarz/pseudo_work.hpp"

#include <cmath>
#include <sstream>

#include "scjarz/errors.hpp"

namespace scjarz {

RealPoint composite_map(const HamiltonianModel& model, double t_i, double t_f, RealPoint z,
                        double hbar_beta, const IntegratorSettings& settings) {
  model.protocol().require_in_range(t_f);
  const ComplexPoint end =
      propagate_imaginary(model, t_f, z.complex(), 0.5 * hbar_beta, settings.n_sigma_steps);
  return real_part(flow_real(model, t_f, t_i, end, settings));
}

PseudoState solve_pseudo_state(const HamiltonianModel& model, double t_i, double t_f,
                               RealPoint target, double hbar_beta,
                               const IntegratorSettings& settings,
                               std::optional<RealPoint> warm_start) {
  if (!(t_f >= t_i)) {
    throw NumericalError(ErrorKind::Validation, "solve_pseudo_state: requires t_i <= t_f");
  }
  model.protocol().require_in_range(t_i);
  model.protocol().require_in_range(t_f);

  // For short arcs the centre approaches the classical image of the target.
  const RealPoint guess = warm_start.value_or(
      t_f == t_i ? target : real_part(flow_real(model, t_i, t_f, target.complex(), settings)));
  const FamilyMap map = [&](RealPoint z, double hb) {
    return composite_map(model, t_i, t_f, z, hb, settings);
  };

  PseudoState state;
  state.t = t_f;
  state.target = target;
  state.trace = invert_real_map(map, target, hbar_beta, guess, settings,
                                warm_start.has_value() || model.kind() == ModelKind::Harmonic);
  state.center = state.trace.solution;
  state.arc = build_arc(model, t_f, state.center.complex(), hbar_beta, settings);
  state.check = real_part(state.arc.chord_midpoint());
  return state;
}

double pseudo_power(const HamiltonianModel& model, const ImaginaryArc& arc,
                    const IntegratorSettings& settings) {
  if (arc.points.size() < 3) {
    throw NumericalError(ErrorKind::Validation, "pseudo_power: arc has no extent");
  }
  model.protocol().require_in_range(arc.t);
  std::vector<cplx> values;
  values.reserve(arc.points.size());
  for (const auto& z : arc.points) values.push_back(model.dt_unchecked(arc.t, z));
  const double h = arc.sigma[1] - arc.sigma[0];
  const cplx power = simpson(values, h) / arc.hbar_beta;
  if (std::abs(power.imag()) > settings.tolerance * (1.0 + std::abs(power.real()))) {
    std::ostringstream os;
    os << "pseudo-power imaginary residue " << power.imag() << " at t = " << arc.t;
    throw NumericalError(ErrorKind::ToleranceExceeded, os.str());
  }
  return power.real();
}

PropagatedEnergy propagated_energy(const HamiltonianModel& model, double t_i,
                                   const PseudoState& state, const IntegratorSettings& settings) {
  const ImaginaryArc& arc = state.arc;
  // Integrating backward accumulates minus the forward action of each branch.
  const RealFlowWithAction lower = flow_real_with_action(model, arc.t, t_i, arc.z_minus, settings);
  const RealFlowWithAction upper = flow_real_with_action(model, arc.t, t_i, arc.z_plus, settings);
  const cplx action_lower = -lower.action;
  const cplx action_upper = -upper.action;

  PropagatedEnergy out;
  out.lower_branch_at_t_i = lower.point;
  out.upper_branch_at_t_i = upper.point;
  out.chord_at_t_i = upper.point.q - lower.point.q;
  const cplx total =
      -state.target.p * out.chord_at_t_i + action_lower + arc.action - action_upper;
  const cplx G = total / cplx(0.0, arc.hbar_beta);
  out.G = G.real();
  out.G_imag = G.imag();
  return out;
}

WorkResult pseudo_work(const HamiltonianModel& model, double t_i, double t_f, RealPoint target,
                       double hbar_beta, const IntegratorSettings& settings, bool enforce_match) {
  const int n = settings.n_time_steps;
  if (n < 2 || n % 2 != 0) {
    throw NumericalError(ErrorKind::Validation, "numerics.n_time_steps: must be even and >= 2");
  }
  const double dt = (t_f - t_i) / n;

  WorkResult result;
  result.trajectory.target = target;
  result.trajectory.nodes.reserve(n + 1);
  std::vector<double> powers;
  powers.reserve(n + 1);

  std::optional<RealPoint> warm;
  PseudoState state;
  for (int j = 0; j <= n; ++j) {
    const double t = j == n ? t_f : t_i + j * dt;
    state = solve_pseudo_state(model, t_i, t, target, hbar_beta, settings, warm);
    warm = state.center;
    const double power = pseudo_power(model, state.arc, settings);
    powers.push_back(power);
    result.trajectory.nodes.push_back(
        {t, state.center, state.arc.z_plus, state.check, power, state.trace.residual});
    if (j == 0) {
      const double h_center = model.eval_unchecked(t, state.arc.center).real();
      result.G_initial = h_center - state.arc.area / hbar_beta;
    }
  }

  result.W = simpson(powers, dt);
  result.G_propagated = propagated_energy(model, t_i, state, settings).G;
  result.W_endpoint = result.G_propagated - result.G_initial;

  if (enforce_match && result.mismatch() > settings.work_tol * (1.0 + std::abs(result.W))) {
    std::ostringstream os;
    os.precision(17);
    os << "pseudo-work path/endpoint mismatch: W = " << result.W
       << ", W_endpoint = " << result.W_endpoint << " at (" << target.p << ", " << target.q
       << ")";
    throw NumericalError(ErrorKind::WorkMismatch, os.str());
  }
  return result;
}

}  // namespace scjarz
