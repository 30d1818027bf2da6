#include "scjarz/stationary_phase.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "scjarz/errors.hpp"

namespace scjarz {

namespace {

constexpr double kCausticDet = 1e-10;
constexpr double kDampingFloor = 1.0 / 1024.0;

struct Jacobian {
  double a, b, c, d;  // [[dFp/dp, dFp/dq], [dFq/dp, dFq/dq]]
  double det() const { return a * d - b * c; }
};

Jacobian central_jacobian(const std::function<RealPoint(RealPoint)>& f, RealPoint z) {
  const double h = 1e-6 * (1.0 + norm(z));
  const RealPoint fp_plus = f({z.p + h, z.q});
  const RealPoint fp_minus = f({z.p - h, z.q});
  const RealPoint fq_plus = f({z.p, z.q + h});
  const RealPoint fq_minus = f({z.p, z.q - h});
  return {(fp_plus.p - fp_minus.p) / (2 * h), (fq_plus.p - fq_minus.p) / (2 * h),
          (fp_plus.q - fp_minus.q) / (2 * h), (fq_plus.q - fq_minus.q) / (2 * h)};
}

[[noreturn]] void throw_caustic(RealPoint z, double det) {
  std::ostringstream os;
  os << "stationary-phase Jacobian degenerate (det = " << det << ") near (" << z.p << ", "
     << z.q << ")";
  throw NumericalError(ErrorKind::CausticEncountered, os.str());
}

struct Attempt {
  bool converged = false;
  RealPoint z;
  double residual = 0.0;
  double det = 0.0;
  int iters = 0;
};

// One damped Newton run at fixed hbar*beta. Never throws for plain
// non-convergence; throws only on a caustic.
Attempt newton_attempt(const std::function<RealPoint(RealPoint)>& f, RealPoint target,
                       RealPoint guess, const IntegratorSettings& settings,
                       std::vector<double>& history) {
  const double tol = settings.newton_tol * (1.0 + norm(target));
  Attempt out;
  out.z = guess;
  RealPoint F;
  try {
    F = f(guess) - target;
  } catch (const NumericalError& e) {
    if (e.kind() != ErrorKind::IntegratorDiverged) throw;
    return out;
  }
  out.residual = norm(F);
  bool have_det = false;

  while (out.iters < settings.max_newton_iters) {
    if (out.residual <= tol) {
      if (!have_det) {
        out.det = central_jacobian(f, out.z).det();
        if (std::abs(out.det) < kCausticDet) throw_caustic(out.z, out.det);
      }
      out.converged = true;
      return out;
    }
    const Jacobian J = central_jacobian(f, out.z);
    out.det = J.det();
    have_det = true;
    if (std::abs(out.det) < kCausticDet || !std::isfinite(out.det)) throw_caustic(out.z, out.det);
    const RealPoint step{-(J.d * F.p - J.b * F.q) / out.det, -(-J.c * F.p + J.a * F.q) / out.det};

    bool accepted = false;
    for (double damping = 1.0; damping >= kDampingFloor; damping *= 0.5) {
      const RealPoint trial = out.z + damping * step;
      RealPoint trial_F;
      try {
        trial_F = f(trial) - target;
      } catch (const NumericalError& e) {
        if (e.kind() != ErrorKind::IntegratorDiverged) throw;
        continue;
      }
      const double trial_residual = norm(trial_F);
      if (trial_residual < out.residual) {
        out.z = trial;
        F = trial_F;
        out.residual = trial_residual;
        accepted = true;
        break;
      }
    }
    ++out.iters;
    if (!accepted) return out;
    history.push_back(out.residual);
  }
  out.converged = out.residual <= tol;
  return out;
}

// Follows the root from hbar*beta = 0, where it equals `guess` with unit
// Jacobian (the maps reduce to symplectic real flows), up to hbar_beta. A step
// is accepted when Newton converges, det J keeps its sign and changes by less
// than a factor 3, and the root lands within 10% of the secant prediction;
// otherwise the step is halved down to min_step. The checks keep the solver
// from jumping onto a root of another branch past a caustic.
template <class At>
bool follow_branch(const At& at, RealPoint target, RealPoint guess,
                   const IntegratorSettings& settings, double hbar_beta, double first_step,
                   double max_step, double min_step, RealMapSolve& result, std::string& stall,
                   bool& near_fold) {
  result.stage_residuals.clear();
  result.stages = 0;
  RealPoint z_prev = guess, z_cur = guess;
  double hb_prev = 0.0, current = 0.0, det = 1.0;
  double step = first_step;
  while (current < hbar_beta) {
    const double next = std::min(hbar_beta, current + step);
    RealPoint predicted = z_cur;
    if (current > hb_prev) {
      predicted = z_cur + ((next - current) / (current - hb_prev)) * (z_cur - z_prev);
    }
    bool ok = false;
    Attempt stage;
    try {
      stage = newton_attempt(at(next), target, predicted, settings, result.residual_history);
      result.newton_iters += stage.iters;
      const double ratio = stage.det / det;
      ok = stage.converged && ratio > 1.0 / 3.0 && ratio < 3.0 &&
           norm(stage.z - predicted) <= 0.1 * (1.0 + norm(z_cur));
    } catch (const NumericalError& e) {
      if (e.kind() != ErrorKind::CausticEncountered) throw;
    }
    if (ok) {
      z_prev = z_cur;
      hb_prev = current;
      z_cur = stage.z;
      current = next;
      det = stage.det;
      result.stage_residuals.push_back(stage.residual);
      result.solution = stage.z;
      result.residual = stage.residual;
      result.jacobian_det = stage.det;
      ++result.stages;
      step = std::min(2.0 * step, max_step);
      continue;
    }
    step *= 0.5;
    if (step < min_step) {
      near_fold = std::abs(det) < 0.1;
      std::ostringstream os;
      os << "continuation stalled at hbar*beta = " << current << " of " << hbar_beta
         << " (det J = " << det << ")" << (near_fold ? ": stationary point meets a caustic" : "");
      stall = os.str();
      return false;
    }
  }
  return true;
}

}  // namespace

RealMapSolve invert_real_map(const FamilyMap& map, RealPoint target, double hbar_beta,
                             RealPoint initial_guess, const IntegratorSettings& settings,
                             bool warm) {
  RealMapSolve result;
  auto at = [&](double hb) { return [&map, hb](RealPoint z) { return map(z, hb); }; };

  // A warm guess already sits on the branch; a cold one may converge onto a
  // root of another branch past a caustic, so it is selected by continuation.
  bool direct_caustic = false;
  if (warm || settings.continuation_stages == 0) {
    try {
      const Attempt direct = newton_attempt(at(hbar_beta), target, initial_guess, settings,
                                            result.residual_history);
      result.newton_iters = direct.iters;
      if (direct.converged) {
        result.solution = direct.z;
        result.residual = direct.residual;
        result.jacobian_det = direct.det;
        result.stage_residuals = {direct.residual};
        return result;
      }
    } catch (const NumericalError& e) {
      if (e.kind() != ErrorKind::CausticEncountered || settings.continuation_stages == 0) throw;
      direct_caustic = true;
    }
    if (settings.continuation_stages == 0) {
      throw NumericalError(ErrorKind::NewtonDiverged, "Newton iteration failed to converge");
    }
  }

  result.residual_history.clear();
  std::string stall;
  bool near_fold = false;
  // Two stages first; the fine schedule only when the coarse one is rejected.
  if (follow_branch(at, target, initial_guess, settings, hbar_beta, 0.5 * hbar_beta,
                    0.5 * hbar_beta, 0.5 * hbar_beta, result, stall, near_fold)) {
    return result;
  }
  const int K = settings.continuation_stages;
  if (K > 1 &&
      follow_branch(at, target, initial_guess, settings, hbar_beta, std::ldexp(hbar_beta, -K),
                    hbar_beta / 8.0, std::ldexp(hbar_beta, -(K + 8)), result, stall,
                    near_fold)) {
    return result;
  }
  if (direct_caustic) stall += " (direct solve hit a caustic)";
  throw NumericalError(near_fold ? ErrorKind::CausticEncountered : ErrorKind::NewtonDiverged,
                       stall);
}

RealPoint midpoint_map(const HamiltonianModel& model, double t, RealPoint z, double hbar_beta,
                       const IntegratorSettings& settings) {
  model.protocol().require_in_range(t);
  return real_part(
      propagate_imaginary(model, t, z.complex(), 0.5 * hbar_beta, settings.n_sigma_steps));
}

MidpointSolve invert_midpoint(const HamiltonianModel& model, double t, RealPoint target,
                              double hbar_beta, const IntegratorSettings& settings,
                              std::optional<RealPoint> warm_start) {
  if (!std::isfinite(target.p) || !std::isfinite(target.q)) {
    throw NumericalError(ErrorKind::Validation, "invert_midpoint: target must be finite");
  }
  model.protocol().require_in_range(t);
  const FamilyMap map = [&](RealPoint z, double hb) {
    return midpoint_map(model, t, z, hb, settings);
  };
  MidpointSolve out;
  out.target = target;
  // Quadratic models have linear maps and a unique root.
  out.trace = invert_real_map(map, target, hbar_beta, warm_start.value_or(target), settings,
                              warm_start.has_value() || model.kind() == ModelKind::Harmonic);
  out.center = out.trace.solution;
  out.newton_iters = out.trace.newton_iters;
  out.jacobian_det = out.trace.jacobian_det;
  out.residual = out.trace.residual;
  out.arc = build_arc(model, t, out.center.complex(), hbar_beta, settings);
  return out;
}

EndpointHessian endpoint_action_hessian(const HamiltonianModel& model, const ImaginaryArc& arc,
                                        const IntegratorSettings& settings) {
  const int steps = 2 * settings.n_sigma_steps;
  const double span = arc.hbar_beta;
  const ComplexPoint z0 = arc.z_minus;
  const double h = 1e-5 * (1.0 + norm(z0));
  auto flow = [&](ComplexPoint z) { return propagate_imaginary(model, arc.t, z, span, steps); };

  const ComplexPoint dp =
      (1.0 / (2 * h)) * (flow({z0.p + h, z0.q}) - flow({z0.p - h, z0.q}));
  const ComplexPoint dq =
      (1.0 / (2 * h)) * (flow({z0.p, z0.q + h}) - flow({z0.p, z0.q - h}));
  // Monodromy [[a, b], [c, d]] = d(p1, q1) / d(p0, q0).
  const cplx a = dp.p, c = dp.q, d = dq.q;
  return {d / c, a / c, -1.0 / c};
}

double thermal_prefactor(const EndpointHessian& hs, double hbar) {
  const double num = 2.0 * std::abs(hs.s01);
  const double den = std::abs(hs.s01 - 0.5 * (hs.s11 + hs.s00));
  return std::sqrt(num / den) / (2.0 * std::numbers::pi * hbar);
}

PseudoHamiltonianValue pseudo_hamiltonian(const HamiltonianModel& model, double t,
                                          RealPoint target, double beta, double hbar,
                                          const IntegratorSettings& settings,
                                          bool with_prefactor,
                                          std::optional<RealPoint> warm_start) {
  const double hb = hbar * beta;
  MidpointSolve solve = invert_midpoint(model, t, target, hb, settings, warm_start);
  const ImaginaryArc& arc = solve.arc;

  PseudoHamiltonianValue out;
  const double h_center = model.eval_unchecked(t, arc.center).real();
  out.G = h_center - arc.area / hb;
  const cplx total = (-target.p * arc.chord + arc.action) / cplx(0.0, hb);
  out.G_from_total_action = total.real();
  out.G_imag = total.imag();
  out.center = solve.center;
  out.jacobian_det = solve.jacobian_det;
  out.newton_iters = solve.newton_iters;

  const double scale = settings.tolerance * (1.0 + std::abs(out.G));
  if (std::abs(arc.area_imag) / hb > scale || std::abs(out.G_imag) > scale) {
    std::ostringstream os;
    os << "pseudo-Hamiltonian has imaginary residue " << std::abs(out.G_imag) << " at ("
       << target.p << ", " << target.q << ")";
    throw NumericalError(ErrorKind::ToleranceExceeded, os.str());
  }
  if (with_prefactor) {
    out.prefactor = thermal_prefactor(endpoint_action_hessian(model, arc, settings), hbar);
  }
  out.arc = std::move(solve.arc);
  return out;
}

}  // namespace scjarz
