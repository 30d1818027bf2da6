#include "scjarz/complex_dynamics.hpp"

#include <cmath>
#include <sstream>

#include "scjarz/errors.hpp"

namespace scjarz {

namespace {

const cplx I{0.0, 1.0};

void fail_validation(const std::string& field, const std::string& message) {
  throw NumericalError(ErrorKind::Validation, field + ": " + message);
}

// d/dsigma (p, q) = (i dH/dq, -i dH/dp); the factor i is folded into the step.
ComplexPoint imaginary_rhs(const FrozenGradient& grad, const ComplexPoint& z) {
  const Gradient g = grad(z);
  return {g.dq, -g.dp};
}

ComplexPoint rk4_imaginary_step(const FrozenGradient& grad, const ComplexPoint& z, double h) {
  const cplx ih{0.0, h};
  const ComplexPoint k1 = imaginary_rhs(grad, z);
  const ComplexPoint k2 = imaginary_rhs(grad, z + (0.5 * ih) * k1);
  const ComplexPoint k3 = imaginary_rhs(grad, z + (0.5 * ih) * k2);
  const ComplexPoint k4 = imaginary_rhs(grad, z + ih * k3);
  return z + (ih / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void require_finite(const ComplexPoint& z, const char* where) {
  if (!z.finite()) {
    throw NumericalError(ErrorKind::IntegratorDiverged,
                         std::string(where) + ": trajectory left the finite range");
  }
}

struct AugmentedState {
  ComplexPoint z;
  cplx action;
};

AugmentedState real_rhs(const HamiltonianModel& model, double t, const AugmentedState& s) {
  const Gradient g = model.grad_unchecked(t, s.z);
  const cplx h = model.eval_unchecked(t, s.z);
  return {{-g.dq, g.dp}, s.z.p * g.dp - h};
}

AugmentedState axpy(const AugmentedState& s, double h, const AugmentedState& k) {
  return {s.z + h * k.z, s.action + h * k.action};
}

}  // namespace

void IntegratorSettings::validate() const {
  if (n_sigma_steps < 8) fail_validation("numerics.n_sigma_steps", "must be >= 8");
  if (n_time_steps < 2 || n_time_steps % 2 != 0) {
    fail_validation("numerics.n_time_steps", "must be even and >= 2");
  }
  if (real_substeps < 1) fail_validation("numerics.real_substeps", "must be >= 1");
  if (!(tolerance > 0.0)) fail_validation("numerics.tolerance", "must be > 0");
  if (!(newton_tol > 0.0)) fail_validation("numerics.newton_tol", "must be > 0");
  if (continuation_stages < 0) fail_validation("numerics.continuation_stages", "must be >= 0");
  if (max_newton_iters < 1) fail_validation("numerics.max_newton_iters", "must be >= 1");
  if (!(work_tol > 0.0)) fail_validation("numerics.work_tol", "must be > 0");
  if (threads < 1) fail_validation("run.threads", "must be >= 1");
}

ComplexPoint propagate_imaginary(const HamiltonianModel& model, double t, const ComplexPoint& z0,
                                 double sigma_span, int steps) {
  if (sigma_span == 0.0) return z0;
  const double h = sigma_span / steps;
  const FrozenGradient grad = model.frozen(t);
  ComplexPoint z = z0;
  for (int k = 0; k < steps; ++k) {
    z = rk4_imaginary_step(grad, z, h);
    require_finite(z, "imaginary flow");
  }
  return z;
}

std::vector<ComplexPoint> flow_imaginary(const HamiltonianModel& model, double t,
                                         const ComplexPoint& z0, double sigma_from,
                                         double sigma_to, const IntegratorSettings& settings) {
  model.protocol().require_in_range(t);
  if (sigma_from == sigma_to) return {z0};

  const int n = settings.n_sigma_steps;
  const double h = (sigma_to - sigma_from) / n;
  std::vector<ComplexPoint> path;
  path.reserve(n + 1);
  path.push_back(z0);
  const FrozenGradient grad = model.frozen(t);
  for (int k = 0; k < n; ++k) {
    path.push_back(rk4_imaginary_step(grad, path.back(), h));
    require_finite(path.back(), "imaginary flow");
  }

  if (settings.richardson_check) {
    const ComplexPoint fine = propagate_imaginary(model, t, z0, sigma_to - sigma_from, 2 * n);
    const double gap = norm(fine - path.back());
    if (gap > settings.tolerance * (1.0 + norm(fine))) {
      std::ostringstream os;
      os << "imaginary flow: step-halving disagreement " << gap << " exceeds tolerance";
      throw NumericalError(ErrorKind::ToleranceExceeded, os.str());
    }
  }
  return path;
}

cplx simpson(const std::vector<cplx>& values, double h) {
  const std::size_t n = values.size();
  if (n == 1) return 0.0;
  if (n < 3 || n % 2 == 0) {
    throw NumericalError(ErrorKind::Validation, "simpson: need an odd sample count >= 3");
  }
  cplx odd = 0.0, even = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) (k % 2 ? odd : even) += values[k];
  return h / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

double simpson(const std::vector<double>& values, double h) {
  const std::size_t n = values.size();
  if (n == 1) return 0.0;
  if (n < 3 || n % 2 == 0) {
    throw NumericalError(ErrorKind::Validation, "simpson: need an odd sample count >= 3");
  }
  double odd = 0.0, even = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) (k % 2 ? odd : even) += values[k];
  return h / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

ImaginaryArc build_arc(const HamiltonianModel& model, double t, const ComplexPoint& center,
                       double hbar_beta, const IntegratorSettings& settings) {
  if (!(hbar_beta > 0.0)) {
    throw NumericalError(ErrorKind::Validation, "build_arc: hbar*beta must be > 0");
  }
  const double half = 0.5 * hbar_beta;
  const auto upper = flow_imaginary(model, t, center, 0.0, half, settings);
  const auto lower = flow_imaginary(model, t, center, 0.0, -half, settings);
  const int n = settings.n_sigma_steps;
  const double h = half / n;

  ImaginaryArc arc;
  arc.t = t;
  arc.hbar_beta = hbar_beta;
  arc.center = center;
  arc.sigma.reserve(2 * n + 1);
  arc.points.reserve(2 * n + 1);
  for (int k = n; k >= 1; --k) {
    arc.sigma.push_back(-k * h);
    arc.points.push_back(lower[k]);
  }
  for (int k = 0; k <= n; ++k) {
    arc.sigma.push_back(k * h);
    arc.points.push_back(upper[k]);
  }
  arc.z_minus = arc.points.front();
  arc.z_plus = arc.points.back();
  arc.chord = arc.z_plus.q - arc.z_minus.q;

  // p dq/dsigma with dq/dsigma = -i dH/dp on the stored samples.
  std::vector<cplx> integrand;
  integrand.reserve(arc.points.size());
  for (const auto& z : arc.points) {
    integrand.push_back(z.p * (-I * model.grad_unchecked(t, z).dp));
  }
  arc.line_integral = simpson(integrand, h);

  const cplx du{0.0, -hbar_beta};
  arc.action = arc.line_integral - du * model.eval_unchecked(t, center);
  const cplx p_mid = 0.5 * (arc.z_minus.p + arc.z_plus.p);
  const cplx area = I * (arc.line_integral - p_mid * arc.chord);
  arc.area = area.real();
  arc.area_imag = area.imag();
  return arc;
}

int real_time_steps(const HamiltonianModel& model, double duration,
                    const IntegratorSettings& settings) {
  if (duration == 0.0) return 0;
  const double span = model.protocol().span() > 0.0 ? model.protocol().span() : 1.0;
  const double h_max = span / (settings.n_time_steps * settings.real_substeps);
  return std::max(1, static_cast<int>(std::ceil(std::abs(duration) / h_max - 1e-9)));
}

RealFlowWithAction flow_real_with_action(const HamiltonianModel& model, double t_from,
                                         double t_to, const ComplexPoint& z,
                                         const IntegratorSettings& settings) {
  model.protocol().require_in_range(t_from);
  model.protocol().require_in_range(t_to);
  const int n = real_time_steps(model, t_to - t_from, settings);
  if (n == 0) return {z, 0.0};

  const double h = (t_to - t_from) / n;
  AugmentedState s{z, 0.0};
  for (int k = 0; k < n; ++k) {
    const double t = t_from + k * h;
    const AugmentedState k1 = real_rhs(model, t, s);
    const AugmentedState k2 = real_rhs(model, t + 0.5 * h, axpy(s, 0.5 * h, k1));
    const AugmentedState k3 = real_rhs(model, t + 0.5 * h, axpy(s, 0.5 * h, k2));
    const AugmentedState k4 = real_rhs(model, t + h, axpy(s, h, k3));
    s.z = s.z + (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    s.action += h / 6.0 * (k1.action + 2.0 * k2.action + 2.0 * k3.action + k4.action);
    require_finite(s.z, "real-time flow");
  }
  return {s.z, s.action};
}

ComplexPoint flow_real(const HamiltonianModel& model, double t_from, double t_to,
                       const ComplexPoint& z, const IntegratorSettings& settings) {
  return flow_real_with_action(model, t_from, t_to, z, settings).point;
}

}  // namespace scjarz
