#pragma once

#include <vector>

#include "scjarz/hamiltonian.hpp"

namespace scjarz {

// Numerical knobs shared by the trajectory integrators and the boundary-value
// solvers built on top of them.
struct IntegratorSettings {
  int n_sigma_steps = 64;       // RK4 steps per imaginary half-arc
  int n_time_steps = 64;        // time nodes for the pseudo-work quadrature (even)
  int real_substeps = 2;        // RK4 steps per time-node interval in real time
  bool richardson_check = false;
  double tolerance = 1e-8;      // integrator / imaginary-residue tolerance
  double newton_tol = 1e-11;    // boundary-value residual, relative to 1 + |target|
  int continuation_stages = 6;  // beta-continuation halvings
  int max_newton_iters = 50;
  double work_tol = 1e-6;       // |W - W_endpoint| <= work_tol (1 + |W|)
  int threads = 1;

  // Throws Validation describing the first offending field.
  void validate() const;
};

// Frozen-time imaginary-time arc, sampled on a uniform sigma grid over
// [-hbar*beta/2, +hbar*beta/2] with imaginary time u = -i sigma.
struct ImaginaryArc {
  double t = 0.0;
  double hbar_beta = 0.0;
  std::vector<double> sigma;
  std::vector<ComplexPoint> points;
  ComplexPoint center;
  ComplexPoint z_minus;  // sigma = -hbar*beta/2
  ComplexPoint z_plus;   // sigma = +hbar*beta/2
  cplx chord = 0.0;      // q_plus - q_minus
  cplx line_integral = 0.0;  // integral of p dq along the arc
  cplx action = 0.0;     // line integral - du H_t(center), du = -i hbar beta
  double area = 0.0;     // Re[i (line integral - p_mid chord)]
  double area_imag = 0.0;

  ComplexPoint chord_midpoint() const { return 0.5 * (z_minus + z_plus); }
};

// Imaginary-time Hamilton flow at frozen time t,
//   dp/dsigma = +i dH/dq,  dq/dsigma = -i dH/dp,
// integrated with fixed-step RK4 from sigma_from to sigma_to. The returned
// path holds both endpoints (n_sigma_steps + 1 samples, or one sample when the
// span is empty).
std::vector<ComplexPoint> flow_imaginary(const HamiltonianModel& model, double t,
                                         const ComplexPoint& z0, double sigma_from,
                                         double sigma_to, const IntegratorSettings& settings);

// Endpoint-only variant of flow_imaginary with an explicit step count.
ComplexPoint propagate_imaginary(const HamiltonianModel& model, double t, const ComplexPoint& z0,
                                 double sigma_span, int steps);

ImaginaryArc build_arc(const HamiltonianModel& model, double t, const ComplexPoint& center,
                       double hbar_beta, const IntegratorSettings& settings);

// Real-time Hamilton flow with the running Hamiltonian H_t; backward
// integration (t_to < t_from) is allowed.
ComplexPoint flow_real(const HamiltonianModel& model, double t_from, double t_to,
                       const ComplexPoint& z, const IntegratorSettings& settings);

struct RealFlowWithAction {
  ComplexPoint point;
  cplx action = 0.0;  // integral of (p dq/dt - H_t) dt from t_from to t_to
};

RealFlowWithAction flow_real_with_action(const HamiltonianModel& model, double t_from,
                                         double t_to, const ComplexPoint& z,
                                         const IntegratorSettings& settings);

// Number of RK4 steps used for a real-time leg of the given duration.
int real_time_steps(const HamiltonianModel& model, double duration,
                    const IntegratorSettings& settings);

// Composite Simpson over uniformly spaced samples (odd count >= 3, or 1).
cplx simpson(const std::vector<cplx>& values, double h);
double simpson(const std::vector<double>& values, double h);

}  // namespace scjarz
