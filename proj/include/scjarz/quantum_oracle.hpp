#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

#include "scjarz/jarzynski.hpp"

namespace scjarz {

// Dense operator in the Fock basis of the reference oscillator (mass, omega, hbar).
struct FockOperator {
  Eigen::MatrixXcd matrix;
  double mass = 1.0;
  double omega = 1.0;
  double hbar = 1.0;

  int dimension() const { return static_cast<int>(matrix.rows()); }
  cplx trace() const { return matrix.trace(); }
  double hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
  // Diagonal weight of the highest Fock level relative to the trace.
  double top_level_weight() const;
};

struct OscillatorScales {
  double mass = 1.0;
  double omega = 1.0;
  double hbar = 1.0;

  void validate() const;
};

FockOperator fock_projector(int n, int n_max, const OscillatorScales& scales);
FockOperator fock_identity(int n_max, const OscillatorScales& scales);
// Truncations of the position and momentum operators (tridiagonal).
FockOperator position_operator(int n_max, const OscillatorScales& scales);
FockOperator momentum_operator(int n_max, const OscillatorScales& scales);
// Product with matrix elements exact inside the truncated space.
FockOperator exact_product(const FockOperator& a_full, const FockOperator& b_full, int n_max);

// Truncation diagnostic threshold on the top Fock level.
inline constexpr double kTopLevelLimit = 1e-10;

// Eigenvalues (ascending) of H = p^2/2m + m omega^2 q^2 / 2 + lambda q^4 restricted to
// the first n_max Fock states.
Eigen::VectorXd fock_spectrum(double lambda, int n_max, const OscillatorScales& scales);

// exp(-beta H) in the Fock basis. Throws TruncationInsufficient when the top
// level carries more than kTopLevelLimit of the trace (not checked at beta = 0).
FockOperator thermal_fock(ModelKind kind, double lambda, double beta, int n_max,
                          const OscillatorScales& scales);

// psi_n(q_k) for n < n_max, rows indexed by k; stabilized three-term recurrence
// in x = q sqrt(m omega / hbar).
Eigen::MatrixXd hermite_functions(int n_max, std::span<const double> q,
                                  const OscillatorScales& scales);

// q_k = (k - n_q/2) dq with dq = 2 q_max / n_q. The momentum grid is the FFT
// conjugate of the chord Q = 2 j dq: dp = pi hbar / (n_q dq).
struct WignerGridSpec {
  int n_q = 256;
  double q_max = 8.0;

  void validate() const;
};

struct WignerGrid {
  std::vector<double> q;  // ascending
  std::vector<double> p;  // ascending
  double dq = 0.0;
  double dp = 0.0;
  Eigen::MatrixXd W;      // W(ip, iq)
  double max_imag = 0.0;  // largest discarded imaginary part

  double integral() const { return W.sum() * dq * dp; }
};

// (1 / 2 pi hbar) * integral of exp(-i p Q / hbar) <q + Q/2| op |q - Q/2> dQ on
// the grid. Throws GridTooNarrow when a Fock function touched by op does not
// decay below 1e-12 at the edges of either grid.
WignerGrid wigner_transform(const FockOperator& op, const WignerGridSpec& spec);

void write_wigner_csv(std::ostream& out, const WignerGrid& grid);

class HarmonicClosedForms {
 public:
  HarmonicClosedForms(double beta, double hbar, double mass, double omega);

  double H(double p, double q) const;
  // Weyl symbol of exp(-beta H).
  double weyl_symbol(double p, double q) const;
  double G(double p, double q) const;
  // Rate of change of G for a frequency changing at omega_dot.
  double pseudo_power(double p, double q, double omega_dot) const;
  // Tr exp(-beta H).
  double Z() const;
  // Semi-classical partition integral of exp(-beta G).
  double Z_sc() const;
  // Wigner function of the projector |n><n|.
  double fock_wigner(int n, double p, double q) const;

 private:
  double beta_, hbar_, mass_, omega_;
};

double laguerre_generating_series(double X, double Y, int n_terms);
double laguerre_generating_closed(double X, double Y);

struct ConventionAudit {
  cplx trace_fock;          // Tr(A B)
  double phase_space = 0.0; // integral of W_A W_B
  double ratio = 0.0;       // Re(trace_fock) / phase_space
};

ConventionAudit weyl_convention_audit(const FockOperator& a, const FockOperator& b,
                                      const WignerGridSpec& spec);

// Tr(p q rho) from Fock matrices against the phase-space average of the
// symbol p q + hbar / 2i.
struct OrderingCheck {
  cplx trace_fock;
  cplx trace_symbol;
  double error = 0.0;
};

OrderingCheck ordering_check(const FockOperator& rho, const WignerGridSpec& spec);

// Normalized quantum Wigner density W / Tr(rho) against the normalized
// semi-classical density exp(-beta G) / Z_sc at frozen time t, compared on
// Wigner grid points with |p|, |q| <= window (at most `samples` per axis).
struct DensityComparison {
  double linf_gap = 0.0;
  double peak = 0.0;  // max of the normalized quantum density on the sample
  double quantum_norm = 0.0;
  double semiclassical_norm = 0.0;
  std::size_t points = 0;
};

DensityComparison compare_thermal_densities(const HamiltonianModel& model, double t,
                                            double beta, double hbar, int n_max,
                                            const WignerGridSpec& wigner,
                                            const QuadratureDomain& domain,
                                            const IntegratorSettings& settings, double window,
                                            int samples = 41);

}  // namespace scjarz
