#include "scjarz/quantum_oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "scjarz/errors.hpp"
#include "scjarz/parallel.hpp"

namespace scjarz {

namespace {

constexpr double kEdgeDecay = 1e-12;

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw NumericalError(ErrorKind::Validation, field + ": " + message);
}

void require_dimension(int n_max) {
  if (n_max < 1) invalid("numerics.n_max", "must be >= 1");
}

// Annihilation operator on the first n Fock states.
Eigen::MatrixXcd annihilation(int n) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Eigen::MatrixXcd position_matrix(int n, const OscillatorScales& s) {
  const Eigen::MatrixXcd a = annihilation(n);
  return std::sqrt(s.hbar / (2.0 * s.mass * s.omega)) * (a + a.adjoint());
}

Eigen::MatrixXcd momentum_matrix(int n, const OscillatorScales& s) {
  const Eigen::MatrixXcd a = annihilation(n);
  return cplx(0.0, std::sqrt(s.mass * s.hbar * s.omega / 2.0)) * (a.adjoint() - a);
}

// Hamiltonian block on the first n_max Fock states. q^4 couples levels four
// apart, so building in n_max + 4 makes every retained element exact.
Eigen::MatrixXcd fock_hamiltonian(double lambda, int n_max, const OscillatorScales& s) {
  const int d = n_max + 4;
  const Eigen::MatrixXcd q = position_matrix(d, s);
  const Eigen::MatrixXcd p = momentum_matrix(d, s);
  const Eigen::MatrixXcd q2 = q * q;
  const Eigen::MatrixXcd h =
      p * p / (2.0 * s.mass) + 0.5 * s.mass * s.omega * s.omega * q2 + lambda * q2 * q2;
  return h.topLeftCorner(n_max, n_max);
}

// Scaled Hermite functions psi_n(x) for n < n_max at one abscissa.
void hermite_column(int n_max, double x, double* out) {
  out[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (n_max > 1) out[1] = std::sqrt(2.0) * x * out[0];
  for (int n = 1; n + 1 < n_max; ++n) {
    out[n + 1] = std::sqrt(2.0 / (n + 1)) * x * out[n] -
                 std::sqrt(static_cast<double>(n) / (n + 1)) * out[n - 1];
  }
}

double max_hermite(int n_max, double x) {
  std::vector<double> v(n_max);
  hermite_column(n_max, x, v.data());
  double m = 0.0;
  for (double y : v) m = std::max(m, std::abs(y));
  return m;
}

// Highest Fock index with a nonzero row or column.
int support(const Eigen::MatrixXcd& m) {
  for (int n = static_cast<int>(m.rows()) - 1; n > 0; --n) {
    if (m.row(n).cwiseAbs().maxCoeff() > 0.0 || m.col(n).cwiseAbs().maxCoeff() > 0.0) return n;
  }
  return 0;
}

struct FftwPlan {
  fftw_complex* buffer;
  fftw_plan plan;

  explicit FftwPlan(int n)
      : buffer(fftw_alloc_complex(n)),
        plan(fftw_plan_dft_1d(n, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE)) {}
  ~FftwPlan() {
    fftw_destroy_plan(plan);
    fftw_free(buffer);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace

void OscillatorScales::validate() const {
  if (!(mass > 0.0)) invalid("model.m", "must be > 0");
  if (!(omega > 0.0)) invalid("model.omega_i", "must be > 0");
  if (!(hbar > 0.0)) invalid("physics.hbar", "must be > 0");
}

double FockOperator::top_level_weight() const {
  const int n = dimension();
  return std::abs(matrix(n - 1, n - 1)) / std::abs(trace());
}

FockOperator fock_projector(int n, int n_max, const OscillatorScales& scales) {
  require_dimension(n_max);
  scales.validate();
  if (n < 0 || n >= n_max) invalid("fock_projector", "level outside the truncated space");
  FockOperator op{Eigen::MatrixXcd::Zero(n_max, n_max), scales.mass, scales.omega, scales.hbar};
  op.matrix(n, n) = 1.0;
  return op;
}

FockOperator fock_identity(int n_max, const OscillatorScales& scales) {
  require_dimension(n_max);
  scales.validate();
  return {Eigen::MatrixXcd::Identity(n_max, n_max), scales.mass, scales.omega, scales.hbar};
}

FockOperator position_operator(int n_max, const OscillatorScales& scales) {
  require_dimension(n_max);
  scales.validate();
  return {position_matrix(n_max, scales), scales.mass, scales.omega, scales.hbar};
}

FockOperator momentum_operator(int n_max, const OscillatorScales& scales) {
  require_dimension(n_max);
  scales.validate();
  return {momentum_matrix(n_max, scales), scales.mass, scales.omega, scales.hbar};
}

FockOperator exact_product(const FockOperator& a_full, const FockOperator& b_full, int n_max) {
  if (a_full.dimension() < n_max + 1 || b_full.dimension() < n_max + 1) {
    invalid("exact_product", "factors need one level beyond the target dimension");
  }
  const Eigen::MatrixXcd prod = a_full.matrix * b_full.matrix;
  return {prod.topLeftCorner(n_max, n_max), a_full.mass, a_full.omega, a_full.hbar};
}

Eigen::VectorXd fock_spectrum(double lambda, int n_max, const OscillatorScales& scales) {
  require_dimension(n_max);
  scales.validate();
  if (!(lambda >= 0.0)) invalid("model.lambda", "must be >= 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(fock_hamiltonian(lambda, n_max, scales),
                                                         Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

FockOperator thermal_fock(ModelKind kind, double lambda, double beta, int n_max,
                          const OscillatorScales& scales) {
  require_dimension(n_max);
  scales.validate();
  if (!(beta >= 0.0)) invalid("physics.beta", "must be >= 0");
  FockOperator rho{Eigen::MatrixXcd::Zero(n_max, n_max), scales.mass, scales.omega, scales.hbar};
  if (kind == ModelKind::Harmonic) {
    for (int n = 0; n < n_max; ++n) {
      rho.matrix(n, n) = std::exp(-beta * scales.hbar * scales.omega * (n + 0.5));
    }
  } else {
    if (!(lambda >= 0.0)) invalid("model.lambda", "must be >= 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(fock_hamiltonian(lambda, n_max, scales));
    const Eigen::VectorXd e = solver.eigenvalues();
    const Eigen::VectorXcd weights = (-beta * e.array()).exp().matrix().cast<cplx>();
    rho.matrix = solver.eigenvectors() * weights.asDiagonal() * solver.eigenvectors().adjoint();
    rho.matrix = 0.5 * (rho.matrix + rho.matrix.adjoint()).eval();
  }
  if (beta > 0.0 && rho.top_level_weight() > kTopLevelLimit) {
    std::ostringstream os;
    os << "thermal_fock: top Fock level carries " << rho.top_level_weight()
       << " of the trace; raise numerics.n_max above " << n_max;
    throw NumericalError(ErrorKind::TruncationInsufficient, os.str());
  }
  return rho;
}

Eigen::MatrixXd hermite_functions(int n_max, std::span<const double> q,
                                  const OscillatorScales& scales) {
  require_dimension(n_max);
  scales.validate();
  const double c = std::sqrt(scales.mass * scales.omega / scales.hbar);
  const double norm = std::pow(c, 0.5);
  Eigen::MatrixXd psi(q.size(), n_max);
  std::vector<double> column(n_max);
  for (std::size_t k = 0; k < q.size(); ++k) {
    hermite_column(n_max, c * q[k], column.data());
    for (int n = 0; n < n_max; ++n) psi(k, n) = norm * column[n];
  }
  return psi;
}

void WignerGridSpec::validate() const {
  if (n_q < 8 || n_q % 2 != 0) invalid("numerics.wigner_n_q", "must be even and >= 8");
  if (!(q_max > 0.0)) invalid("numerics.wigner_q_max", "must be > 0");
}

WignerGrid wigner_transform(const FockOperator& op, const WignerGridSpec& spec) {
  spec.validate();
  const OscillatorScales scales{op.mass, op.omega, op.hbar};
  scales.validate();
  const int n = spec.n_q;
  const int half = n / 2;
  const int levels = support(op.matrix) + 1;

  WignerGrid grid;
  grid.dq = 2.0 * spec.q_max / n;
  grid.dp = std::numbers::pi * op.hbar / (n * grid.dq);
  grid.q.resize(n);
  grid.p.resize(n);
  for (int k = 0; k < n; ++k) {
    grid.q[k] = (k - half) * grid.dq;
    grid.p[k] = (k - half) * grid.dp;
  }

  const double xq = (spec.q_max - grid.dq) * std::sqrt(op.mass * op.omega / op.hbar);
  const double xp = (half - 1) * grid.dp / std::sqrt(op.mass * op.hbar * op.omega);
  const double edge = std::max(max_hermite(levels, xq), max_hermite(levels, xp));
  if (edge > kEdgeDecay) {
    std::ostringstream os;
    os << "wigner_transform: Fock functions up to n = " << levels - 1 << " reach " << edge
       << " at the grid edge; widen numerics.wigner_q_max or raise numerics.wigner_n_q";
    throw NumericalError(ErrorKind::GridTooNarrow, os.str());
  }

  const Eigen::MatrixXd psi = hermite_functions(levels, grid.q, scales);
  const Eigen::MatrixXcd kernel =
      psi.cast<cplx>() * op.matrix.topLeftCorner(levels, levels) * psi.transpose().cast<cplx>();

  grid.W.resize(n, n);
  const double scale = grid.dq / (std::numbers::pi * op.hbar);
  FftwPlan fft(n);
  for (int iq = 0; iq < n; ++iq) {
    for (int j = 0; j < n; ++j) {
      const int s = j < half ? j : j - n;
      const int a = iq + s, b = iq - s;
      const cplx v = (a >= 0 && a < n && b >= 0 && b < n) ? kernel(a, b) : cplx{};
      fft.buffer[j][0] = v.real();
      fft.buffer[j][1] = v.imag();
    }
    fftw_execute(fft.plan);
    for (int k = 0; k < n; ++k) {
      const int ip = (k + half) % n;
      grid.W(ip, iq) = scale * fft.buffer[k][0];
      grid.max_imag = std::max(grid.max_imag, scale * std::abs(fft.buffer[k][1]));
    }
  }
  return grid;
}

void write_wigner_csv(std::ostream& out, const WignerGrid& grid) {
  const auto old = out.precision(17);
  out << "q,p,W\n";
  for (std::size_t iq = 0; iq < grid.q.size(); ++iq) {
    for (std::size_t ip = 0; ip < grid.p.size(); ++ip) {
      out << grid.q[iq] << ',' << grid.p[ip] << ',' << grid.W(ip, iq) << '\n';
    }
  }
  out.precision(old);
}

HarmonicClosedForms::HarmonicClosedForms(double beta, double hbar, double mass, double omega)
    : beta_(beta), hbar_(hbar), mass_(mass), omega_(omega) {
  if (!(beta >= 0.0)) invalid("physics.beta", "must be >= 0");
  OscillatorScales{mass, omega, hbar}.validate();
}

double HarmonicClosedForms::H(double p, double q) const {
  return p * p / (2.0 * mass_) + 0.5 * mass_ * omega_ * omega_ * q * q;
}

double HarmonicClosedForms::weyl_symbol(double p, double q) const {
  const double x = 0.5 * beta_ * hbar_ * omega_;
  return std::exp(-2.0 / (hbar_ * omega_) * std::tanh(x) * H(p, q)) /
         (2.0 * std::numbers::pi * hbar_ * std::cosh(x));
}

double HarmonicClosedForms::G(double p, double q) const {
  const double x = beta_ * hbar_ * omega_;
  const double c = x == 0.0 ? 1.0 : 2.0 / x * std::tanh(0.5 * x);
  return c * H(p, q);
}

double HarmonicClosedForms::pseudo_power(double p, double q, double omega_dot) const {
  const double x = beta_ * hbar_ * omega_;
  const double sinhc = x == 0.0 ? 1.0 : std::sinh(x) / x;
  return omega_dot / omega_ * 2.0 / (1.0 + std::cosh(x)) *
         (0.5 * mass_ * omega_ * omega_ * q * q * (sinhc + 1.0) +
          p * p / (2.0 * mass_) * (1.0 - sinhc));
}

double HarmonicClosedForms::Z() const {
  return 1.0 / (2.0 * std::sinh(0.5 * beta_ * hbar_ * omega_));
}

double HarmonicClosedForms::Z_sc() const {
  return std::numbers::pi * hbar_ / std::tanh(0.5 * beta_ * hbar_ * omega_);
}

double HarmonicClosedForms::fock_wigner(int n, double p, double q) const {
  const double y = 4.0 * H(p, q) / (hbar_ * omega_);
  const double sign = n % 2 == 0 ? 1.0 : -1.0;
  return sign / (std::numbers::pi * hbar_) * std::exp(-0.5 * y) *
         std::laguerre(static_cast<unsigned>(n), y);
}

double laguerre_generating_series(double X, double Y, int n_terms) {
  double sum = 0.0, power = 1.0;
  for (int n = 0; n < n_terms; ++n) {
    sum += power * std::laguerre(static_cast<unsigned>(n), Y);
    power *= X;
  }
  return sum;
}

double laguerre_generating_closed(double X, double Y) {
  return std::exp(-Y * X / (1.0 - X)) / (1.0 - X);
}

ConventionAudit weyl_convention_audit(const FockOperator& a, const FockOperator& b,
                                      const WignerGridSpec& spec) {
  if (a.dimension() != b.dimension()) {
    invalid("weyl_convention_audit", "operators must share the truncated space");
  }
  const WignerGrid wa = wigner_transform(a, spec);
  const WignerGrid wb = wigner_transform(b, spec);
  ConventionAudit audit;
  audit.trace_fock = (a.matrix * b.matrix).trace();
  audit.phase_space = wa.W.cwiseProduct(wb.W).sum() * wa.dq * wa.dp;
  audit.ratio = audit.trace_fock.real() / audit.phase_space;
  return audit;
}

OrderingCheck ordering_check(const FockOperator& rho, const WignerGridSpec& spec) {
  const OscillatorScales scales{rho.mass, rho.omega, rho.hbar};
  const int n = rho.dimension();
  const FockOperator pq =
      exact_product(momentum_operator(n + 1, scales), position_operator(n + 1, scales), n);
  const WignerGrid w = wigner_transform(rho, spec);

  OrderingCheck out;
  out.trace_fock = (pq.matrix * rho.matrix).trace();
  cplx sum = 0.0;
  const cplx correction(0.0, -0.5 * rho.hbar);
  for (std::size_t iq = 0; iq < w.q.size(); ++iq) {
    for (std::size_t ip = 0; ip < w.p.size(); ++ip) {
      sum += (w.p[ip] * w.q[iq] + correction) * w.W(ip, iq);
    }
  }
  out.trace_symbol = sum * w.dq * w.dp;
  out.error = std::abs(out.trace_fock - out.trace_symbol);
  return out;
}

DensityComparison compare_thermal_densities(const HamiltonianModel& model, double t,
                                            double beta, double hbar, int n_max,
                                            const WignerGridSpec& wigner,
                                            const QuadratureDomain& domain,
                                            const IntegratorSettings& settings, double window,
                                            int samples) {
  if (!(window > 0.0)) invalid("oracle.window", "must be > 0");
  if (samples < 1) invalid("oracle.samples", "must be >= 1");
  model.protocol().require_in_range(t);
  const OscillatorScales scales{model.mass(), model.protocol().omega(t), hbar};
  const FockOperator rho = thermal_fock(model.kind(), model.lambda(), beta, n_max, scales);
  const WignerGrid w = wigner_transform(rho, wigner);

  DensityComparison out;
  out.quantum_norm = rho.trace().real();
  out.semiclassical_norm = partition(model, t, beta, hbar, domain, settings);

  std::vector<int> iq, ip;
  auto pick = [&](const std::vector<double>& axis, std::vector<int>& idx) {
    std::vector<int> inside;
    for (std::size_t k = 0; k < axis.size(); ++k) {
      if (std::abs(axis[k]) <= window) inside.push_back(static_cast<int>(k));
    }
    const std::size_t stride = std::max<std::size_t>(1, (inside.size() + samples - 1) / samples);
    for (std::size_t k = 0; k < inside.size(); k += stride) idx.push_back(inside[k]);
  };
  pick(w.q, iq);
  pick(w.p, ip);

  std::vector<double> gaps(iq.size() * ip.size()), peaks(gaps.size());
  parallel_for(gaps.size(), settings.threads, [&](std::size_t k) {
    const int a = ip[k / iq.size()], b = iq[k % iq.size()];
    const double quantum = w.W(a, b) / out.quantum_norm;
    const double G = pseudo_hamiltonian(model, t, {w.p[a], w.q[b]}, beta, hbar, settings).G;
    gaps[k] = std::abs(quantum - std::exp(-beta * G) / out.semiclassical_norm);
    peaks[k] = quantum;
  });
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    out.linf_gap = std::max(out.linf_gap, gaps[k]);
    out.peak = std::max(out.peak, peaks[k]);
  }
  out.points = gaps.size();
  return out;
}

}  // namespace scjarz
