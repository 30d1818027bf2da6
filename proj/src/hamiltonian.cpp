#include "scjarz/hamiltonian.hpp"

#include <algorithm>
#include <sstream>

#include "scjarz/errors.hpp"

namespace scjarz {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorKind::IntegratorDiverged: return "IntegratorDiverged";
    case ErrorKind::ToleranceExceeded: return "ToleranceExceeded";
    case ErrorKind::CausticEncountered: return "CausticEncountered";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::WorkMismatch: return "WorkMismatch";
    case ErrorKind::DomainTooSmall: return "DomainTooSmall";
    case ErrorKind::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorKind::GridTooNarrow: return "GridTooNarrow";
    case ErrorKind::Validation: return "Validation";
  }
  return "Unknown";
}

std::string_view to_string(ProtocolShape shape) noexcept {
  switch (shape) {
    case ProtocolShape::Constant: return "constant";
    case ProtocolShape::Linear: return "linear";
    case ProtocolShape::Smoothstep: return "smoothstep";
  }
  return "unknown";
}

ProtocolShape protocol_shape_from_string(std::string_view name) {
  if (name == "constant") return ProtocolShape::Constant;
  if (name == "linear") return ProtocolShape::Linear;
  if (name == "smoothstep") return ProtocolShape::Smoothstep;
  throw NumericalError(ErrorKind::Validation, "unknown protocol shape '" + std::string(name) + "'");
}

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::Harmonic ? "harmonic" : "quartic";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "harmonic") return ModelKind::Harmonic;
  if (name == "quartic") return ModelKind::Quartic;
  throw NumericalError(ErrorKind::Validation, "unknown model kind '" + std::string(name) + "'");
}

FrequencyProtocol::FrequencyProtocol(double t_i, double t_f, double omega_i, double omega_f,
                                     ProtocolShape shape)
    : t_i_(t_i), t_f_(t_f), omega_i_(omega_i), omega_f_(omega_f), shape_(shape) {
  if (!(t_f >= t_i) || !std::isfinite(t_i) || !std::isfinite(t_f)) {
    throw NumericalError(ErrorKind::Validation, "protocol requires finite t_i <= t_f");
  }
  if (!(omega_i > 0.0) || !(omega_f > 0.0)) {
    throw NumericalError(ErrorKind::Validation, "protocol frequencies must be positive");
  }
  if (shape == ProtocolShape::Constant && omega_i != omega_f) {
    throw NumericalError(ErrorKind::Validation, "constant protocol requires omega_i == omega_f");
  }
}

void FrequencyProtocol::require_in_range(double t) const {
  const double slack = 1e-12 * (1.0 + std::abs(t_i_) + std::abs(t_f_));
  if (!(t >= t_i_ - slack && t <= t_f_ + slack)) {
    std::ostringstream os;
    os << "time " << t << " outside protocol span [" << t_i_ << ", " << t_f_ << "]";
    throw NumericalError(ErrorKind::TimeOutOfRange, os.str());
  }
}

double FrequencyProtocol::ramp(double s) const {
  switch (shape_) {
    case ProtocolShape::Constant: return 0.0;
    case ProtocolShape::Linear: return s;
    case ProtocolShape::Smoothstep: return s * s * (3.0 - 2.0 * s);
  }
  return 0.0;
}

double FrequencyProtocol::ramp_slope(double s) const {
  switch (shape_) {
    case ProtocolShape::Constant: return 0.0;
    case ProtocolShape::Linear: return 1.0;
    case ProtocolShape::Smoothstep: return 6.0 * s * (1.0 - s);
  }
  return 0.0;
}

double FrequencyProtocol::omega(double t) const {
  const double T = span();
  if (shape_ == ProtocolShape::Constant || T == 0.0) return omega_i_;
  const double s = std::clamp((t - t_i_) / T, 0.0, 1.0);
  return omega_i_ + (omega_f_ - omega_i_) * ramp(s);
}

double FrequencyProtocol::omega_dot(double t) const {
  const double T = span();
  if (shape_ == ProtocolShape::Constant || T == 0.0) return 0.0;
  const double s = std::clamp((t - t_i_) / T, 0.0, 1.0);
  return (omega_f_ - omega_i_) * ramp_slope(s) / T;
}

FrequencyProtocol FrequencyProtocol::reversed() const {
  // Both ramps satisfy ramp(1 - s) = 1 - ramp(s), so reversal swaps endpoints.
  return {t_i_, t_f_, omega_f_, omega_i_, shape_};
}

HamiltonianModel::HamiltonianModel(ModelKind kind, double mass, FrequencyProtocol protocol,
                                   double lambda)
    : kind_(kind), mass_(mass), protocol_(protocol), lambda_(lambda) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw NumericalError(ErrorKind::Validation, "mass must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw NumericalError(ErrorKind::Validation, "quartic coefficient must be >= 0");
  }
  if (kind == ModelKind::Harmonic && lambda != 0.0) {
    throw NumericalError(ErrorKind::Validation, "harmonic model requires lambda == 0");
  }
}

cplx HamiltonianModel::eval(double t, const ComplexPoint& z) const {
  protocol_.require_in_range(t);
  return eval_unchecked(t, z);
}

Gradient HamiltonianModel::grad(double t, const ComplexPoint& z) const {
  protocol_.require_in_range(t);
  return grad_unchecked(t, z);
}

cplx HamiltonianModel::dt(double t, const ComplexPoint& z) const {
  protocol_.require_in_range(t);
  return dt_unchecked(t, z);
}

}  // namespace scjarz
