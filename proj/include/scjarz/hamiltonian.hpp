#pragma once

#include <cmath>
#include <complex>
#include <string_view>

namespace scjarz {

using cplx = std::complex<double>;

// Phase-space point with complex coordinates. Real points are a special case;
// see RealPoint for the strictly real plane.
struct ComplexPoint {
  cplx p{};
  cplx q{};

  ComplexPoint& operator+=(const ComplexPoint& o) {
    p += o.p;
    q += o.q;
    return *this;
  }
  friend ComplexPoint operator+(ComplexPoint a, const ComplexPoint& b) { return a += b; }
  friend ComplexPoint operator-(const ComplexPoint& a, const ComplexPoint& b) {
    return {a.p - b.p, a.q - b.q};
  }
  friend ComplexPoint operator*(cplx s, const ComplexPoint& a) { return {s * a.p, s * a.q}; }
  friend ComplexPoint operator*(double s, const ComplexPoint& a) { return {s * a.p, s * a.q}; }

  bool finite() const {
    return std::isfinite(p.real()) && std::isfinite(p.imag()) && std::isfinite(q.real()) &&
           std::isfinite(q.imag());
  }
};

inline ComplexPoint conj(const ComplexPoint& z) { return {std::conj(z.p), std::conj(z.q)}; }
inline double norm(const ComplexPoint& z) { return std::sqrt(std::norm(z.p) + std::norm(z.q)); }

struct RealPoint {
  double p = 0.0;
  double q = 0.0;

  friend RealPoint operator+(RealPoint a, RealPoint b) { return {a.p + b.p, a.q + b.q}; }
  friend RealPoint operator-(RealPoint a, RealPoint b) { return {a.p - b.p, a.q - b.q}; }
  friend RealPoint operator*(double s, RealPoint a) { return {s * a.p, s * a.q}; }

  ComplexPoint complex() const { return {p, q}; }
};

inline double norm(RealPoint z) { return std::hypot(z.p, z.q); }
inline RealPoint real_part(const ComplexPoint& z) { return {z.p.real(), z.q.real()}; }

enum class ProtocolShape { Constant, Linear, Smoothstep };

std::string_view to_string(ProtocolShape shape) noexcept;
ProtocolShape protocol_shape_from_string(std::string_view name);

// Frequency schedule omega(t) on [t_i, t_f]. The smoothstep ramp uses
// 3s^2 - 2s^3 so that the rate vanishes at both ends.
class FrequencyProtocol {
 public:
  FrequencyProtocol() = default;
  FrequencyProtocol(double t_i, double t_f, double omega_i, double omega_f, ProtocolShape shape);

  static FrequencyProtocol constant(double omega, double t_i = 0.0, double t_f = 1.0) {
    return {t_i, t_f, omega, omega, ProtocolShape::Constant};
  }

  double t_i() const { return t_i_; }
  double t_f() const { return t_f_; }
  double omega_i() const { return omega_i_; }
  double omega_f() const { return omega_f_; }
  ProtocolShape shape() const { return shape_; }
  double span() const { return t_f_ - t_i_; }

  // Throws TimeOutOfRange outside [t_i, t_f] (a relative slack of 1e-12 is allowed).
  void require_in_range(double t) const;

  double omega(double t) const;
  double omega_dot(double t) const;

  FrequencyProtocol reversed() const;

 private:
  double ramp(double s) const;
  double ramp_slope(double s) const;

  double t_i_ = 0.0;
  double t_f_ = 1.0;
  double omega_i_ = 1.0;
  double omega_f_ = 1.0;
  ProtocolShape shape_ = ProtocolShape::Constant;
};

enum class ModelKind { Harmonic, Quartic };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(std::string_view name);

struct Gradient {
  cplx dp;  // dH/dp
  cplx dq;  // dH/dq
};

// Gradient with the protocol frozen at one time, for imaginary-time loops.
struct FrozenGradient {
  double inv_mass;
  double stiffness;  // m omega(t)^2
  double quartic4;   // 4 lambda

  Gradient operator()(const ComplexPoint& z) const {
    return {z.p * inv_mass, z.q * (stiffness + quartic4 * (z.q * z.q))};
  }
};

// H_t(p, q) = p^2/2m + m omega_t^2 q^2 / 2 + lambda q^4.
//
// The model is a polynomial, so evaluation at complex arguments is its exact
// analytic continuation. The checked entry points validate t against the
// protocol span; the *_unchecked variants are for inner integrator loops that
// validated the interval once up front.
class HamiltonianModel {
 public:
  HamiltonianModel(ModelKind kind, double mass, FrequencyProtocol protocol, double lambda = 0.0);

  static HamiltonianModel harmonic(double mass, FrequencyProtocol protocol) {
    return {ModelKind::Harmonic, mass, protocol, 0.0};
  }
  static HamiltonianModel quartic(double mass, FrequencyProtocol protocol, double lambda) {
    return {ModelKind::Quartic, mass, protocol, lambda};
  }

  ModelKind kind() const { return kind_; }
  double mass() const { return mass_; }
  double lambda() const { return lambda_; }
  const FrequencyProtocol& protocol() const { return protocol_; }

  cplx eval(double t, const ComplexPoint& z) const;
  Gradient grad(double t, const ComplexPoint& z) const;
  cplx dt(double t, const ComplexPoint& z) const;

  cplx eval_unchecked(double t, const ComplexPoint& z) const {
    const double w = protocol_.omega(t);
    const cplx q2 = z.q * z.q;
    return z.p * z.p / (2.0 * mass_) + 0.5 * mass_ * w * w * q2 + lambda_ * q2 * q2;
  }
  Gradient grad_unchecked(double t, const ComplexPoint& z) const {
    const double w = protocol_.omega(t);
    return {z.p / mass_, mass_ * w * w * z.q + 4.0 * lambda_ * z.q * z.q * z.q};
  }
  FrozenGradient frozen(double t) const {
    const double w = protocol_.omega(t);
    return {1.0 / mass_, mass_ * w * w, 4.0 * lambda_};
  }
  cplx dt_unchecked(double t, const ComplexPoint& z) const {
    return mass_ * protocol_.omega(t) * protocol_.omega_dot(t) * z.q * z.q;
  }

  // Same model driven by the time-reversed schedule.
  HamiltonianModel reversed() const { return {kind_, mass_, protocol_.reversed(), lambda_}; }

 private:
  ModelKind kind_;
  double mass_;
  FrequencyProtocol protocol_;
  double lambda_;
};

}  // namespace scjarz
