#include <doctest.h>

#include <random>

#include "scjarz/errors.hpp"
#include "support.hpp"

using namespace scjarz;
using scjarz::test::ramp;

TEST_CASE("eval at the minimum and at unit point") {
  const auto h = test::harmonic_constant();
  CHECK(h.eval(0.5, {0.0, 0.0}) == cplx(0.0));
  CHECK(h.eval(0.5, {1.0, 1.0}) == cplx(1.0));
}

TEST_CASE("eval continues analytically to complex position") {
  const auto h = HamiltonianModel::harmonic(1.0, FrequencyProtocol::constant(2.0));
  const cplx e = h.eval(0.0, {0.0, cplx(0.0, 1.0)});
  CHECK(e.real() == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(e.imag() == 0.0);
}

TEST_CASE("quartic adds lambda q^4") {
  const auto h = HamiltonianModel::harmonic(1.3, ramp());
  const auto a = HamiltonianModel::quartic(1.3, ramp(), 0.25);
  const ComplexPoint z{cplx(0.3, -0.2), cplx(1.1, 0.4)};
  const cplx diff = a.eval(0.4, z) - h.eval(0.4, z);
  const cplx expect = 0.25 * std::pow(z.q, 4);
  CHECK(std::abs(diff - expect) < 1e-14);
}

TEST_CASE("gradient and explicit time derivative") {
  const auto h = test::harmonic_constant();
  const Gradient g = h.grad(0.0, {2.0, 3.0});
  CHECK(g.dp == cplx(2.0));
  CHECK(g.dq == cplx(3.0));
  CHECK(h.dt(0.7, {cplx(1.0, 2.0), cplx(-3.0, 0.5)}) == cplx(0.0));

  const auto r = test::harmonic_ramp();
  CHECK(r.dt(0.0, {0.0, 1.0}).real() == doctest::Approx(1.0));
}

TEST_CASE("frozen gradient agrees with grad") {
  const auto a = test::quartic_ramp(0.3);
  const ComplexPoint z{cplx(0.4, 0.1), cplx(-0.7, 0.2)};
  const Gradient g = a.grad(0.6, z);
  const Gradient f = a.frozen(0.6)(z);
  CHECK(std::abs(g.dp - f.dp) < 1e-15);
  CHECK(std::abs(g.dq - f.dq) < 1e-14);
}

TEST_CASE("times outside the protocol span are rejected") {
  const auto h = test::harmonic_ramp();
  auto kind_of = [&](double t) {
    try {
      h.eval(t, {0.0, 1.0});
    } catch (const NumericalError& e) {
      return e.kind();
    }
    return ErrorKind::Validation;
  };
  CHECK(kind_of(-0.01) == ErrorKind::TimeOutOfRange);
  CHECK(kind_of(1.01) == ErrorKind::TimeOutOfRange);
  CHECK_NOTHROW(h.eval(1.0 + 1e-14, {0.0, 1.0}));
  CHECK_THROWS_AS(h.grad(2.0, {0.0, 1.0}), NumericalError);
  CHECK_THROWS_AS(h.dt(-1.0, {0.0, 1.0}), NumericalError);
}

TEST_CASE("finite differences match the analytic derivatives") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> coord(-3.0, 3.0), time(0.05, 0.95);
  const double h = 1e-5;
  for (ProtocolShape shape : {ProtocolShape::Linear, ProtocolShape::Smoothstep}) {
    const auto model = HamiltonianModel::quartic(0.8, {0.0, 1.0, 1.0, 2.5, shape}, 0.1);
    for (int k = 0; k < 100; ++k) {
      const double p = coord(rng), q = coord(rng), t = time(rng);
      const Gradient g = model.grad(t, {p, q});
      const double scale = 1.0 + std::abs(model.eval(t, {p, q}));
      const double dp = (model.eval(t, {p + h, q}) - model.eval(t, {p - h, q})).real() / (2 * h);
      const double dq = (model.eval(t, {p, q + h}) - model.eval(t, {p, q - h})).real() / (2 * h);
      const double dt = (model.eval(t + h, {p, q}) - model.eval(t - h, {p, q})).real() / (2 * h);
      CHECK(std::abs(dp - g.dp.real()) <= 1e-6 * scale);
      CHECK(std::abs(dq - g.dq.real()) <= 1e-6 * scale);
      CHECK(std::abs(dt - model.dt(t, {p, q}).real()) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("real arguments give exactly real values") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-4.0, 4.0);
  const auto model = test::quartic_ramp();
  for (int k = 0; k < 50; ++k) {
    const ComplexPoint z{coord(rng), coord(rng)};
    const double t = 0.5 * (1.0 + std::sin(k));
    CHECK(model.eval(t, z).imag() == 0.0);
    CHECK(model.grad(t, z).dp.imag() == 0.0);
    CHECK(model.grad(t, z).dq.imag() == 0.0);
    CHECK(model.dt(t, z).imag() == 0.0);
  }
}

TEST_CASE("protocol endpoints and rates") {
  const FrequencyProtocol lin(0.0, 2.0, 1.0, 3.0, ProtocolShape::Linear);
  CHECK(lin.omega(0.0) == 1.0);
  CHECK(lin.omega(2.0) == doctest::Approx(3.0));
  CHECK(lin.omega_dot(1.3) == doctest::Approx(1.0));

  const FrequencyProtocol smooth(0.0, 1.0, 1.0, 2.0, ProtocolShape::Smoothstep);
  CHECK(smooth.omega_dot(0.0) == 0.0);
  CHECK(std::abs(smooth.omega_dot(1.0)) < 1e-14);
  CHECK(smooth.omega(0.5) == doctest::Approx(1.5));
  const double h = 1e-6;
  CHECK(smooth.omega_dot(0.3) ==
        doctest::Approx((smooth.omega(0.3 + h) - smooth.omega(0.3 - h)) / (2 * h)).epsilon(1e-8));

  const FrequencyProtocol back = lin.reversed();
  CHECK(back.omega(0.0) == doctest::Approx(3.0));
  CHECK(back.omega(0.5) == doctest::Approx(lin.omega(1.5)));
}

TEST_CASE("invalid models and protocols") {
  CHECK_THROWS_AS(HamiltonianModel::harmonic(0.0, ramp()), NumericalError);
  CHECK_THROWS_AS(HamiltonianModel::quartic(1.0, ramp(), -0.1), NumericalError);
  CHECK_THROWS_AS(HamiltonianModel(ModelKind::Harmonic, 1.0, ramp(), 0.1), NumericalError);
  CHECK_THROWS_AS(FrequencyProtocol(1.0, 0.0, 1.0, 1.0, ProtocolShape::Linear), NumericalError);
  CHECK_THROWS_AS(FrequencyProtocol(0.0, 1.0, 0.0, 1.0, ProtocolShape::Linear), NumericalError);
  CHECK_THROWS_AS(FrequencyProtocol(0.0, 1.0, 1.0, 2.0, ProtocolShape::Constant), NumericalError);
  CHECK_THROWS_AS(protocol_shape_from_string("cubic"), NumericalError);
  CHECK(model_kind_from_string("quartic") == ModelKind::Quartic);
}
