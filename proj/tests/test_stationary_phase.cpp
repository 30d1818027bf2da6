#include <doctest.h>

#include "scjarz/errors.hpp"
#include "scjarz/stationary_phase.hpp"
#include "support.hpp"

using namespace scjarz;
using test::harmonic_g_factor;

namespace {

ErrorKind failure_kind(auto&& fn) {
  try {
    fn();
  } catch (const NumericalError& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Validation;
}

}  // namespace

TEST_CASE("midpoint map of the oscillator scales by cosh") {
  const IntegratorSettings s;
  for (double hb : {0.3, 1.0, 2.0}) {
    const RealPoint m = midpoint_map(test::harmonic_constant(), 0.0, {0.4, -1.3}, hb, s);
    CHECK(m.p == doctest::Approx(0.4 * std::cosh(hb / 2)).epsilon(1e-8));
    CHECK(m.q == doctest::Approx(-1.3 * std::cosh(hb / 2)).epsilon(1e-8));
  }
}

TEST_CASE("midpoint map tends to identity and keeps fixed points") {
  const IntegratorSettings s;
  const auto model = test::quartic_ramp();
  const RealPoint m = midpoint_map(model, 0.2, {0.5, 0.9}, 1e-6, s);
  CHECK(norm(m - RealPoint{0.5, 0.9}) < 1e-11);
  const RealPoint f = midpoint_map(model, 0.2, {0.0, 0.0}, 2.0, s);
  CHECK(norm(f) == 0.0);
}

TEST_CASE("oscillator midpoint inversion divides by cosh") {
  const IntegratorSettings s;
  const double hb = 1.0;
  const MidpointSolve r = invert_midpoint(test::harmonic_constant(2.0), 0.0, {1.2, -0.7}, hb, s);
  const double c = std::cosh(hb * 2.0 / 2);
  CHECK(r.center.p == doctest::Approx(1.2 / c).epsilon(1e-8));
  CHECK(r.center.q == doctest::Approx(-0.7 / c).epsilon(1e-8));
  CHECK(r.residual <= s.newton_tol * (1 + norm(RealPoint{1.2, -0.7})));
  CHECK(r.trace.stages == 1);

  const MidpointSolve small = invert_midpoint(test::harmonic_constant(), 0.0, {1.2, -0.7}, 1e-7, s);
  CHECK(norm(small.center - RealPoint{1.2, -0.7}) < 1e-12);
}

TEST_CASE("quartic midpoint conditions are solved to tolerance") {
  const IntegratorSettings s;
  const auto model = HamiltonianModel::quartic(1.0, FrequencyProtocol::constant(1.0), 0.1);
  const RealPoint target{0.3, 0.7};
  const MidpointSolve r = invert_midpoint(model, 0.0, target, 0.5, s);
  CHECK(r.residual < 1e-9);
  const ComplexPoint mid = r.arc.chord_midpoint();
  CHECK(std::abs(mid.p - target.p) < 1e-9);
  CHECK(std::abs(mid.q - target.q) < 1e-9);
  CHECK(r.trace.stages > 1);
  for (double res : r.trace.stage_residuals) CHECK(res <= s.newton_tol * (1 + norm(target)));
}

TEST_CASE("every accepted continuation stage ends below the Newton tolerance") {
  const IntegratorSettings s;
  const RealPoint target{2.5, -1.5};
  const MidpointSolve r = invert_midpoint(test::quartic_ramp(), 0.5, target, 1.0, s);
  const double tol = s.newton_tol * (1 + norm(target));
  REQUIRE(r.trace.stage_residuals.size() == static_cast<std::size_t>(r.trace.stages));
  REQUIRE(r.trace.stages >= 2);
  for (double res : r.trace.stage_residuals) CHECK(res <= tol);
  CHECK(r.trace.stage_residuals.back() == r.residual);
}

TEST_CASE("warm start reproduces the continuation branch") {
  const IntegratorSettings s;
  const auto model = test::quartic_ramp();
  const MidpointSolve cold = invert_midpoint(model, 0.3, {1.0, 1.5}, 1.0, s);
  const MidpointSolve warm = invert_midpoint(model, 0.3, {1.0, 1.5}, 1.0, s, cold.center);
  CHECK(norm(warm.center - cold.center) < 1e-10);
  CHECK(warm.trace.stages == 1);
}

TEST_CASE("oscillator pseudo-Hamiltonian is the rescaled energy") {
  const IntegratorSettings s;
  const PseudoHamiltonianValue v =
      pseudo_hamiltonian(test::harmonic_constant(), 0.0, {1.0, 1.0}, 1.0, 1.0, s);
  CHECK(v.G == doctest::Approx(2.0 * std::tanh(0.5)).epsilon(1e-10));
  CHECK(v.G == doctest::Approx(0.924234).epsilon(1e-6));
  CHECK(std::abs(v.G - v.G_from_total_action) <= 10 * s.newton_tol);

  const PseudoHamiltonianValue o =
      pseudo_hamiltonian(test::harmonic_constant(), 0.0, {0.0, 0.0}, 1.0, 1.0, s);
  CHECK(o.G == 0.0);
}

TEST_CASE("oscillator G is exact for a spread of parameters") {
  // Stationary phase is exact here, so the only error is RK4 truncation on the arc.
  IntegratorSettings s;
  s.n_sigma_steps = 256;
  for (double m : {0.5, 2.0}) {
    for (double w : {0.5, 2.0}) {
      for (double bh : {0.5, 2.0}) {
        const auto model = HamiltonianModel::harmonic(m, FrequencyProtocol::constant(w));
        for (double p : {-2.0, 0.6}) {
          for (double q : {-1.4, 2.0}) {
            const double H = p * p / (2 * m) + 0.5 * m * w * w * q * q;
            const double G = pseudo_hamiltonian(model, 0.0, {p, q}, bh, 1.0, s).G;
            CHECK(std::abs(G - harmonic_g_factor(bh, 1.0, w) * H) <= 1e-8 * (1 + H));
          }
        }
      }
    }
  }
}

TEST_CASE("G approaches H quadratically as beta*hbar shrinks") {
  const IntegratorSettings s;
  const auto model = test::quartic_ramp();
  const RealPoint z{0.8, 1.1};
  const double H = model.eval(0.5, z.complex()).real();
  double previous = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double bh = 0.4 / std::pow(2.0, k);
    const double err = std::abs(pseudo_hamiltonian(model, 0.5, z, bh, 1.0, s).G - H);
    if (k > 0) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.05));
    previous = err;
  }
}

TEST_CASE("quartic G agrees between the area and total-action routes") {
  const IntegratorSettings s;
  const auto model = test::quartic_ramp();
  for (RealPoint z : {RealPoint{0.3, 0.7}, RealPoint{-1.5, 1.0}, RealPoint{2.0, -0.5}}) {
    const PseudoHamiltonianValue v = pseudo_hamiltonian(model, 0.2, z, 1.0, 1.0, s);
    CHECK(std::abs(v.G - v.G_from_total_action) <= 10 * s.newton_tol);
    CHECK(std::abs(v.G_imag) < s.tolerance);
  }
}

TEST_CASE("oscillator prefactor matches the Gaussian normalization") {
  const IntegratorSettings s;
  for (double hbar : {1.0, 0.5}) {
    const double expect = 1.0 / (2 * std::numbers::pi * hbar * std::cosh(0.5 * hbar));
    for (RealPoint z : {RealPoint{0.0, 0.0}, RealPoint{1.0, -0.5}, RealPoint{-2.0, 1.5}}) {
      const auto v = pseudo_hamiltonian(test::harmonic_constant(), 0.0, z, 1.0, hbar, s, true);
      REQUIRE(v.prefactor.has_value());
      CHECK(test::rel_err(*v.prefactor, expect) < 1e-4);
    }
  }
}

TEST_CASE("a fold of the midpoint map is reported as a caustic") {
  const IntegratorSettings s;
  const auto model = HamiltonianModel::quartic(1.0, FrequencyProtocol::constant(1.0), 0.1);
  CHECK(failure_kind([&] { invert_midpoint(model, 0.0, {2.0, 0.0}, 4.0, s); }) ==
        ErrorKind::CausticEncountered);
}

TEST_CASE("real-map inversion: linear map, no root, bad target") {
  const IntegratorSettings s;
  const FamilyMap doubling = [](RealPoint z, double hb) { return (1.0 + hb) * z; };
  const RealMapSolve r = invert_real_map(doubling, {2.0, -4.0}, 1.0, {0.0, 0.0}, s, true);
  CHECK(norm(r.solution - RealPoint{1.0, -2.0}) < 1e-12);
  CHECK(r.jacobian_det == doctest::Approx(4.0));

  const FamilyMap no_root = [](RealPoint z, double) { return RealPoint{z.p * z.p + 1.0, z.q}; };
  const ErrorKind k = failure_kind([&] { invert_real_map(no_root, {0.0, 0.0}, 1.0, {0.5, 0.0}, s, true); });
  CHECK((k == ErrorKind::NewtonDiverged || k == ErrorKind::CausticEncountered));

  CHECK(failure_kind([&] {
          invert_midpoint(test::harmonic_ramp(), 0.0, {std::nan(""), 0.0}, 1.0, s);
        }) == ErrorKind::Validation);
}
