#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "scjarz/errors.hpp"
#include "scjarz/quantum_oracle.hpp"
#include "support.hpp"

using namespace scjarz;

namespace {

const double kPi = std::numbers::pi;
const OscillatorScales kUnit{1.0, 1.0, 1.0};
const WignerGridSpec kGrid{512, 16.0};

ErrorKind failure_kind(auto&& fn) {
  try {
    fn();
  } catch (const NumericalError& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Validation;
}

// Largest deviation of f from W over grid points with |p|, |q| <= window.
template <class F>
double max_deviation(const WignerGrid& w, double window, F&& f) {
  double worst = 0.0;
  for (std::size_t iq = 0; iq < w.q.size(); ++iq) {
    if (std::abs(w.q[iq]) > window) continue;
    for (std::size_t ip = 0; ip < w.p.size(); ++ip) {
      if (std::abs(w.p[ip]) > window) continue;
      worst = std::max(worst, std::abs(w.W(ip, iq) - f(w.p[ip], w.q[iq])));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("thermal trace of the oscillator") {
  const FockOperator rho = thermal_fock(ModelKind::Harmonic, 0.0, 1.0, 48, kUnit);
  CHECK(rho.trace().real() == doctest::Approx(0.9595173756674719).epsilon(1e-12));
  CHECK(rho.trace().real() == doctest::Approx(1.0 / (2 * std::sinh(0.5))).epsilon(1e-12));
  CHECK(rho.top_level_weight() < kTopLevelLimit);

  const FockOperator id = thermal_fock(ModelKind::Quartic, 0.1, 0.0, 20, kUnit);
  CHECK((id.matrix - Eigen::MatrixXcd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(id.trace().real() == doctest::Approx(20.0));
}

TEST_CASE("quartic spectrum reduces to the oscillator ladder") {
  const OscillatorScales s{1.3, 0.8, 0.7};
  const Eigen::VectorXd e = fock_spectrum(1e-12, 40, s);
  for (int n = 0; n < 40; ++n) {
    CHECK(std::abs(e[n] - s.hbar * s.omega * (n + 0.5)) < 1e-8);
  }
  // The anharmonic ground state sits above the harmonic one.
  CHECK(fock_spectrum(0.1, 40, kUnit)[0] > 0.5);
}

TEST_CASE("thermal states are Hermitian and truncation is diagnosed") {
  const FockOperator rho = thermal_fock(ModelKind::Quartic, 0.1, 1.0, 48, kUnit);
  CHECK(rho.hermiticity_error() < 1e-14);
  CHECK(failure_kind([] { thermal_fock(ModelKind::Harmonic, 0.0, 0.05, 16, kUnit); }) ==
        ErrorKind::TruncationInsufficient);
  CHECK(failure_kind([] { thermal_fock(ModelKind::Harmonic, 0.0, 1.0, 0, kUnit); }) ==
        ErrorKind::Validation);
}

TEST_CASE("Fock-state Wigner functions match the Laguerre forms") {
  const HarmonicClosedForms closed(1.0, 1.0, 1.0, 1.0);
  for (int n : {0, 1, 2, 5}) {
    const WignerGrid w = wigner_transform(fock_projector(n, 8, kUnit), kGrid);
    CHECK(max_deviation(w, 1e9, [&](double p, double q) { return closed.fock_wigner(n, p, q); }) <
          1e-8);
    CHECK(w.max_imag < 1e-12);
  }
  const WignerGrid w1 = wigner_transform(fock_projector(1, 8, kUnit), kGrid);
  const std::size_t origin = w1.q.size() / 2;
  REQUIRE(w1.q[origin] == 0.0);
  REQUIRE(w1.p[origin] == 0.0);
  CHECK(w1.W(origin, origin) == doctest::Approx(-1.0 / kPi).epsilon(1e-10));
  const WignerGrid w0 = wigner_transform(fock_projector(0, 8, kUnit), kGrid);
  CHECK(w0.W(origin, origin) == doctest::Approx(1.0 / kPi).epsilon(1e-10));
  CHECK(w0.W.minCoeff() > -1e-15);
}

TEST_CASE("oscillator thermal Wigner function matches the closed-form symbol") {
  for (double hbar : {1.0, 0.5}) {
    const OscillatorScales s{1.0, 1.0, hbar};
    const HarmonicClosedForms closed(1.0, hbar, 1.0, 1.0);
    const FockOperator rho = thermal_fock(ModelKind::Harmonic, 0.0, 1.0, 64, s);
    const WignerGrid w = wigner_transform(rho, kGrid);
    CHECK(max_deviation(w, 4.0, [&](double p, double q) { return closed.weyl_symbol(p, q); }) <
          1e-6);
    CHECK(w.integral() == doctest::Approx(rho.trace().real()).epsilon(1e-10));
    CHECK(rho.trace().real() == doctest::Approx(closed.Z()).epsilon(1e-12));
  }
}

TEST_CASE("log of the normalized thermal density is -beta G plus a constant") {
  const double beta = 1.3;
  const HarmonicClosedForms closed(beta, 1.0, 1.0, 1.0);
  const FockOperator rho = thermal_fock(ModelKind::Harmonic, 0.0, beta, 48, kUnit);
  const WignerGrid w = wigner_transform(rho, kGrid);
  const double tr = rho.trace().real();
  const std::size_t origin = w.q.size() / 2;
  const double c = -std::log(w.W(origin, origin) / tr) / beta;
  double worst = 0.0;
  for (std::size_t iq = 0; iq < w.q.size(); ++iq) {
    for (std::size_t ip = 0; ip < w.p.size(); ++ip) {
      if (std::abs(w.q[iq]) > 3.0 || std::abs(w.p[ip]) > 3.0) continue;
      const double f = -std::log(w.W(ip, iq) / tr) / beta;
      worst = std::max(worst, std::abs(f - c - closed.G(w.p[ip], w.q[iq])));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("Wigner values are stable under grid doubling") {
  const FockOperator rho = thermal_fock(ModelKind::Quartic, 0.1, 1.0, 32, kUnit);
  const WignerGrid a = wigner_transform(rho, {384, 16.0});
  const WignerGrid b = wigner_transform(rho, {768, 16.0});
  // Same dp, half the dq: coarse points are every other fine q and share p.
  REQUIRE(a.dp == doctest::Approx(b.dp).epsilon(1e-15));
  const std::size_t shift = (b.p.size() - a.p.size()) / 2;
  REQUIRE(b.q[2] == doctest::Approx(a.q[1]));
  REQUIRE(b.p[shift + 1] == doctest::Approx(a.p[1]));
  double worst = 0.0;
  for (std::size_t iq = 0; iq < a.q.size(); ++iq) {
    const std::size_t jq = 2 * iq;
    for (std::size_t ip = 0; ip < a.p.size(); ++ip) {
      const std::size_t jp = ip + shift;
      worst = std::max(worst, std::abs(a.W(ip, iq) - b.W(jp, jq)));
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("narrow Wigner grids are rejected") {
  const FockOperator id = fock_identity(48, kUnit);
  CHECK(failure_kind([&] { wigner_transform(id, {512, 3.0}); }) == ErrorKind::GridTooNarrow);
  CHECK(failure_kind([&] { wigner_transform(id, {64, 16.0}); }) == ErrorKind::GridTooNarrow);
  CHECK(failure_kind([&] { wigner_transform(id, {7, 16.0}); }) == ErrorKind::Validation);
  // Only levels the operator touches need to decay.
  CHECK_NOTHROW(wigner_transform(fock_projector(0, 48, kUnit), {512, 8.0}));
}

TEST_CASE("closed forms: limits and special values") {
  const HarmonicClosedForms hot(1e-8, 1.0, 1.0, 1.0);
  CHECK(hot.weyl_symbol(0.7, -0.4) * 2 * kPi ==
        doctest::Approx(std::exp(-1e-8 * hot.H(0.7, -0.4))).epsilon(1e-12));
  CHECK(hot.G(0.7, -0.4) == doctest::Approx(hot.H(0.7, -0.4)).epsilon(1e-12));

  const HarmonicClosedForms c(0.8, 1.5, 2.0, 0.7);
  const double x = 0.8 * 1.5 * 0.7;
  const double expect = 0.3 / 0.7 * 2 / (1 + std::cosh(x)) * 0.5 * 2.0 * 0.49 * 1.44 *
                        (std::sinh(x) / x + 1.0);
  CHECK(c.pseudo_power(0.0, 1.2, 0.3) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(c.Z_sc() == doctest::Approx(kPi * 1.5 / std::tanh(x / 2)).epsilon(1e-14));
}

TEST_CASE("Laguerre generating function") {
  const double X = std::exp(-1.0), Y = 2.0;
  CHECK(std::abs(laguerre_generating_series(X, Y, 61) - laguerre_generating_closed(X, Y)) < 1e-10);
}

TEST_CASE("Weyl convention audit measures 2 pi hbar") {
  for (double hbar : {1.0, 0.5}) {
    const OscillatorScales s{1.0, 1.0, hbar};
    const FockOperator g = fock_projector(0, 48, s);
    const ConventionAudit a = weyl_convention_audit(g, g, kGrid);
    CHECK(a.trace_fock.real() == doctest::Approx(1.0));
    CHECK(a.phase_space == doctest::Approx(1.0 / (2 * kPi * hbar)).epsilon(1e-10));
    CHECK(a.ratio == doctest::Approx(2 * kPi * hbar).epsilon(1e-10));
  }

  const FockOperator rho = thermal_fock(ModelKind::Harmonic, 0.0, 1.0, 48, kUnit);
  const ConventionAudit b = weyl_convention_audit(fock_identity(48, kUnit), rho, kGrid);
  CHECK(b.trace_fock.real() == doctest::Approx(1.0 / (2 * std::sinh(0.5))).epsilon(1e-12));
  CHECK(b.ratio == doctest::Approx(2 * kPi).epsilon(1e-8));
  CHECK(failure_kind([&] { weyl_convention_audit(fock_identity(8, kUnit), rho, kGrid); }) ==
        ErrorKind::Validation);
}

TEST_CASE("symbol of p q carries the ordering correction") {
  const FockOperator h = thermal_fock(ModelKind::Harmonic, 0.0, 1.0, 48, kUnit);
  const OrderingCheck a = ordering_check(h, kGrid);
  CHECK(std::abs(a.trace_fock - cplx(0.0, -0.5) * h.trace()) < 1e-12);
  CHECK(a.error < 1e-8);

  const OscillatorScales s{1.0, 1.0, 0.5};
  const OrderingCheck b = ordering_check(thermal_fock(ModelKind::Quartic, 0.2, 1.0, 64, s), kGrid);
  CHECK(b.error < 1e-8);
  CHECK(std::abs(b.trace_fock.real()) < 1e-12);
}

TEST_CASE("Wigner CSV export") {
  const WignerGrid w = wigner_transform(fock_projector(0, 4, kUnit), {80, 8.0});
  std::ostringstream os;
  write_wigner_csv(os, w);
  const std::string text = os.str();
  CHECK(text.rfind("q,p,W\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 80 * 80 + 1);
}

// The normalized quantum density and exp(-beta G) / Z_sc differ at O(hbar^2) at
// fixed beta. At fixed beta*hbar the effective anharmonicity only falls like hbar,
// so there the relative gap halves and the absolute gap does not shrink.
TEST_CASE("quartic density gap scales with hbar squared at fixed beta") {
  const auto model = HamiltonianModel::quartic(1.0, test::ramp(), 0.05);
  const IntegratorSettings s;
  const QuadratureDomain domain{11.0, 11.0, 64, 64};
  double previous = 0.0;
  for (double hbar : {1.0, 0.5, 0.25, 0.125}) {
    const int n_max = static_cast<int>(64 / hbar);
    const WignerGridSpec grid{static_cast<int>(512 / hbar), 16.0};
    const DensityComparison d =
        compare_thermal_densities(model, 0.0, 0.5, hbar, n_max, grid, domain, s, 3.0, 21);
    CHECK(d.points > 400);
    if (previous > 0.0) CHECK(d.linf_gap <= 0.35 * previous);
    previous = d.linf_gap;
  }
}

TEST_CASE("quartic relative density gap is first order at fixed beta*hbar") {
  const auto model = HamiltonianModel::quartic(1.0, test::ramp(), 0.05);
  const IntegratorSettings s;
  double previous = 0.0;
  for (double hbar : {1.0, 0.5, 0.25, 0.125}) {
    const double sc = std::sqrt(hbar);
    const QuadratureDomain domain{11.0 * sc, 11.0 * sc, 64, 64};
    const DensityComparison d = compare_thermal_densities(model, 0.0, 0.5 / hbar, hbar, 64,
                                                          {512, 16.0 * sc}, domain, s, 3.0 * sc, 21);
    const double rel = d.linf_gap / d.peak;
    if (previous > 0.0) {
      CHECK(rel < 0.65 * previous);
      CHECK(rel > 0.45 * previous);
    }
    previous = rel;
  }
}
