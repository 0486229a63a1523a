#include <catch_amalgamated.hpp>

#include <cmath>

#include "casimir/greens.hpp"
#include "oracles.hpp"

using namespace casimir;
using Catch::Approx;

TEST_CASE("free propagators", "[greens]") {
  CHECK(free_green(2.0, 1.0, FreePart::transverse).real() == Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(free_green(1.0, 2.0, FreePart::longitudinal).real() == Approx(-0.25).epsilon(1e-15));
  CHECK(free_green(2.0, 1.0, FreePart::oscillator).real() == Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(free_green(2.0, 1.0, FreePart::transverse).kind == GreenKind::free_transverse);
}

TEST_CASE("poles are refused", "[greens]") {
  for (auto part : {FreePart::transverse, FreePart::oscillator}) {
    try {
      free_green(1.0, 1.0, part);
      FAIL("expected PoleProximity");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::pole_proximity);
    }
  }
  CHECK_THROWS_AS(free_green(1.0, 0.0, FreePart::longitudinal), Error);
}

TEST_CASE("linear propagator on the imaginary axis", "[greens]") {
  CHECK(linear_green(LorentzMedium::vacuum(), 1.0, 1.0).real() == Approx(0.5).epsilon(1e-15));
  CHECK(linear_green(LorentzMedium::constant(3.0), 1.0, 1.0).real() == Approx(0.25).epsilon(1e-15));
  const LorentzMedium m({{2.0, 1.5, 0.2}}, 1.3);
  for (double k : {0.0, 0.5, 3.0})
    for (double xi : {0.1, 1.0, 7.0}) {
      const double g = linear_green(m, k, xi).real();
      CHECK(g > 0.0);
      CHECK(std::abs((k * k + xi * xi * permittivity_imag_axis(m, xi)) * g - 1.0) <= 1e-14);
    }
  // Vacuum reduces to the free transverse form with w = i xi.
  CHECK(linear_green(LorentzMedium::vacuum(), 2.0, 0.5).real() == Approx(1.0 / (4.0 + 0.25)).epsilon(1e-15));
}

TEST_CASE("nonlinear propagator", "[greens]") {
  const LorentzMedium m({{2.0, 1.5, 0.2}});
  const DeltaTable zero({0.0, 1.0, 2.0}, {2}, {{0.0, 0.0, 0.0}}, {});
  for (double xi : {0.2, 1.0, 1.7}) CHECK(nonlinear_green(m, zero, 1.3, xi).real() == linear_green(m, 1.3, xi).real());

  const DeltaTable unit({0.0, 1.0, 2.0}, {2}, {{1.0, 1.0, 1.0}}, {});
  CHECK(nonlinear_green(LorentzMedium::vacuum(), unit, 1.0, 1.0).real() == Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("Dyson series sums to the closed form", "[greens]") {
  // G = G1 + G1 (-xi^2 Delta) G1 + ... with contraction -xi^2 Delta G1.
  const LorentzMedium m({{1.0, 1.0, 0.1}});
  const double k = 0.8;
  const double xi = 1.0;
  const double g1 = linear_green(m, k, xi).real();
  const double delta = 0.5 / (xi * xi * g1);
  const DeltaTable table({0.0, 2.0}, {2}, {{delta, delta}}, {});
  const double closed = nonlinear_green(m, table, k, xi).real();
  const double r = -xi * xi * delta * g1;
  REQUIRE(std::abs(r) == Approx(0.5));
  double series = 0.0;
  double term = g1;
  for (int i = 0; i < 40; ++i) {
    series += term;
    term *= r;
  }
  CHECK(std::abs(series - closed) <= 1e-10 * std::abs(closed));
}

TEST_CASE("slab kernel", "[greens]") {
  CHECK(slab_kernel(1.0, 0.0) == 0.5);
  CHECK(slab_kernel(1.0, std::log(4.0)) == Approx(0.125).epsilon(1e-15));
  CHECK(slab_kernel(2.0, 1.0) == Approx(std::exp(-2.0) / 4.0).epsilon(1e-15));
  CHECK(slab_kernel(2.0, 1.0) == Approx(0.0338338).epsilon(1e-6));
  CHECK_THROWS_AS(slab_kernel(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("field-polarization correlator", "[greens]") {
  CHECK(correlation_em_p(LorentzMedium::vacuum(), 1.0, 1.0) == std::complex<double>{});
  // chi1(1) = 1 and eps(1) = 2, so G1(k^2 = 5, 1) = 1/3.
  const LorentzMedium m({{1.0, std::sqrt(2.0), 0.0}});
  const auto c = correlation_em_p(m, std::sqrt(5.0), 1.0);
  CHECK(c.real() == Approx(0.0).margin(1e-15));
  CHECK(c.imag() == Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("three-point correlator", "[greens]") {
  const double width = 1e-3;
  const auto nu1 = narrow_coupling(1.0, 1.0, width);
  const auto nu2 = NonlinearKernel::separable({AxisFactor(nu1), AxisFactor(nu1)}, 1.0, true);
  const LorentzMedium m({{1.0, 3.0, 0.2}});
  CHECK(correlation_3pt(NonlinearKernel::zero(2), nu1, m, 2.0, 2.0, 1.0, 1.0) == std::complex<double>{});
  CHECK(correlation_3pt(nu2, nu1, m, 0.0, 2.0, 1.0, 1.0) == std::complex<double>{});

  const double w1 = 2.0;
  const double w2 = 2.5;
  const double k1 = 0.7;
  const double k2 = 1.9;
  const auto c = correlation_3pt(nu2, nu1, m, w1, w2, k1, k2);
  const double chi = oracle::chi2_narrow_midpoint(1.0, 1.0, width, 1.0, w1, w2, nu1.lower(), nu1.upper());
  const auto g1 = 1.0 / (k1 * k1 - w1 * w1 * permittivity(m, w1));
  const auto g2 = 1.0 / (k2 * k2 - w2 * w2 * permittivity(m, w2));
  const auto lib = chi2(nu2, nu1, w1, w2);
  CHECK(std::abs(lib.real() - chi) <= 1e-4 * std::abs(chi));
  CHECK(std::abs(lib.imag()) <= 1e-2 * std::abs(chi));
  const auto ref = -w1 * w2 * lib * g1 * g2;
  CHECK(std::abs(c - ref) <= 1e-12 * std::abs(ref));
}
