#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "casimir/dispersion.hpp"
#include "casimir/nonlinear.hpp"
#include "oracles.hpp"

using namespace casimir;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

NonlinearKernel smooth_kernel(std::size_t n, double gain = 1.0) {
  return NonlinearKernel::separable(std::vector<AxisFactor>(n, AxisFactor(PowerExponential{1.0, 1.0})), gain, true);
}

double f_smooth(double w) { return w * std::exp(-w); }

}  // namespace

TEST_CASE("Delta2 against the trapezoid oracle", "[nonlinear]") {
  const auto k = smooth_kernel(2);
  for (double xi : {0.0, 0.1, 1.0, 10.0}) {
    const auto d = delta_nl2_imag_axis(k, xi);
    const double ref = oracle::delta2_trapezoid(f_smooth, 1.0, xi);
    CHECK(d.converged);
    CHECK(d.imaginary_axis);
    CHECK(d.value.imag() == 0.0);
    CHECK(std::abs(d.real() - ref) <= 1e-4 * ref);
    CHECK(d.error_estimate <= 1e-5 * d.real());
  }
}

TEST_CASE("Delta2 is quadratic in the coupling and vanishes with it", "[nonlinear][property]") {
  const auto k = smooth_kernel(2);
  CHECK(delta_nl2_imag_axis(NonlinearKernel::zero(2), 1.0).real() == 0.0);
  for (double xi : {0.3, 2.0}) {
    const double base = delta_nl2_imag_axis(k, xi).real();
    CHECK(delta_nl2_imag_axis(k.scaled(2.0), xi).real() == Approx(4.0 * base).epsilon(1e-12));
    CHECK(delta_nl2_imag_axis(k.scaled(-0.1), xi).real() == Approx(0.01 * base).epsilon(1e-12));
  }
}

TEST_CASE("Delta2 is non-negative and decays", "[nonlinear][property]") {
  const auto k = NonlinearKernel::separable({AxisFactor(PowerExponential{2.0, 0.5}), AxisFactor(PowerExponential{1.0, 3.0})});
  double prev = delta_nl2_imag_axis(k, 1.0).real();
  CHECK(prev > 0.0);
  for (double xi = 2.0; xi < 200.0; xi *= 2.0) {
    const double d = delta_nl2_imag_axis(k, xi).real();
    CHECK(d >= 0.0);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("a coupling without low-frequency suppression diverges", "[nonlinear]") {
  // With f = e^-w the absorption transform grows like 1/|a| and the xi'
  // integral is log-divergent at xi' = xi and xi' = 0.
  const auto k = NonlinearKernel::separable({AxisFactor(PowerExponential{0.0, 1.0}), AxisFactor(PowerExponential{0.0, 1.0})});
  DeltaOptions opt;
  opt.max_evaluations = 20000;
  try {
    delta_nl2_imag_axis(k, 1.0, opt);
    FAIL("expected QuadratureFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::quadrature_failure);
    CHECK(std::string(e.what()).find("xi = 1.0") != std::string::npos);
  }
}

TEST_CASE("Delta3 against a direct Monte Carlo oracle", "[nonlinear]") {
  const auto k = smooth_kernel(3);
  DeltaOptions opt;
  opt.rel_tol = 1e-5;
  for (double xi : {0.1, 1.0}) {
    const double d = delta_nl3_imag_axis(k, xi, opt).real();
    const auto mc = oracle::delta3_montecarlo(1.0, xi, 10'000'000, 1234);
    CHECK(std::abs(d - mc.mean) <= 3.0 * mc.std_error);
    CHECK(mc.std_error < 5e-3 * mc.mean);
  }
}

TEST_CASE("Delta3 homogeneity and the literal denominators", "[nonlinear][property]") {
  const auto k = smooth_kernel(3);
  DeltaOptions opt;
  opt.rel_tol = 1e-5;
  CHECK(delta_nl3_imag_axis(NonlinearKernel::zero(3), 1.0, opt).real() == 0.0);
  const double base = delta_nl3_imag_axis(k, 1.0, opt).real();
  CHECK(delta_nl3_imag_axis(k.scaled(3.0), 1.0, opt).real() == Approx(9.0 * base).epsilon(1e-12));
  opt.paper_literal = true;
  const double literal = delta_nl3_imag_axis(k, 1.0, opt).real();
  CHECK(literal > 0.0);
  CHECK(std::abs(literal - base) > 0.1 * base);
  CHECK(delta_nl3_imag_axis(k.scaled(3.0), 1.0, opt).real() == Approx(9.0 * literal).epsilon(1e-12));
}

TEST_CASE("generic dispatcher", "[nonlinear]") {
  const auto k2 = smooth_kernel(2);
  const auto k3 = smooth_kernel(3);
  DeltaOptions opt;
  opt.rel_tol = 1e-5;
  CHECK(delta_nl_n_imag_axis(k2, 0.7, opt).real() == delta_nl2_imag_axis(k2, 0.7, opt).real());
  CHECK(delta_nl_n_imag_axis(k3, 0.7, opt).real() == delta_nl3_imag_axis(k3, 0.7, opt).real());
  try {
    delta_nl_n_imag_axis(smooth_kernel(4), 1.0, opt);
    FAIL("expected OrderUnsupported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::order_unsupported);
  }
}

TEST_CASE("Monte Carlo Delta agrees with the deterministic path", "[nonlinear][mc]") {
  const auto k = smooth_kernel(2);
  DeltaOptions opt;
  opt.method = DeltaMethod::montecarlo;
  opt.mc_samples = 2'000'000;
  opt.allow_unconverged = true;
  opt.seed = 99;
  const auto mc = delta_nl_n_imag_axis(k, 1.0, opt);
  const double det = delta_nl2_imag_axis(k, 1.0).real();
  CHECK(std::abs(mc.real() - det) <= 3.0 * mc.error_estimate);
  const auto again = delta_nl_n_imag_axis(k, 1.0, opt);
  CHECK(again.real() == mc.real());

  // Order 4 has only the Monte Carlo path.
  opt.mc_samples = 200'000;
  const auto d4 = delta_nl_n_imag_axis(smooth_kernel(4), 1.0, opt);
  CHECK(d4.real() > 0.0);
  CHECK(d4.order == 4);
}

TEST_CASE("non-separable kernels use the generic integral", "[nonlinear]") {
  const auto ax = log_grid(1e-3, 30.0, 120);
  std::vector<double> samples;
  for (double a : ax)
    for (double b : ax) samples.push_back(f_smooth(a) * f_smooth(b));
  const auto tab = NonlinearKernel::tabulated({ax, ax}, samples, true);
  DeltaOptions opt;
  opt.rel_tol = 5e-3;
  const double d = delta_nl2_imag_axis(tab, 1.0, opt).real();
  CHECK(d == Approx(oracle::delta2_trapezoid(f_smooth, 1.0, 1.0)).epsilon(2e-3));
}

TEST_CASE("susceptibility path equals the on-shell coupling integral", "[nonlinear]") {
  // Im chi^(2) built from nu^(2) by inverting the coupling formula; the
  // susceptibility-path Delta then reduces to i pi / 8 int nu^2 / (w1 w2).
  const LorentzMedium m({{1.0, 1.0, 0.1}});
  auto im1 = [&](double x) { return oscillator_susceptibility(m, x).imag(); };
  const auto spectrum =
      SpectralFunction::sample(im1, log_grid(1e-8, 50.0, 3000), Extrapolation::zero, Interpolation::log_cubic);

  auto check_path = [&](const std::function<double(double, double)>& nu2, double w, std::vector<double> breaks,
                        double tol) {
    const auto kernel = SusceptibilityKernel::from_function(
        SusceptibilityKernel::Kind::im_chi, 2, [&](std::span<const double> x) {
          const double s = (x[0] < 0.0 ? -1.0 : 1.0) * (x[1] < 0.0 ? -1.0 : 1.0);
          const double a = std::abs(x[0]);
          const double b = std::abs(x[1]);
          return std::complex<double>(s * 2.0 * kPi * std::sqrt(im1(a) * im1(b)) * nu2(a, b) / std::sqrt(a * b));
        });
    ImChiDeltaOptions opt;
    opt.upper = 50.0;
    opt.breakpoints = breaks;
    const auto d = delta_from_im_chi(kernel, spectrum, w, opt);
    CHECK(d.value.real() == 0.0);
    breaks.push_back(w);
    std::sort(breaks.begin(), breaks.end());
    const double ref = oracle::onshell2(nu2, w, 50.0, breaks);
    CHECK(d.value.imag() == Approx(ref).epsilon(tol));

    const auto doubled = SusceptibilityKernel::from_function(
        SusceptibilityKernel::Kind::im_chi, 2, [&](std::span<const double> x) { return 2.0 * kernel(x); });
    CHECK(delta_from_im_chi(doubled, spectrum, w, opt).value.imag() == Approx(4.0 * d.value.imag()).epsilon(1e-12));
  };

  auto smooth = [](double a, double b) { return f_smooth(a) * f_smooth(b); };
  for (double w : {0.5, 1.5, 3.0}) check_path(smooth, w, {}, 1e-5);

  const double width = 1e-2;
  // The a b factor keeps nu^2 / (w1 w2) finite as either frequency -> 0.
  auto narrow = [width](double a, double b) {
    return a * b * std::sqrt(lorentzian(a, 1.0, width) * lorentzian(b, 1.0, width));
  };
  check_path(narrow, 2.0, {1.0}, 5e-2);
}

TEST_CASE("susceptibility path with a vanishing kernel", "[nonlinear]") {
  const SpectralFunction im1({0.5, 1.0, 2.0}, {1.0, 1.0, 1.0});
  const auto none = SusceptibilityKernel::zero(SusceptibilityKernel::Kind::im_chi, 2);
  CHECK(delta_from_im_chi(none, im1, 1.0).value == std::complex<double>{});
}

TEST_CASE("Delta tables", "[nonlinear][table]") {
  const auto k = smooth_kernel(2);
  const std::vector<NonlinearKernel> kernels{k};
  const auto table = build_delta_table(kernels, DeltaOptions{}, 33);
  CHECK(table.xi().size() == 32);
  CHECK(table.xi().front() == 0.0);
  for (double xi : {0.05, 0.37, 1.9, 7.0, 40.0}) {
    const double direct = delta_nl2_imag_axis(k, xi).real();
    CHECK(table(xi) == Approx(direct).epsilon(1e-5).margin(1e-9));
  }
  CHECK(table(1e9) >= 0.0);
  CHECK(table(1e9) < 1e-10);

  SECTION("CSV round trip is exact") {
    std::stringstream ss;
    table.write_csv(ss);
    const auto back = DeltaTable::read_csv(ss);
    CHECK(back.xi() == table.xi());
    CHECK(back.values() == table.values());
    CHECK(back.scale() == table.scale());
    for (double xi : {0.0, 0.3, 3.0}) CHECK(back(xi) == table(xi));
  }

  SECTION("zero kernels give a zero table") {
    const std::vector<NonlinearKernel> none{NonlinearKernel::zero(2), NonlinearKernel::zero(3)};
    const auto z = build_delta_table(none, DeltaOptions{}, 9);
    for (const auto& col : z.values())
      for (double v : col) CHECK(v == 0.0);
    CHECK(z(0.5) == 0.0);
  }
}

TEST_CASE("sampled tables interpolate linearly with a power-law tail", "[nonlinear][table]") {
  const DeltaTable t({0.0, 1.0, 2.0}, {2}, {{1.0, 0.5, 0.25}}, {});
  CHECK(t(0.5) == Approx(0.75));
  CHECK(t(4.0) == Approx(0.125).epsilon(1e-12));
  CHECK(t(0.0) == 1.0);
}

TEST_CASE("negative table entries are refused", "[nonlinear][table]") {
  try {
    DeltaTable({0.0, 1.0}, {2}, {{0.1, -0.2}}, {});
    FAIL("expected NegativeDelta");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::negative_delta);
  }
}

TEST_CASE("malformed table files report the line", "[nonlinear][table]") {
  std::stringstream bad("xi,delta_2,error\n0.0,1.0,0.0\n1.0,abc,0.0\n");
  try {
    DeltaTable::read_csv(bad, "t.csv");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config_error);
    CHECK(std::string(e.what()).find("t.csv:3") != std::string::npos);
  }
  std::stringstream header("w,delta_2\n");
  CHECK_THROWS_AS(DeltaTable::read_csv(header), Error);
}
