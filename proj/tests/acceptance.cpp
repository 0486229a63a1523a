// Acceptance criteria. Each criterion prints one line
//   ACnn PASS|FAIL <name>: <measured> (limit <tolerance>)
// and the process exits non-zero if any selected criterion fails.
// Usage: acceptance [--criterion N]   (default: all twelve)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "casimir/cli/commands.hpp"
#include "casimir/coupling.hpp"
#include "casimir/dispersion.hpp"
#include "casimir/force.hpp"
#include "casimir/greens.hpp"
#include "casimir/nonlinear.hpp"
#include "oracles.hpp"

using namespace casimir;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kVacuumTol = 1e-6;
constexpr double kVacuumSeconds = 1.0;
constexpr double kScalingTol = 1e-5;
constexpr double kClassicalTol = 1e-3;
constexpr double kClassicalSeconds = 1.0;
constexpr double kDualityTol = 1e-3;
constexpr double kGradientTol = 1e-5;
constexpr double kImBranchTol = 1e-12;
constexpr double kReBranchTol = 1e-4;
constexpr double kKkTol = 1e-4;
constexpr double kDeltaOracleTol = 1e-4;
constexpr double kDeltaSeconds = 30.0;
constexpr double kHomogeneityTol = 1e-12;
constexpr double kDysonTol = 1e-10;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

PlateSystem plates(LorentzMedium medium, int polarizations, double h, double T,
                   std::shared_ptr<const DeltaTable> delta = nullptr) {
  PlateSystem s;
  s.medium = std::move(medium);
  s.polarizations = polarizations;
  s.separation = h;
  s.temperature = T;
  s.delta = std::move(delta);
  return s;
}

const LorentzMedium kNarrowLorentz({{1.0, 1.0, 0.1}});
const LorentzMedium kBroadLorentz({{4.0, 2.0, 0.3}});

double f_smooth(double w) { return w * std::exp(-w); }

NonlinearKernel smooth_kernel(std::size_t n, double gain = 1.0) {
  return NonlinearKernel::separable(std::vector<AxisFactor>(n, AxisFactor(PowerExponential{1.0, 1.0})), gain, true);
}

std::shared_ptr<const DeltaTable> decaying_delta() {
  std::vector<double> xi;
  std::vector<double> v;
  for (double x = 0.0; x < 200.0; x += 0.25) {
    xi.push_back(x);
    v.push_back(0.3 / (1.0 + x * x));
  }
  return std::make_shared<const DeltaTable>(xi, std::vector<std::size_t>{2}, std::vector<std::vector<double>>{v},
                                            std::vector<double>{});
}

std::shared_ptr<const DeltaTable> kernel_delta(double gain) {
  DeltaOptions opt;
  const std::vector<NonlinearKernel> k{smooth_kernel(2, gain)};
  return std::make_shared<const DeltaTable>(build_delta_table(k, opt, 17));
}

Outcome ac01() {
  const auto start = std::chrono::steady_clock::now();
  const double f1 = casimir_force_T0(plates({}, 1, 1.0, 0.0)).force_per_area;
  const double f2 = casimir_force_T0(plates({}, 2, 1.0, 0.0)).force_per_area;
  const double t = seconds_since(start);
  const double err = std::max(rel(f1, -kPi * kPi / 480.0), rel(f2, -kPi * kPi / 240.0));
  return {err <= kVacuumTol && t < kVacuumSeconds,
          fmt("max rel error %.3e (limit 1e-6), runtime %.3f s (limit 1 s)", err, t)};
}

Outcome ac02() {
  const double vac = casimir_force_T0(plates({}, 2, 1.0, 0.0)).force_per_area;
  double worst = 0.0;
  for (double eps : {2.0, 4.0, 9.0}) {
    const double f = casimir_force_T0(plates(LorentzMedium::constant(eps), 2, 1.0, 0.0)).force_per_area;
    worst = std::max(worst, rel(f, vac / std::sqrt(eps)));
  }
  return {worst <= kScalingTol, fmt("max rel error %.3e (limit %.0e) over eps = 2, 4, 9", worst, kScalingTol)};
}

Outcome ac03() {
  // Reference exactly as stated: -zeta(3) T / (16 pi h^3) per polarization.
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  double ratio = 0.0;
  for (double x : {20.0, 40.0}) {
    const double h = 1.0;
    const double T = x / (2.0 * kPi * h);
    const double f = casimir_force_finiteT(plates({}, 1, h, T)).force_per_area;
    const double ref = -kZeta3 * T / (16.0 * kPi * h * h * h);
    worst = std::max(worst, rel(f, ref));
    ratio = f / ref;
  }
  const double t = seconds_since(start);
  return {worst <= kClassicalTol && t < kClassicalSeconds,
          fmt("max rel error %.3e (limit 1e-3), F/reference = %.6f", worst, ratio) +
              fmt(", runtime %.3f s (limit %.0f s)", t, kClassicalSeconds)};
}

Outcome ac04() {
  double worst = 0.0;
  for (const auto& m : {LorentzMedium::vacuum(), kNarrowLorentz, kBroadLorentz}) {
    for (double h : {0.5, 1.0, 2.0}) {
      auto s = plates(m, 2, h, 0.0);
      const double f0 = casimir_force_T0(s).force_per_area;
      s.temperature = 0.05 / (2.0 * kPi * h);
      const double ft = casimir_force_finiteT(s).force_per_area;
      worst = std::max(worst, rel(ft, f0));
    }
  }
  return {worst <= kDualityTol, fmt("max rel deviation %.3e (limit %.0e) at xi_1 h = 0.05", worst, kDualityTol)};
}

Outcome ac05() {
  const std::vector<PlateSystem> fixtures{
      plates({}, 2, 1.0, 0.0),
      plates(LorentzMedium::constant(4.0), 2, 0.7, 0.3),
      plates(kBroadLorentz, 2, 1.0, 0.0),
      plates(kNarrowLorentz, 2, 2.0, 0.2),
      plates(kBroadLorentz, 2, 0.5, 0.0, decaying_delta()),
  };
  double worst = 0.0;
  for (auto s : fixtures) {
    const double h = s.separation;
    const double f = casimir_force(s).force_per_area;
    const double d = 1e-4 * h;
    s.separation = h + d;
    const double ep = casimir_energy_per_area(s, 1e-13).force_per_area;
    s.separation = h - d;
    const double em = casimir_energy_per_area(s, 1e-13).force_per_area;
    worst = std::max(worst, rel(-(ep - em) / (2.0 * d), f));
  }
  return {worst <= kGradientTol, fmt("max rel mismatch %.3e (limit %.0e) on 5 fixtures", worst, kGradientTol)};
}

Outcome ac06() {
  const auto& m = kNarrowLorentz;
  const auto grid = default_grid(m, 2000);
  const auto nu = coupling1_from_chi(im_chi_spectrum(m, grid, Interpolation::log_cubic));
  double im_err = 0.0;
  for (std::size_t i = 100; i < grid.size(); i += 150) {
    const auto chi = chi1_from_coupling1(nu, grid[i], 1.0);
    const auto exact = oscillator_susceptibility(m, grid[i]);
    im_err = std::max(im_err, rel(chi.imag(), exact.imag()));
  }
  double re_err = 0.0;
  for (double w : {0.1, 0.5, 0.95, 1.05, 2.0, 5.0}) {
    const auto chi = chi1_from_coupling1(nu, w, 1.0);
    const auto exact = oscillator_susceptibility(m, w);
    re_err = std::max(re_err, std::abs(chi.real() - exact.real()) / std::abs(exact));
  }
  const double f0 = m.dominant_frequency();
  const std::vector<double> probes{0.1 * f0, 0.5 * f0, f0, 2.0 * f0, 10.0 * f0};
  const double kk = kk_residual(m, probes, 400);
  char buf[256];
  std::snprintf(buf, sizeof buf, "Im rel error %.3e (limit 1e-12), Re error / |chi| %.3e (limit 1e-4), KK %.3e (limit 1e-4)",
                im_err, re_err, kk);
  return {im_err <= kImBranchTol && re_err <= kReBranchTol && kk <= kKkTol, buf};
}

Outcome ac07() {
  const auto k = smooth_kernel(2);
  double worst = 0.0;
  double slowest = 0.0;
  for (double xi : {0.1, 1.0, 10.0}) {
    const auto start = std::chrono::steady_clock::now();
    const double d = delta_nl2_imag_axis(k, xi).real();
    slowest = std::max(slowest, seconds_since(start));
    const double ref = oracle::delta2_trapezoid(f_smooth, 1.0, xi);
    worst = std::max(worst, rel(d, ref));
  }
  return {worst <= kDeltaOracleTol && slowest < kDeltaSeconds,
          fmt("max rel error %.3e (limit 1e-4), slowest point %.3f s (limit 30 s)", worst, slowest)};
}

Outcome ac08() {
  const LorentzMedium m({{1.0, 1.0, 0.1}});
  const auto nu1 = coupling1_from_chi(im_chi_spectrum(m, default_grid(m, 600), Interpolation::log_cubic));
  DeltaOptions opt;
  opt.rel_tol = 1e-5;
  double worst = 0.0;
  for (std::size_t n : {2u, 3u}) {
    const auto k = smooth_kernel(n);
    const double d = delta_nl_n_imag_axis(k, 0.7, opt).real();
    const std::vector<double> w(n, 0.8);
    const auto chi = chi_n_from_couplings(k, nu1, w);
    for (double lambda : {0.5, 3.0}) {
      const double ds = delta_nl_n_imag_axis(k.scaled(lambda), 0.7, opt).real();
      worst = std::max(worst, rel(ds, lambda * lambda * d));
      const auto cs = chi_n_from_couplings(k.scaled(lambda), nu1, w);
      worst = std::max(worst, std::abs(cs - lambda * chi) / std::abs(lambda * chi));
    }
  }
  return {worst <= kHomogeneityTol, fmt("max rel deviation %.3e (limit %.0e)", worst, kHomogeneityTol)};
}

Outcome ac09() {
  struct Fixture {
    LorentzMedium medium;
    std::shared_ptr<const DeltaTable> delta;
  };
  const std::vector<Fixture> fixtures{
      {kBroadLorentz, decaying_delta()},
      {kNarrowLorentz, kernel_delta(1.0)},
      {LorentzMedium::constant(2.0), kernel_delta(5.0)},
  };
  int violations = 0;
  int checked = 0;
  for (const auto& fx : fixtures) {
    for (double T : {0.0, 0.2}) {
      for (double h : {0.5, 2.0}) {
        const double vac = casimir_force(plates({}, 2, h, T)).force_per_area;
        const double lin = casimir_force(plates(fx.medium, 2, h, T)).force_per_area;
        const double nl = casimir_force(plates(fx.medium, 2, h, T, fx.delta)).force_per_area;
        ++checked;
        if (!(std::abs(nl) <= std::abs(lin) && std::abs(lin) <= std::abs(vac))) ++violations;
      }
    }
  }
  return {violations == 0, fmt("%.0f ordering violations in %.0f cases", violations, checked)};
}

Outcome ac10() {
  DeltaOptions opt;
  const std::vector<NonlinearKernel> zero{NonlinearKernel::zero(2), NonlinearKernel::zero(3)};
  const auto table = std::make_shared<const DeltaTable>(build_delta_table(zero, opt, 9));
  int mismatches = 0;
  int checked = 0;
  for (const auto& m : {LorentzMedium::vacuum(), kNarrowLorentz, kBroadLorentz}) {
    for (double T : {0.0, 0.2}) {
      const auto lin = plates(m, 2, 1.0, T);
      const auto nl = plates(m, 2, 1.0, T, table);
      const double a[] = {casimir_force(lin).force_per_area, casimir_energy_per_area(lin).force_per_area};
      const double b[] = {casimir_force(nl).force_per_area, casimir_energy_per_area(nl).force_per_area};
      ++checked;
      if (std::memcmp(a, b, sizeof a) != 0) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%.0f of %.0f force/energy pairs differ bitwise", mismatches, checked)};
}

Outcome ac11() {
  double worst = 0.0;
  for (double k : {0.3, 0.8, 2.0}) {
    for (double xi : {0.5, 1.0, 3.0}) {
      const double g1 = linear_green(kNarrowLorentz, k, xi).real();
      const double delta = 0.5 / (xi * xi * g1);
      const DeltaTable table({0.0, 2.0 * xi}, {2}, {{delta, delta}}, {});
      const double closed = nonlinear_green(kNarrowLorentz, table, k, xi).real();
      const double r = -xi * xi * delta * g1;
      double series = 0.0;
      double term = g1;
      for (int i = 0; i < 40; ++i) {
        series += term;
        term *= r;
      }
      worst = std::max(worst, rel(series, closed));
    }
  }
  return {worst <= kDysonTol, fmt("max rel difference %.3e (limit %.0e) at contraction 0.5, 40 terms", worst, kDysonTol)};
}

Outcome ac12() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("casimir_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "run.json") << R"({
  "medium": {"oscillators": [{"plasma_weight": 4, "resonance": 2, "damping": 0.3}]},
  "nonlinear": {"kernels": [{"order": 2, "factors": [{"type": "power_exponential"}], "gain": 2}]},
  "geometry": {"separations_um": [0.5, 1.0, 2.0]},
  "temperatures_K": [0, 300],
  "numerics": {"method": "montecarlo", "mc_samples": 1000000, "delta_nodes": 17, "delta_tol": 3e-2}
})";
  std::ostringstream log;
  std::vector<std::string> outputs;
  int status = 0;
  for (int run = 0; run < 2; ++run) {
    cli::CliOptions opt;
    opt.config = (dir / "run.json").string();
    opt.out = (dir / ("run" + std::to_string(run))).string();
    opt.seed = 20240601;
    opt.no_header_timestamp = true;
    status |= cli::cmd_force(opt, log);
    std::ifstream in(fs::path(opt.out) / "force.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    outputs.push_back(ss.str());
  }
  fs::remove_all(dir);
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same && status == 0, std::string("outputs ") + (same ? "identical" : "differ") +
                                   fmt(" (%.0f bytes), exit status %.0f", static_cast<double>(outputs[0].size()),
                                       static_cast<double>(status))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"vacuum zero-temperature force", ac01},
      {"constant-permittivity scaling", ac02},
      {"classical limit", ac03},
      {"Matsubara / zero-temperature duality", ac04},
      {"energy gradient", ac05},
      {"linear-response round trip", ac06},
      {"Delta2 oracle equivalence", ac07},
      {"homogeneity", ac08},
      {"screening monotonicity", ac09},
      {"nonlinear reduction", ac10},
      {"Dyson series", ac11},
      {"determinism", ac12},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("AC%02zu %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
