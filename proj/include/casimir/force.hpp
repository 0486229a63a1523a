#pragma once

// Casimir pressure and energy per area between perfectly conducting plates
// with a dispersive (and optionally nonlinear) medium in the gap.
//
// Per polarization, with E(xi) = eps(i xi) + sum Delta(i xi) and
// x = 2 h p0 sqrt(E(p0)), the transverse momentum integral is done in
// closed form:
//   T = 0:  F = -1/(32 pi^2 h^4) int_0^inf dy B(y sqrt(E(y / 2h)))
//           U =  1/(32 pi^2 h^3) int_0^inf dy L(y sqrt(E(y / 2h)))
//   T > 0:  F = -T/(8 pi h^3) sum'_l B(x_l),  U = T/(8 pi h^2) sum'_l L(x_l)
// where B(x0) = int_x0^inf x^2/(e^x - 1) dx, L(x0) = int_x0^inf x ln(1 - e^-x) dx
// and the primed sum gives the l = 0 term half weight.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "casimir/dispersion.hpp"
#include "casimir/errors.hpp"
#include "casimir/nonlinear.hpp"
#include "casimir/parallel.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/units.hpp"

namespace casimir {

inline constexpr double kZeta3 = 1.2020569031595942854;

struct PlateSystem {
  double separation = 1.0;   // h in um
  double temperature = 0.0;  // k_B T / (hbar c) in 1/um
  LorentzMedium medium;
  std::shared_ptr<const DeltaTable> delta;  // summed nonlinear corrections; null for a linear medium
  int polarizations = 2;

  void validate() const {
    if (!(separation > 0.0) || !std::isfinite(separation))
      throw std::invalid_argument("PlateSystem: separation must be finite and > 0");
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
      throw std::invalid_argument("PlateSystem: temperature must be finite and >= 0");
    if (polarizations != 1 && polarizations != 2)
      throw std::invalid_argument("PlateSystem: polarizations must be 1 or 2");
  }
};

struct ForceResult {
  double force_per_area = 0.0;  // natural units (1/um^4); negative is attractive
  double error_estimate = 0.0;
  std::size_t matsubara_terms_used = 0;
  std::size_t quadrature_evaluations = 0;
};

/// Matsubara sum that hit its term limit. `partial()` holds the truncated
/// result with the tail estimate as its error.
class SumNotConverged : public Error {
 public:
  SumNotConverged(const std::string& message, ForceResult partial)
      : Error(ErrorKind::sum_not_converged, message), partial_(partial) {}
  const ForceResult& partial() const noexcept { return partial_; }

 private:
  ForceResult partial_;
};

struct MatsubaraGrid {
  std::vector<double> frequencies;
  std::vector<double> weights;
};

/// xi_l = 2 pi T l for l = 0..terms, zero mode weighted 1/2.
inline MatsubaraGrid matsubara_grid(double temperature, std::size_t terms) {
  if (!(temperature > 0.0)) throw std::invalid_argument("matsubara_grid: temperature must be > 0");
  MatsubaraGrid g;
  g.frequencies.resize(terms + 1);
  g.weights.assign(terms + 1, 1.0);
  g.weights[0] = 0.5;
  const double step = 2.0 * std::numbers::pi * temperature;
  for (std::size_t l = 0; l <= terms; ++l) g.frequencies[l] = step * static_cast<double>(l);
  return g;
}

namespace detail {

// Fixed 21-point Kronrod rule on [0, b].
template <class F>
double kronrod21(F&& f, double b) {
  const double half = 0.5 * b;
  double s = quad::detail::kWgk[10] * f(half);
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * quad::detail::kXgk[j];
    s += quad::detail::kWgk[j] * (f(half - dx) + f(half + dx));
  }
  return s * half;
}

}  // namespace detail

/// B(x0) = int_x0^inf x^2 / (e^x - 1) dx.
inline double bose_tail(double x0) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("bose_tail: x0 must be >= 0");
  if (x0 >= 2.0) {
    double s = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double kd = k;
      const double term = std::exp(-kd * x0) * (x0 * x0 / kd + 2.0 * x0 / (kd * kd) + 2.0 / (kd * kd * kd));
      s += term;
      if (term < 1e-18 * s) break;
    }
    return s;
  }
  if (x0 == 0.0) return 2.0 * kZeta3;
  return 2.0 * kZeta3 - detail::kronrod21([](double x) { return x * x / std::expm1(x); }, x0);
}

/// L(x0) = int_x0^inf x ln(1 - e^-x) dx  (negative).
inline double log_tail(double x0) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("log_tail: x0 must be >= 0");
  if (x0 >= 2.0) {
    double s = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double kd = k;
      const double term = std::exp(-kd * x0) * (x0 / (kd * kd) + 1.0 / (kd * kd * kd));
      s += term;
      if (term < 1e-18 * s) break;
    }
    return -s;
  }
  if (x0 == 0.0) return -kZeta3;
  // x ln(1 - e^-x) = x ln x + x ln((1 - e^-x)/x); the first part in closed form.
  const double head = 0.5 * x0 * x0 * std::log(x0) - 0.25 * x0 * x0;
  const double smooth = detail::kronrod21([](double x) { return x * std::log(-std::expm1(-x) / x); }, x0);
  return -kZeta3 - head - smooth;
}

/// eps(i xi) + sum Delta(i xi).
inline double effective_permittivity(const PlateSystem& system, double xi) {
  const double eps = permittivity_imag_axis(system.medium, xi);
  if (!system.delta) return eps;
  const double d = (*system.delta)(xi);
  if (d < 0.0) throw Error(ErrorKind::negative_delta, "Delta(i xi) < 0 at xi = " + std::to_string(xi));
  return eps + d;
}

/// Q(p) = sqrt(p_par^2 + p0^2 (eps(i p0) + sum Delta(i p0))).
inline double q_factor(const PlateSystem& system, double p0, double p_par) {
  if (!(p0 >= 0.0) || !(p_par >= 0.0)) throw std::invalid_argument("q_factor: momenta must be >= 0");
  return std::sqrt(p_par * p_par + p0 * p0 * effective_permittivity(system, p0));
}

namespace detail {

template <class Kernel>
quad::IntegralEstimate zero_temperature_integral(const PlateSystem& system, Kernel kernel, double tol) {
  const double h = system.separation;
  auto f = [&](double y) {
    const double p0 = y / (2.0 * h);
    return kernel(y * std::sqrt(effective_permittivity(system, p0)));
  };
  const double scale = 3.0 / std::sqrt(effective_permittivity(system, 1.5 / h));
  return quad::integrate_1d(f, quad::Axis::semi_infinite(0.0, scale), quad::Tolerance{tol, 0.0, 10'000'000});
}

struct MatsubaraSum {
  double value = 0.0;
  double tail = 0.0;
  std::size_t terms = 0;
  bool converged = true;
};

// Weighted sum of kernel(2 h xi_l sqrt(E(xi_l))), truncated when the
// geometric tail estimate drops below tol * |sum|. Terms are computed in
// parallel blocks; the stopping index and the summation order do not depend
// on `jobs`.
template <class Kernel>
MatsubaraSum matsubara_sum(const PlateSystem& system, Kernel kernel, double tol, std::size_t max_terms,
                           std::size_t jobs) {
  const double h = system.separation;
  const double step = 2.0 * std::numbers::pi * system.temperature;
  constexpr std::size_t kBlock = 256;
  std::vector<double> terms;
  MatsubaraSum out;
  double running = 0.0;
  out.converged = false;
  for (std::size_t start = 0; start < max_terms && !out.converged; start += kBlock) {
    const std::size_t count = std::min(kBlock, max_terms - start);
    std::vector<double> block(count);
    parallel_for_index(count, jobs, [&](std::size_t i) {
      const std::size_t l = start + i;
      const double xi = step * static_cast<double>(l);
      const double w = l == 0 ? 0.5 : 1.0;
      block[i] = w * kernel(2.0 * h * xi * std::sqrt(effective_permittivity(system, xi)));
    });
    for (std::size_t i = 0; i < count; ++i) {
      const double t = block[i];
      terms.push_back(t);
      running += t;
      const std::size_t l = start + i;
      if (l == 0) continue;
      if (t == 0.0) {
        out.tail = 0.0;
        out.converged = true;
        break;
      }
      const double prev = terms[l - 1];
      const double r = prev != 0.0 ? t / prev : 1.0;
      if (r < 1.0 && r >= 0.0) {
        out.tail = std::abs(t) * r / (1.0 - r);
        if (out.tail <= tol * std::abs(running)) {
          out.converged = true;
          break;
        }
      } else {
        out.tail = std::abs(t) * static_cast<double>(max_terms);
      }
    }
  }
  out.terms = terms.size();
  out.value = pairwise_sum(terms);
  return out;
}

}  // namespace detail

/// Zero-temperature pressure (temperature field ignored).
inline ForceResult casimir_force_T0(const PlateSystem& system, double tol = 1e-10) {
  system.validate();
  const double h = system.separation;
  const auto est = detail::zero_temperature_integral(system, bose_tail, tol);
  if (!est.converged)
    throw Error(ErrorKind::quadrature_failure, "T = 0 force integral did not converge at h = " + std::to_string(h));
  const double pre = -static_cast<double>(system.polarizations) / (32.0 * std::numbers::pi * std::numbers::pi *
                                                                   h * h * h * h);
  return ForceResult{pre * est.value, std::abs(pre) * est.error_estimate, 0, est.evaluations};
}

/// Finite-temperature pressure from the Matsubara sum.
inline ForceResult casimir_force_finiteT(const PlateSystem& system, double tol = 1e-10,
                                         std::size_t max_terms = 100'000, std::size_t jobs = 1) {
  system.validate();
  if (!(system.temperature > 0.0)) throw std::invalid_argument("casimir_force_finiteT: temperature must be > 0");
  const double h = system.separation;
  const auto sum = detail::matsubara_sum(system, bose_tail, tol, max_terms, jobs);
  const double pre = -static_cast<double>(system.polarizations) * system.temperature /
                     (8.0 * std::numbers::pi * h * h * h);
  ForceResult r{pre * sum.value, std::abs(pre) * sum.tail, sum.terms, 0};
  if (!sum.converged) {
    throw SumNotConverged("Matsubara sum not converged after " + std::to_string(sum.terms) +
                              " terms (tail estimate " + std::to_string(r.error_estimate) + ")",
                          r);
  }
  return r;
}

/// Dispatches on the temperature.
inline ForceResult casimir_force(const PlateSystem& system, double tol = 1e-10, std::size_t max_terms = 100'000,
                                 std::size_t jobs = 1) {
  return system.temperature > 0.0 ? casimir_force_finiteT(system, tol, max_terms, jobs)
                                  : casimir_force_T0(system, tol);
}

/// Energy per area (free energy for T > 0), natural units 1/um^3.
inline ForceResult casimir_energy_per_area(const PlateSystem& system, double tol = 1e-12,
                                           std::size_t max_terms = 100'000, std::size_t jobs = 1) {
  system.validate();
  const double h = system.separation;
  const double pol = system.polarizations;
  if (system.temperature > 0.0) {
    const auto sum = detail::matsubara_sum(system, log_tail, tol, max_terms, jobs);
    const double pre = pol * system.temperature / (8.0 * std::numbers::pi * h * h);
    ForceResult r{pre * sum.value, std::abs(pre) * sum.tail, sum.terms, 0};
    if (!sum.converged) throw SumNotConverged("Matsubara sum for the energy not converged", r);
    return r;
  }
  const auto est = detail::zero_temperature_integral(system, log_tail, tol);
  if (!est.converged)
    throw Error(ErrorKind::quadrature_failure, "T = 0 energy integral did not converge at h = " + std::to_string(h));
  const double pre = pol / (32.0 * std::numbers::pi * std::numbers::pi * h * h * h);
  return ForceResult{pre * est.value, std::abs(pre) * est.error_estimate, 0, est.evaluations};
}

}  // namespace casimir
