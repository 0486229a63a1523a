#pragma once

// Linear medium: multi-oscillator Drude-Lorentz permittivity on the real and
// imaginary frequency axes, the linear coupling function nu1 and its
// transforms, and a Kramers-Kronig consistency residual.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "casimir/errors.hpp"
#include "casimir/principal_value.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/spectral.hpp"

namespace casimir {

struct LorentzOscillator {
  double plasma_weight = 0.0;  // omega_p^2
  double resonance = 0.0;      // omega_0
  double damping = 0.0;        // gamma
};

class LorentzMedium {
 public:
  LorentzMedium() = default;

  explicit LorentzMedium(std::vector<LorentzOscillator> oscillators, double background = 1.0)
      : oscillators_(std::move(oscillators)), background_(background) {
    if (!(background_ >= 1.0) || !std::isfinite(background_))
      throw std::invalid_argument("LorentzMedium: background must be finite and >= 1");
    for (std::size_t i = 0; i < oscillators_.size(); ++i) {
      const auto& o = oscillators_[i];
      if (!(o.plasma_weight >= 0.0) || !(o.resonance >= 0.0) || !(o.damping >= 0.0) ||
          !std::isfinite(o.plasma_weight) || !std::isfinite(o.resonance) || !std::isfinite(o.damping)) {
        throw std::invalid_argument("LorentzMedium: oscillator " + std::to_string(i) +
                                    " needs finite, non-negative parameters");
      }
      if (o.resonance == 0.0 && o.damping == 0.0 && o.plasma_weight > 0.0)
        throw std::invalid_argument("LorentzMedium: oscillator " + std::to_string(i) +
                                    " has a pole at zero frequency (resonance = damping = 0)");
    }
  }

  static LorentzMedium vacuum() { return LorentzMedium{}; }

  /// Dispersionless medium with eps = `eps` at every frequency.
  static LorentzMedium constant(double eps) { return LorentzMedium({}, eps); }

  const std::vector<LorentzOscillator>& oscillators() const { return oscillators_; }
  double background() const { return background_; }
  bool is_vacuum() const { return oscillators_.empty() && background_ == 1.0; }

  /// Characteristic frequency of the strongest oscillator; 1 for an
  /// oscillator-free medium.
  double dominant_frequency() const {
    double best_weight = -1.0;
    double freq = 1.0;
    for (const auto& o : oscillators_) {
      if (o.plasma_weight > best_weight) {
        best_weight = o.plasma_weight;
        freq = o.resonance > 0.0 ? o.resonance : std::max(o.damping, std::sqrt(o.plasma_weight));
      }
    }
    return freq > 0.0 ? freq : 1.0;
  }

 private:
  std::vector<LorentzOscillator> oscillators_;
  double background_ = 1.0;
};

/// eps(w) - background: the oscillator part of the susceptibility, which
/// vanishes at infinite frequency.
inline std::complex<double> oscillator_susceptibility(const LorentzMedium& medium, double w) {
  std::complex<double> chi{0.0, 0.0};
  for (const auto& o : medium.oscillators()) {
    chi += o.plasma_weight / std::complex<double>(o.resonance * o.resonance - w * w, -o.damping * w);
  }
  return chi;
}

inline std::complex<double> permittivity(const LorentzMedium& medium, double w) {
  if (!(w >= 0.0)) throw std::invalid_argument("permittivity: frequency must be >= 0");
  return medium.background() + oscillator_susceptibility(medium, w);
}

/// eps(i xi): real, >= background, non-increasing in xi.
inline double permittivity_imag_axis(const LorentzMedium& medium, double xi) {
  if (!(xi >= 0.0)) throw std::invalid_argument("permittivity_imag_axis: xi must be >= 0");
  double eps = medium.background();
  if (std::isinf(xi)) return eps;
  for (const auto& o : medium.oscillators()) {
    const double denom = o.resonance * o.resonance + xi * xi + o.damping * xi;
    if (denom > 0.0) eps += o.plasma_weight / denom;
  }
  return eps;
}

/// Default spectral grid: `points` log-spaced nodes over
/// [1e-3, 1e3] x dominant frequency.
inline std::vector<double> default_grid(const LorentzMedium& medium, std::size_t points = 400) {
  const double f = medium.dominant_frequency();
  return log_grid(1e-3 * f, 1e3 * f, points);
}

/// Im chi(w) of the medium sampled on `grid`.
inline SpectralFunction im_chi_spectrum(const LorentzMedium& medium, std::vector<double> grid,
                                        Interpolation interpolation = Interpolation::log_linear) {
  return SpectralFunction::sample([&](double w) { return oscillator_susceptibility(medium, w).imag(); },
                                  std::move(grid), Extrapolation::zero, interpolation);
}

/// nu1(w) = sqrt((2w/pi) Im chi(w)) on the grid of `im_chi`. Values down to
/// -tolerance * max|Im chi| are treated as rounding and clamped to zero.
inline SpectralFunction coupling1_from_chi(const SpectralFunction& im_chi, double tolerance = 1e-10) {
  const double floor = tolerance * im_chi.max_abs();
  return im_chi.transformed([&](double w, double v) {
    if (v < -floor) {
      throw Error(ErrorKind::negative_spectrum,
                  "Im chi = " + std::to_string(v) + " < 0 at frequency " + std::to_string(w) +
                      " (medium model is not passive)");
    }
    return std::sqrt(2.0 * w / std::numbers::pi * std::max(v, 0.0));
  });
}

namespace detail {

inline std::vector<double> support_breakpoints(const SpectralFunction& f) {
  return {f.grid().begin(), f.grid().end()};
}

// Re chi1 = PV of nu^2(x)/(x^2 - w^2) over the support of nu.
inline PvResult chi1_real_part(const SpectralFunction& nu, double w, const quad::Tolerance& tol) {
  auto g = [&](double x) {
    const double v = nu(x);
    return v * v;
  };
  const auto breaks = support_breakpoints(nu);
  const bool tails = nu.extrapolation() == Extrapolation::power_law;
  const double lo = tails ? 0.0 : nu.lower();
  const double hi = tails ? std::numeric_limits<double>::infinity() : nu.upper();
  return pv_integral(g, lo, hi, w, breaks, tol);
}

}  // namespace detail

struct Chi1Result {
  std::complex<double> value;
  double error_estimate = 0.0;  // includes the grid-resolution estimate
};

/// chi1(w) from the coupling function: real part by principal-value
/// quadrature over the grid, imaginary part (pi/2w) nu(w)^2 exactly.
///
/// The grid-resolution error is estimated by repeating the real part on a
/// grid with every other node removed; GridTooCoarse is raised when the
/// combined estimate exceeds `tol` * |chi1(w)|.
inline Chi1Result chi1_from_coupling1_detailed(const SpectralFunction& nu, double w, double tol = 1e-3) {
  if (!(w > 0.0)) throw std::invalid_argument("chi1_from_coupling1: frequency must be > 0");
  if (w > nu.upper() && nu.extrapolation() == Extrapolation::zero)
    throw std::invalid_argument("chi1_from_coupling1: frequency above the grid support");

  const quad::Tolerance qt{1e-11, 0.0, 20'000'000};
  const PvResult full = detail::chi1_real_part(nu, w, qt);
  const double v = nu(w);
  const double im = std::numbers::pi / (2.0 * w) * v * v;

  double grid_error = 0.0;
  if (nu.size() >= 5) {
    const PvResult coarse = detail::chi1_real_part(nu.decimated(2), w, qt);
    // Richardson factor 2^p - 1 for interpolation order p.
    const double richardson = nu.interpolation() == Interpolation::log_cubic ? 15.0 : 3.0;
    grid_error = std::abs(full.value - coarse.value) / richardson;
  }
  Chi1Result out{{full.value, im}, full.error_estimate + grid_error};
  const double scale = std::abs(out.value);
  if (out.error_estimate > tol * scale && out.error_estimate > 1e-300) {
    throw Error(ErrorKind::grid_too_coarse, "estimated error " + std::to_string(out.error_estimate) +
                                                " exceeds tolerance at frequency " + std::to_string(w));
  }
  return out;
}

inline std::complex<double> chi1_from_coupling1(const SpectralFunction& nu, double w, double tol = 1e-3) {
  return chi1_from_coupling1_detailed(nu, w, tol).value;
}

namespace detail {

// int_lo^hi sin(w t)/w g(w) dw for t > 0, with `nodes` as breakpoints.
template <class G>
double sine_transform(G&& g, double lo, double hi, std::span<const double> nodes, double t) {
  std::vector<double> breaks;
  // Sub-panels keep the phase advance w*t below ~1 rad per panel.
  double prev = lo;
  auto add_until = [&](double node) {
    const auto pieces = static_cast<std::size_t>(std::ceil((node - prev) * t));
    for (std::size_t k = 1; k < pieces; ++k)
      breaks.push_back(prev + (node - prev) * static_cast<double>(k) / static_cast<double>(pieces));
    breaks.push_back(node);
    prev = node;
  };
  for (double node : nodes)
    if (node > prev && node < hi) add_until(node);
  add_until(hi);
  breaks.pop_back();
  auto f = [&](double w) {
    const double kernel = w > 0.0 ? std::sin(w * t) / w : t;
    return kernel * g(w);
  };
  return quad::integrate_1d(f, quad::Axis::finite(lo, hi, std::move(breaks)),
                            quad::Tolerance{1e-10, 1e-300, 50'000'000})
      .value;
}

}  // namespace detail

/// chi1(t) = int sin(w t)/w nu(w)^2 dw for t > 0, exactly 0 for t <= 0.
/// Integrates over the grid support (and the low-frequency tail for
/// power-law extrapolation).
inline double chi1_time_domain(const SpectralFunction& nu, double t) {
  if (!(t > 0.0)) return 0.0;
  const double lo = nu.extrapolation() == Extrapolation::power_law ? 0.0 : nu.lower();
  return detail::sine_transform(
      [&](double w) {
        const double v = nu(w);
        return v * v;
      },
      lo, nu.upper(), nu.grid(), t);
}

/// Max over the test frequencies of
/// |Re chi(w) - (2/pi) PV int w' Im chi(w') / (w'^2 - w^2) dw'|,
/// normalized by the largest |chi(w)| at the test frequencies. chi is the
/// oscillator part eps - background. The default grid supplies the
/// quadrature breakpoints.
inline double kk_residual(const LorentzMedium& medium, std::span<const double> test_frequencies,
                          std::size_t grid_points = 400) {
  if (test_frequencies.empty()) throw std::invalid_argument("kk_residual: empty test set");
  if (medium.oscillators().empty()) return 0.0;
  const auto grid = default_grid(medium, grid_points);
  double norm = 0.0;
  double worst = 0.0;
  for (double w : test_frequencies) {
    if (!(w > 0.0)) throw std::invalid_argument("kk_residual: test frequencies must be > 0");
    const auto chi = oscillator_susceptibility(medium, w);
    norm = std::max(norm, std::abs(chi));
    auto g = [&](double x) { return x * oscillator_susceptibility(medium, x).imag(); };
    const auto pv = pv_integral(g, 0.0, std::numeric_limits<double>::infinity(), w, grid,
                                quad::Tolerance{1e-12, 0.0, 20'000'000});
    const double kk = 2.0 / std::numbers::pi * pv.value;
    worst = std::max(worst, std::abs(chi.real() - kk));
  }
  return norm > 0.0 ? worst / norm : 0.0;
}

}  // namespace casimir
