#pragma once

// Scalar propagators in reciprocal space. Only the transverse amplitude is
// materialized; the projector (delta_ij - k_i k_j / k^2) multiplies it.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "casimir/coupling.hpp"
#include "casimir/dispersion.hpp"
#include "casimir/errors.hpp"
#include "casimir/nonlinear.hpp"

namespace casimir {

enum class GreenKind { free_transverse, free_longitudinal, oscillator, linear, nonlinear, slab };

struct GreenValue {
  std::complex<double> amplitude;
  GreenKind kind = GreenKind::free_transverse;

  double real() const { return amplitude.real(); }
};

/// Euclidean momentum (p0, |p_par|).
struct Momentum3 {
  double p0 = 0.0;
  double p_par = 0.0;
};

enum class FreePart { transverse, longitudinal, oscillator };

inline constexpr double kPoleTolerance = 1e-12;

/// Free propagators. For `oscillator`, k is the probe frequency w' and the
/// amplitude is 1/(w^2 - w'^2) with the -i0 branch implied.
inline GreenValue free_green(double k, double w, FreePart part, double tolerance = kPoleTolerance) {
  switch (part) {
    case FreePart::transverse: {
      const double d = k * k - w * w;
      if (std::abs(d) < tolerance)
        throw Error(ErrorKind::pole_proximity, "k^2 - w^2 = " + std::to_string(d) + " at the light cone");
      return {1.0 / d, GreenKind::free_transverse};
    }
    case FreePart::longitudinal: {
      if (std::abs(w * w) < tolerance) throw Error(ErrorKind::pole_proximity, "longitudinal propagator at w = 0");
      return {-1.0 / (w * w), GreenKind::free_longitudinal};
    }
    case FreePart::oscillator: {
      const double d = w * w - k * k;
      if (std::abs(d) < tolerance)
        throw Error(ErrorKind::pole_proximity, "oscillator propagator on resonance");
      return {1.0 / d, GreenKind::oscillator};
    }
  }
  throw std::invalid_argument("free_green: unknown part");
}

/// G1(k, i xi) = 1 / (k^2 + xi^2 eps(i xi)).
inline GreenValue linear_green(const LorentzMedium& medium, double k, double xi) {
  return {1.0 / (k * k + xi * xi * permittivity_imag_axis(medium, xi)), GreenKind::linear};
}

/// Real-axis G1(k, w) = 1 / (k^2 - w^2 eps(w)).
inline GreenValue linear_green_real_axis(const LorentzMedium& medium, double k, double w,
                                         double tolerance = kPoleTolerance) {
  const auto d = k * k - w * w * permittivity(medium, w);
  if (std::abs(d) < tolerance) throw Error(ErrorKind::pole_proximity, "on the medium dispersion relation");
  return {1.0 / d, GreenKind::linear};
}

/// G^(n)(k, i xi) = 1 / (k^2 + xi^2 (eps(i xi) + sum Delta(i xi))).
inline GreenValue nonlinear_green(const LorentzMedium& medium, const DeltaTable& delta, double k, double xi) {
  const double d = delta(xi);
  if (d < 0.0) throw Error(ErrorKind::negative_delta, "Delta(i xi) < 0 at xi = " + std::to_string(xi));
  return {1.0 / (k * k + xi * xi * (permittivity_imag_axis(medium, xi) + d)), GreenKind::nonlinear};
}

/// Plate-to-plate kernel exp(-h Q) / (2 Q).
inline double slab_kernel(double q, double h) {
  if (!(q > 0.0)) throw std::invalid_argument("slab_kernel: Q must be > 0");
  if (!(h >= 0.0)) throw std::invalid_argument("slab_kernel: h must be >= 0");
  return std::exp(-h * q) / (2.0 * q);
}

/// <E P> correlator: i w chi1(w) G1(k, w).
inline std::complex<double> correlation_em_p(const LorentzMedium& medium, double k, double w,
                                             double tolerance = kPoleTolerance) {
  const auto chi = oscillator_susceptibility(medium, w);
  if (chi == std::complex<double>{}) return {};
  return std::complex<double>(0.0, w) * chi * linear_green_real_axis(medium, k, w, tolerance).amplitude;
}

/// Three-point function -w1 w2 chi2(w1, w2) G1(k1, w1) G1(k2, w2), with
/// chi2 from the couplings and G1 from the medium.
inline std::complex<double> correlation_3pt(const NonlinearKernel& nu2, const SpectralFunction& nu1,
                                            const LorentzMedium& medium, double w1, double w2, double k1, double k2,
                                            double tolerance = kPoleTolerance) {
  if (w1 == 0.0 || w2 == 0.0 || nu2.is_zero()) return {};
  const auto chi = chi2(nu2, nu1, w1, w2);
  if (chi == std::complex<double>{}) return {};
  return -w1 * w2 * chi * linear_green_real_axis(medium, k1, w1, tolerance).amplitude *
         linear_green_real_axis(medium, k2, w2, tolerance).amplitude;
}

}  // namespace casimir
