#pragma once

// Nonlinear coupling kernels nu^(n) and susceptibilities chi^(n).
//
// Every frequency integral factorizes per axis: separable kernels carry one
// factor per axis, and tabulated kernels are sums of products of log-linear
// hat functions. chi^(n) is therefore assembled from one-dimensional axis
// responses  int phi(x) nu1(x) / (x^2 - w^2 - i0) dx.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "casimir/dispersion.hpp"
#include "casimir/errors.hpp"
#include "casimir/principal_value.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/spectral.hpp"

namespace casimir {

/// f(w) = w^power exp(-rate w).
struct PowerExponential {
  double power = 1.0;
  double rate = 1.0;
};

/// One axis of a separable kernel: either closed-form or tabulated.
class AxisFactor {
 public:
  AxisFactor(PowerExponential p) : rep_(p) {
    if (!(p.power >= 0.0) || !(p.rate > 0.0))
      throw std::invalid_argument("PowerExponential: need power >= 0 and rate > 0");
  }
  AxisFactor(SpectralFunction f) : rep_(std::move(f)) {}

  /// Even in w.
  double operator()(double w) const {
    const double a = std::abs(w);
    if (const auto* p = std::get_if<PowerExponential>(&rep_)) {
      if (a == 0.0) return p->power == 0.0 ? 1.0 : 0.0;
      return std::exp(p->power * std::log(a) - p->rate * a);
    }
    return std::get<SpectralFunction>(rep_)(a);
  }

  bool tabulated() const { return std::holds_alternative<SpectralFunction>(rep_); }
  const SpectralFunction* spectral() const { return std::get_if<SpectralFunction>(&rep_); }
  const PowerExponential* closed_form() const { return std::get_if<PowerExponential>(&rep_); }

  /// Median of the weight f(w)^2 on [0, inf).
  double median() const {
    if (const auto* p = closed_form()) {
      // f^2 is a Gamma density with shape 2p+1 and scale 1/(2 rate).
      const double k = 2.0 * p->power + 1.0;
      return (k - 1.0 / 3.0 + 0.02 / k) / (2.0 * p->rate);
    }
    const auto& f = *spectral();
    const auto g = f.grid();
    std::vector<double> cumulative(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
      const double a = f.values()[i - 1];
      const double b = f.values()[i];
      cumulative[i] = cumulative[i - 1] + 0.5 * (a * a + b * b) * (g[i] - g[i - 1]);
    }
    const double half = 0.5 * cumulative.back();
    if (!(half > 0.0)) return std::sqrt(f.lower() * f.upper());
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), half);
    return g[static_cast<std::size_t>(it - cumulative.begin())];
  }

  /// Quadrature axis covering the support of the factor.
  quad::Axis axis() const {
    if (const auto* f = spectral()) {
      if (f->extrapolation() == Extrapolation::zero)
        return quad::Axis::finite(f->lower(), f->upper(), {f->grid().begin() + 1, f->grid().end() - 1});
      return quad::Axis::semi_infinite(0.0, median(), {f->grid().begin(), f->grid().end()});
    }
    return quad::Axis::semi_infinite(0.0, median());
  }

 private:
  std::variant<PowerExponential, SpectralFunction> rep_;
};

/// nu^(n)(w_1..w_n): separable (gain * prod f_k(w_k)) or tabulated on a
/// tensor grid with row-major samples (last axis fastest), interpolated
/// multilinearly in log-frequency and zero outside the grid.
class NonlinearKernel {
 public:
  NonlinearKernel() = default;

  static NonlinearKernel separable(std::vector<AxisFactor> factors, double gain = 1.0, bool symmetric = false) {
    if (factors.size() < 2) throw std::invalid_argument("NonlinearKernel: order must be >= 2");
    if (!std::isfinite(gain)) throw std::invalid_argument("NonlinearKernel: gain must be finite");
    NonlinearKernel k;
    k.order_ = factors.size();
    k.factors_ = std::move(factors);
    k.gain_ = gain;
    k.symmetric_ = symmetric;
    return k;
  }

  static NonlinearKernel tabulated(std::vector<std::vector<double>> axes, std::vector<double> samples,
                                   bool symmetric = false) {
    if (axes.size() < 2) throw std::invalid_argument("NonlinearKernel: order must be >= 2");
    std::size_t total = 1;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& g = axes[a];
      if (g.size() < 2) throw std::invalid_argument("NonlinearKernel: axis " + std::to_string(a) + " needs >= 2 nodes");
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0) || !std::isfinite(g[i]) || (i > 0 && !(g[i] > g[i - 1])))
          throw std::invalid_argument("NonlinearKernel: axis " + std::to_string(a) +
                                      " must be positive and strictly increasing");
      }
      total *= g.size();
    }
    if (samples.size() != total)
      throw std::invalid_argument("NonlinearKernel: expected " + std::to_string(total) + " samples, got " +
                                  std::to_string(samples.size()));
    for (double s : samples)
      if (!std::isfinite(s)) throw std::invalid_argument("NonlinearKernel: non-finite sample");
    NonlinearKernel k;
    k.order_ = axes.size();
    k.axes_ = std::move(axes);
    k.samples_ = std::move(samples);
    k.symmetric_ = symmetric;
    if (symmetric) k.check_symmetry();
    return k;
  }

  /// Identically zero kernel of the given order.
  static NonlinearKernel zero(std::size_t order) {
    return separable(std::vector<AxisFactor>(order, AxisFactor(PowerExponential{0.0, 1.0})), 0.0);
  }

  std::size_t order() const { return order_; }
  bool is_separable() const { return !factors_.empty(); }
  bool symmetric() const { return symmetric_; }
  double gain() const { return gain_; }
  const std::vector<AxisFactor>& factors() const { return factors_; }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& samples() const { return samples_; }

  bool is_zero() const {
    if (is_separable()) return gain_ == 0.0;
    return std::all_of(samples_.begin(), samples_.end(), [](double s) { return s == 0.0; });
  }

  /// Kernel value; arguments enter through |w_k|.
  double operator()(std::span<const double> w) const {
    if (w.size() != order_) throw std::invalid_argument("NonlinearKernel: wrong number of arguments");
    if (is_separable()) {
      if (gain_ == 0.0) return 0.0;
      double v = gain_;
      for (std::size_t k = 0; k < order_; ++k) v *= factors_[k](w[k]);
      return v;
    }
    std::vector<std::size_t> cell(order_);
    std::vector<double> t(order_);
    for (std::size_t k = 0; k < order_; ++k) {
      const double a = std::abs(w[k]);
      const auto& g = axes_[k];
      if (a < g.front() || a > g.back()) return 0.0;
      std::size_t i = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), a) - g.begin());
      i = std::min(std::max<std::size_t>(i, 1), g.size() - 1) - 1;
      cell[k] = i;
      t[k] = std::log(a / g[i]) / std::log(g[i + 1] / g[i]);
    }
    double v = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << order_); ++corner) {
      double weight = 1.0;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < order_; ++k) {
        const bool up = (corner >> k) & 1U;
        weight *= up ? t[k] : 1.0 - t[k];
        flat = flat * axes_[k].size() + cell[k] + (up ? 1 : 0);
      }
      if (weight != 0.0) v += weight * samples_[flat];
    }
    return v;
  }

  NonlinearKernel scaled(double factor) const {
    NonlinearKernel k = *this;
    if (k.is_separable()) {
      k.gain_ *= factor;
    } else {
      for (double& s : k.samples_) s *= factor;
    }
    return k;
  }

  /// Integration axis for frequency argument k.
  quad::Axis axis(std::size_t k) const {
    if (is_separable()) return factors_.at(k).axis();
    // At most kMaxAxisBreaks interior nodes: every break multiplies the
    // initial panel count of each nested level.
    constexpr std::size_t kMaxAxisBreaks = 8;
    const auto& g = axes_.at(k);
    const std::size_t interior = g.size() > 2 ? g.size() - 2 : 0;
    const std::size_t step = (interior + kMaxAxisBreaks - 1) / kMaxAxisBreaks;
    std::vector<double> breaks;
    for (std::size_t i = step; i + 1 < g.size(); i += step) breaks.push_back(g[i]);
    return quad::Axis::finite(g.front(), g.back(), std::move(breaks));
  }

  /// Typical frequency along axis k (median of the kernel weight).
  double axis_scale(std::size_t k) const {
    if (is_separable()) return factors_.at(k).median();
    const auto& g = axes_.at(k);
    return std::sqrt(g.front() * g.back());
  }

 private:
  void check_symmetry() const {
    const std::size_t n = axes_.front().size();
    for (const auto& g : axes_) {
      if (g != axes_.front())
        throw std::invalid_argument("NonlinearKernel: symmetric kernels need identical axes");
    }
    std::vector<std::size_t> idx(order_);
    for (std::size_t flat = 0; flat < samples_.size(); ++flat) {
      std::size_t rest = flat;
      for (std::size_t k = order_; k-- > 0;) {
        idx[k] = rest % n;
        rest /= n;
      }
      auto perm = idx;
      std::sort(perm.begin(), perm.end());
      std::size_t sorted_flat = 0;
      for (std::size_t k = 0; k < order_; ++k) sorted_flat = sorted_flat * n + perm[k];
      if (std::abs(samples_[flat] - samples_[sorted_flat]) > 1e-12)
        throw std::invalid_argument("NonlinearKernel: samples are not permutation-invariant");
    }
  }

  std::size_t order_ = 0;
  std::vector<AxisFactor> factors_;
  double gain_ = 0.0;
  std::vector<std::vector<double>> axes_;
  std::vector<double> samples_;
  bool symmetric_ = false;
};

/// chi^(n) (complex) or Im chi^(n) (real) as a function of n signed
/// frequencies. Negative arguments follow chi(-w) = conj chi(w) per axis,
/// so Im chi^(n) is odd in every argument.
class SusceptibilityKernel {
 public:
  enum class Kind { chi, im_chi };
  using Function = std::function<std::complex<double>(std::span<const double>)>;

  SusceptibilityKernel() = default;

  static SusceptibilityKernel from_function(Kind kind, std::size_t order, Function fn) {
    if (order < 1) throw std::invalid_argument("SusceptibilityKernel: order must be >= 1");
    SusceptibilityKernel k;
    k.kind_ = kind;
    k.order_ = order;
    k.fn_ = std::move(fn);
    return k;
  }

  /// Tabulated Im chi^(n) on positive frequencies, extended oddly.
  static SusceptibilityKernel tabulated_im(std::vector<std::vector<double>> axes, std::vector<double> samples) {
    auto table = std::make_shared<NonlinearKernel>(NonlinearKernel::tabulated(std::move(axes), std::move(samples)));
    const std::size_t n = table->order();
    return from_function(Kind::im_chi, n, [table](std::span<const double> w) {
      double sign = 1.0;
      for (double x : w) sign *= x < 0.0 ? -1.0 : 1.0;
      return std::complex<double>(sign * (*table)(w), 0.0);
    });
  }

  static SusceptibilityKernel zero(Kind kind, std::size_t order) {
    return from_function(kind, order, [](std::span<const double>) { return std::complex<double>{}; });
  }

  Kind kind() const { return kind_; }
  std::size_t order() const { return order_; }

  std::complex<double> operator()(std::span<const double> w) const {
    if (w.size() != order_) throw std::invalid_argument("SusceptibilityKernel: wrong number of arguments");
    if (!fn_) return {};
    const auto v = fn_(w);
    return kind_ == Kind::im_chi ? std::complex<double>(v.real(), 0.0) : v;
  }

  SusceptibilityKernel scaled(double factor) const {
    Function inner = fn_;
    return from_function(kind_, order_, [inner, factor](std::span<const double> w) {
      return inner ? inner(w) * factor : std::complex<double>{};
    });
  }

 private:
  Kind kind_ = Kind::chi;
  std::size_t order_ = 0;
  Function fn_;
};

struct AxisResponse {
  std::complex<double> value;
  double error_estimate = 0.0;
};

namespace detail {

// Support of nu1 as an integration range.
inline std::pair<double, double> coupling_support(const SpectralFunction& nu1) {
  if (nu1.extrapolation() == Extrapolation::power_law) return {0.0, std::numeric_limits<double>::infinity()};
  return {nu1.lower(), nu1.upper()};
}

inline std::vector<double> merged_breaks(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <class Phi>
double axis_pv(const Phi& phi, const SpectralFunction& nu1, double w, double lo, double hi,
               std::span<const double> breaks, double& error) {
  const auto [slo, shi] = coupling_support(nu1);
  lo = std::max(lo, slo);
  hi = std::min(hi, shi);
  if (!(hi > lo)) return 0.0;
  auto g = [&](double x) { return phi(x) * nu1(x); };
  const auto r = pv_integral(g, lo, hi, w, breaks, quad::Tolerance{1e-11, 0.0, 20'000'000});
  error += r.error_estimate;
  return r.value;
}

// int phi(x) nu1(x) / (x^2 - w^2 - i sgn(w) 0) dx over [lo, hi].
template <class Phi>
AxisResponse axis_response(const Phi& phi, const SpectralFunction& nu1, double w, double lo, double hi,
                           std::span<const double> phi_breaks, double grid_tol) {
  if (w == 0.0 || !std::isfinite(w)) throw std::invalid_argument("axis response: frequency must be nonzero");
  const double a = std::abs(w);
  const auto breaks = merged_breaks(phi_breaks, nu1.grid());
  double error = 0.0;
  const double re = axis_pv(phi, nu1, a, lo, hi, breaks, error);
  const double delta = (a >= lo && a <= hi) ? std::numbers::pi / (2.0 * a) * phi(a) * nu1(a) : 0.0;
  AxisResponse out{{re, w > 0.0 ? delta : -delta}, error};
  if (grid_tol > 0.0 && nu1.size() >= 5) {
    const SpectralFunction coarse = nu1.decimated(2);
    const auto coarse_breaks = merged_breaks(phi_breaks, coarse.grid());
    double ignored = 0.0;
    const double re_coarse = axis_pv(phi, coarse, a, lo, hi, coarse_breaks, ignored);
    const double richardson = nu1.interpolation() == Interpolation::log_cubic ? 15.0 : 3.0;
    out.error_estimate += std::abs(re - re_coarse) / richardson;
    if (out.error_estimate > grid_tol * std::abs(out.value) && out.error_estimate > 1e-300) {
      throw Error(ErrorKind::grid_too_coarse, "axis response error " + std::to_string(out.error_estimate) +
                                                  " exceeds tolerance at frequency " + std::to_string(w));
    }
  }
  return out;
}

inline double factor_lower(const AxisFactor& f) {
  const auto* s = f.spectral();
  return s && s->extrapolation() == Extrapolation::zero ? s->lower() : 0.0;
}

inline double factor_upper(const AxisFactor& f) {
  const auto* s = f.spectral();
  return s && s->extrapolation() == Extrapolation::zero ? s->upper() : std::numeric_limits<double>::infinity();
}

inline std::vector<double> factor_breaks(const AxisFactor& f) {
  if (const auto* s = f.spectral()) return {s->grid().begin(), s->grid().end()};
  return {};
}

// Log-linear hat function centred on node i of grid g.
struct Hat {
  std::span<const double> g;
  std::size_t i;
  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (i > 0 && x >= g[i - 1] && x <= g[i]) return std::log(x / g[i - 1]) / std::log(g[i] / g[i - 1]);
    if (i + 1 < g.size() && x >= g[i] && x <= g[i + 1]) return std::log(g[i + 1] / x) / std::log(g[i + 1] / g[i]);
    return 0.0;
  }
  double lower() const { return i > 0 ? g[i - 1] : g[i]; }
  double upper() const { return i + 1 < g.size() ? g[i + 1] : g[i]; }
};

// sum over the tensor grid of samples * prod_k per_axis[k][i_k].
template <class T>
T contract(const NonlinearKernel& kernel, const std::vector<std::vector<T>>& per_axis) {
  const std::size_t n = kernel.order();
  const auto& samples = kernel.samples();
  std::vector<std::size_t> idx(n, 0);
  T total{};
  for (std::size_t flat = 0; flat < samples.size(); ++flat) {
    std::size_t rest = flat;
    for (std::size_t k = n; k-- > 0;) {
      idx[k] = rest % kernel.axes()[k].size();
      rest /= kernel.axes()[k].size();
    }
    if (samples[flat] == 0.0) continue;
    T term = T(samples[flat]);
    for (std::size_t k = 0; k < n && term != T{}; ++k) term *= per_axis[k][idx[k]];
    total += term;
  }
  return total;
}

// chi^(n) at signed frequencies.
inline std::complex<double> chi_n_signed(const NonlinearKernel& nu_n, const SpectralFunction& nu1,
                                         std::span<const double> w, double grid_tol) {
  const std::size_t n = nu_n.order();
  if (w.size() != n) throw std::invalid_argument("chi_n: kernel order does not match the frequency count");
  if (nu_n.is_zero()) return {};
  if (nu_n.is_separable()) {
    std::complex<double> v = nu_n.gain();
    for (std::size_t k = 0; k < n; ++k) {
      const AxisFactor& f = nu_n.factors()[k];
      const auto breaks = factor_breaks(f);
      v *= axis_response(f, nu1, w[k], factor_lower(f), factor_upper(f), breaks, grid_tol).value;
    }
    return v;
  }
  std::vector<std::vector<std::complex<double>>> per_axis(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& g = nu_n.axes()[k];
    per_axis[k].resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Hat hat{g, i};
      const double mid[] = {g[i]};
      per_axis[k][i] = axis_response(hat, nu1, w[k], hat.lower(), hat.upper(), mid, grid_tol).value;
    }
  }
  return contract(nu_n, per_axis);
}

}  // namespace detail

/// chi^(n)(w_1..w_n) = int nu^(n)(x) prod_k nu1(x_k) / (x_k^2 - w_k^2 - i0) dx
/// with every axis split into principal value plus i pi delta. GridTooCoarse
/// is raised when the nu1 grid error on any axis exceeds `grid_tol`
/// (relative); `grid_tol` = 0 disables the check.
inline std::complex<double> chi_n_from_couplings(const NonlinearKernel& nu_n, const SpectralFunction& nu1,
                                                 std::span<const double> w, double grid_tol = 0.0) {
  for (double x : w)
    if (!(x > 0.0)) throw std::invalid_argument("chi_n_from_couplings: frequencies must be > 0");
  return detail::chi_n_signed(nu_n, nu1, w, grid_tol);
}

/// Second-order susceptibility.
inline std::complex<double> chi2(const NonlinearKernel& nu_2, const SpectralFunction& nu1, double w1, double w2,
                                 double grid_tol = 0.0) {
  if (nu_2.order() != 2) throw std::invalid_argument("chi2: kernel order must be 2");
  const double w[] = {w1, w2};
  return chi_n_from_couplings(nu_2, nu1, w, grid_tol);
}

/// chi^(n) as a susceptibility kernel (evaluated on demand).
inline SusceptibilityKernel chi_kernel_from_couplings(NonlinearKernel nu_n, SpectralFunction nu1,
                                                      double grid_tol = 0.0) {
  const std::size_t n = nu_n.order();
  return SusceptibilityKernel::from_function(
      SusceptibilityKernel::Kind::chi, n,
      [nu_n = std::move(nu_n), nu1 = std::move(nu1), grid_tol](std::span<const double> w) {
        return detail::chi_n_signed(nu_n, nu1, w, grid_tol);
      });
}

/// chi^(n)(t_1..t_n) = int nu^(n) prod_k nu1(w_k) sin(w_k t_k)/w_k dw;
/// exactly 0 if any t_k <= 0.
inline double chi_n_time_domain(const NonlinearKernel& nu_n, const SpectralFunction& nu1,
                                std::span<const double> t) {
  const std::size_t n = nu_n.order();
  if (t.size() != n) throw std::invalid_argument("chi_n_time_domain: kernel order does not match the time count");
  for (double x : t)
    if (!(x > 0.0)) return 0.0;
  if (nu_n.is_zero()) return 0.0;
  const auto [slo, shi] = detail::coupling_support(nu1);
  const double top = std::isfinite(shi) ? shi : nu1.upper();

  auto axis_sine = [&](const auto& phi, double lo, double hi, std::span<const double> breaks, double tk) {
    lo = std::max(lo, slo);
    hi = std::min(hi, top);
    if (!(hi > lo)) return 0.0;
    const auto nodes = detail::merged_breaks(breaks, nu1.grid());
    return detail::sine_transform([&](double x) { return phi(x) * nu1(x); }, lo, hi, nodes, tk);
  };

  if (nu_n.is_separable()) {
    double v = nu_n.gain();
    for (std::size_t k = 0; k < n; ++k) {
      const AxisFactor& f = nu_n.factors()[k];
      v *= axis_sine(f, detail::factor_lower(f), detail::factor_upper(f), detail::factor_breaks(f), t[k]);
    }
    return v;
  }
  std::vector<std::vector<double>> per_axis(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& g = nu_n.axes()[k];
    per_axis[k].resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const detail::Hat hat{g, i};
      const double mid[] = {g[i]};
      per_axis[k][i] = axis_sine(hat, hat.lower(), hat.upper(), mid, t[k]);
    }
  }
  return detail::contract(nu_n, per_axis);
}

/// Multidimensional sine transform of chi^(n)(t):
/// sum over sign patterns s of (prod s_k) chi(s w) / (2i)^n.
inline double im_chi_n(const SusceptibilityKernel& chi_n, std::span<const double> w) {
  if (chi_n.kind() != SusceptibilityKernel::Kind::chi)
    throw std::invalid_argument("im_chi_n: kernel must hold chi^(n), not Im chi^(n)");
  const std::size_t n = chi_n.order();
  if (w.size() != n) throw std::invalid_argument("im_chi_n: kernel order does not match the frequency count");
  std::vector<double> signed_w(n);
  std::complex<double> total{};
  for (std::size_t pattern = 0; pattern < (std::size_t{1} << n); ++pattern) {
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool neg = (pattern >> k) & 1U;
      signed_w[k] = neg ? -w[k] : w[k];
      if (neg) sign = -sign;
    }
    total += sign * chi_n(signed_w);
  }
  return (total / std::pow(std::complex<double>(0.0, 2.0), static_cast<double>(n))).real();
}

/// nu^(n) = sqrt(w_1..w_n) Im chi^(n) / ((2 pi)^(n/2) sqrt(prod Im chi1(w_k))).
/// DivisionBySpectrum when Im chi1(w_k) <= tolerance * max|Im chi1|.
inline double coupling_n_from_chi(const SusceptibilityKernel& im_chi_n_kernel, const SpectralFunction& im_chi1,
                                  std::span<const double> w, double tolerance = 1e-10) {
  if (im_chi_n_kernel.kind() != SusceptibilityKernel::Kind::im_chi)
    throw std::invalid_argument("coupling_n_from_chi: kernel must hold Im chi^(n)");
  const std::size_t n = im_chi_n_kernel.order();
  if (w.size() != n) throw std::invalid_argument("coupling_n_from_chi: kernel order does not match the frequency count");
  const double floor = tolerance * im_chi1.max_abs();
  double prod_w = 1.0;
  double prod_chi = 1.0;
  for (double x : w) {
    if (!(x > 0.0)) throw std::invalid_argument("coupling_n_from_chi: frequencies must be > 0");
    const double c = im_chi1(x);
    if (!(c > floor) || !(c > 0.0)) {
      throw Error(ErrorKind::division_by_spectrum,
                  "Im chi1 = " + std::to_string(c) + " vanishes at frequency " + std::to_string(x) +
                      " (transparent window)");
    }
    prod_w *= x;
    prod_chi *= c;
  }
  const double num = im_chi_n_kernel(w).real();
  if (num == 0.0) return 0.0;
  return std::sqrt(prod_w) * num /
         (std::pow(2.0 * std::numbers::pi, static_cast<double>(n) / 2.0) * std::sqrt(prod_chi));
}

}  // namespace casimir
