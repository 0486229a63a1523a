#pragma once

// Nonlinear corrections Delta^(n)(i xi) to the permittivity.
//
// With w = i xi and every internal frequency rotated to the imaginary axis,
//   Delta^(n)(i xi) = (2 pi)^-(n-1) int dw_1..dw_n dxi'_2..dxi'_n nu_n(w)^2
//                     / ((w_1^2 + (xi - sum xi')^2) prod_k (w_k^2 + xi'_k^2)),
// with every variable on [0, inf). The integrand is a ratio of squares over
// positive denominators, so Delta is real and non-negative.
//
// For separable kernels the w integrals collapse to
//   A_k(a) = int f_k(w)^2 / (w^2 + a^2) dw,
// leaving an (n-1)-fold convolution over xi'.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "casimir/coupling.hpp"
#include "casimir/errors.hpp"
#include "casimir/parallel.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/spectral.hpp"

namespace casimir {

enum class DeltaMethod { deterministic, montecarlo };

struct DeltaOptions {
  double rel_tol = 1e-6;
  std::size_t max_evaluations = 50'000'000;
  DeltaMethod method = DeltaMethod::deterministic;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  bool allow_unconverged = false;  // return Monte Carlo estimates above rel_tol instead of throwing
  bool paper_literal = false;      // asymmetric third-order denominators
};

struct NonlinearCorrection {
  std::size_t order = 0;
  std::complex<double> value;  // real on the imaginary axis
  double frequency = 0.0;      // xi on the imaginary axis, w on the real axis
  bool imaginary_axis = true;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;

  double real() const { return value.real(); }
};

namespace detail {

// A_k(a) for one separable factor.
inline quad::IntegralEstimate absorption_transform(const AxisFactor& f, double a, double rel) {
  auto g = [&](double w) {
    const double v = f(w);
    return v * v / (w * w + a * a);
  };
  auto axis = f.axis();
  if (a > 0.0 && axis.kind == quad::Axis::Kind::semi_infinite) axis.breakpoints.push_back(a);
  std::sort(axis.breakpoints.begin(), axis.breakpoints.end());
  return quad::integrate_1d(g, axis, quad::Tolerance{rel, 0.0, 5'000'000});
}

// int f(w)^2 (pi / 2w) / (w^2 + a^2) dw: the A transform after the
// literal third-order xi'_3 integral.
inline quad::IntegralEstimate literal_transform(const AxisFactor& f, double a, double rel) {
  auto g = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double v = f(w);
    return v * v * std::numbers::pi / (2.0 * w) / (w * w + a * a);
  };
  auto axis = f.axis();
  if (a > 0.0 && axis.kind == quad::Axis::Kind::semi_infinite) axis.breakpoints.push_back(a);
  std::sort(axis.breakpoints.begin(), axis.breakpoints.end());
  return quad::integrate_1d(g, axis, quad::Tolerance{rel, 0.0, 5'000'000});
}

inline double xi_scale(const NonlinearKernel& k, double xi) {
  double s = xi;
  for (std::size_t i = 0; i < k.order(); ++i) s = std::max(s, k.axis_scale(i));
  return s > 0.0 ? s : 1.0;
}

inline void require_converged(const NonlinearCorrection& c, double rel_tol) {
  if (!c.converged) {
    throw Error(ErrorKind::quadrature_failure,
                "Delta^(" + std::to_string(c.order) + ") at xi = " + std::to_string(c.frequency) +
                    " did not reach rel_tol " + std::to_string(rel_tol) + " (error estimate " +
                    std::to_string(c.error_estimate) + ")");
  }
}

inline void require_order(const NonlinearKernel& k, std::size_t n, const char* what) {
  if (k.order() != n) throw std::invalid_argument(std::string(what) + ": kernel order mismatch");
}

inline void require_xi(double xi) {
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw std::invalid_argument("Delta: xi must be finite and >= 0");
}

// Generic (2n-1)-fold integrand; axes are w_1..w_n then xi'_2..xi'_n.
inline double delta_integrand(const NonlinearKernel& k, double xi, std::span<const double> x) {
  const std::size_t n = k.order();
  const double nu = k(x.first(n));
  if (nu == 0.0) return 0.0;
  double shifted = xi;
  double denom = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    const double xp = x[n + j - 1];
    shifted -= xp;
    denom *= x[j] * x[j] + xp * xp;
  }
  denom *= x[0] * x[0] + shifted * shifted;
  return nu * nu / denom;
}

inline std::vector<quad::Axis> delta_axes(const NonlinearKernel& k, double xi) {
  std::vector<quad::Axis> axes;
  for (std::size_t i = 0; i < k.order(); ++i) axes.push_back(k.axis(i));
  const double s = xi_scale(k, xi);
  for (std::size_t j = 1; j < k.order(); ++j)
    axes.push_back(quad::Axis::semi_infinite(0.0, s, xi > 0.0 ? std::vector<double>{xi} : std::vector<double>{}));
  return axes;
}

inline NonlinearCorrection delta_generic(const NonlinearKernel& k, double xi, const DeltaOptions& opt, bool mc) {
  const std::size_t n = k.order();
  NonlinearCorrection out{n, 0.0, xi, true, 0.0, 0, true};
  if (k.is_zero()) return out;
  quad::IntegrationSpec spec;
  spec.axes = delta_axes(k, xi);
  spec.rel_tol = opt.rel_tol;
  spec.abs_tol = 0.0;
  spec.seed = opt.seed;
  auto f = [&](std::span<const double> x) { return delta_integrand(k, xi, x); };
  quad::IntegralEstimate est;
  if (mc) {
    spec.max_evaluations = opt.mc_samples;
    est = quad::integrate_mc(f, spec);
  } else {
    spec.max_evaluations = opt.max_evaluations;
    est = quad::integrate_nd(f, spec);
  }
  const double pre = std::pow(2.0 * std::numbers::pi, -static_cast<double>(n - 1));
  out.value = pre * est.value;
  out.error_estimate = pre * est.error_estimate;
  out.evaluations = est.evaluations;
  out.converged = est.converged;
  return out;
}

}  // namespace detail

/// Delta^(2)(i xi).
inline NonlinearCorrection delta_nl2_imag_axis(const NonlinearKernel& nu2, double xi, const DeltaOptions& opt = {}) {
  detail::require_order(nu2, 2, "delta_nl2_imag_axis");
  detail::require_xi(xi);
  NonlinearCorrection out{2, 0.0, xi, true, 0.0, 0, true};
  if (nu2.is_zero()) return out;
  if (!nu2.is_separable()) {
    out = detail::delta_generic(nu2, xi, opt, false);
    detail::require_converged(out, opt.rel_tol);
    return out;
  }
  const auto& f1 = nu2.factors()[0];
  const auto& f2 = nu2.factors()[1];
  const double inner_rel = opt.rel_tol * 0.1;
  std::size_t evaluations = 0;
  auto integrand = [&](double xp) {
    const auto a1 = detail::absorption_transform(f1, xi - xp, inner_rel);
    const auto a2 = detail::absorption_transform(f2, xp, inner_rel);
    evaluations += a1.evaluations + a2.evaluations;
    return quad::Sample{a1.value * a2.value, a1.error_estimate * a2.value + a2.error_estimate * a1.value};
  };
  const auto axis = quad::Axis::semi_infinite(0.0, detail::xi_scale(nu2, xi),
                                              xi > 0.0 ? std::vector<double>{xi} : std::vector<double>{});
  const auto est = quad::integrate_1d(integrand, axis, quad::Tolerance{opt.rel_tol, 0.0, opt.max_evaluations});
  const double pre = nu2.gain() * nu2.gain() / (2.0 * std::numbers::pi);
  out.value = pre * est.value;
  out.error_estimate = pre * est.error_estimate;
  out.evaluations = evaluations;
  out.converged = est.converged;
  detail::require_converged(out, opt.rel_tol);
  return out;
}

/// Delta^(3)(i xi). The first denominator carries xi - xi'_2 - xi'_3 and the
/// third pairs w_3 with xi'_3; `paper_literal` switches to xi - xi'_2 and
/// w_2 with xi'_3.
inline NonlinearCorrection delta_nl3_imag_axis(const NonlinearKernel& nu3, double xi, const DeltaOptions& opt = {}) {
  detail::require_order(nu3, 3, "delta_nl3_imag_axis");
  detail::require_xi(xi);
  NonlinearCorrection out{3, 0.0, xi, true, 0.0, 0, true};
  if (nu3.is_zero()) return out;
  const double pre_g = nu3.is_separable() ? nu3.gain() * nu3.gain() : 1.0;
  const double pre = pre_g / (4.0 * std::numbers::pi * std::numbers::pi);
  const double inner_rel = opt.rel_tol * 0.1;
  std::size_t evaluations = 0;

  if (opt.paper_literal) {
    if (!nu3.is_separable())
      throw Error(ErrorKind::order_unsupported, "the literal third-order form is implemented for separable kernels");
    const auto& f = nu3.factors();
    const auto m3 = quad::integrate_1d([&](double w) { return f[2](w) * f[2](w); }, f[2].axis(),
                                       quad::Tolerance{inner_rel, 0.0, 5'000'000});
    auto integrand = [&](double xp) {
      const auto a1 = detail::absorption_transform(f[0], xi - xp, inner_rel);
      const auto b2 = detail::literal_transform(f[1], xp, inner_rel);
      evaluations += a1.evaluations + b2.evaluations;
      return quad::Sample{a1.value * b2.value, a1.error_estimate * b2.value + b2.error_estimate * a1.value};
    };
    const auto axis = quad::Axis::semi_infinite(0.0, detail::xi_scale(nu3, xi),
                                                xi > 0.0 ? std::vector<double>{xi} : std::vector<double>{});
    const auto est = quad::integrate_1d(integrand, axis, quad::Tolerance{opt.rel_tol, 0.0, opt.max_evaluations});
    out.value = pre * m3.value * est.value;
    out.error_estimate = pre * (m3.value * est.error_estimate + m3.error_estimate * std::abs(est.value));
    out.evaluations = evaluations + m3.evaluations;
    out.converged = est.converged && m3.converged;
    detail::require_converged(out, opt.rel_tol);
    return out;
  }

  if (!nu3.is_separable()) {
    out = detail::delta_generic(nu3, xi, opt, false);
    detail::require_converged(out, opt.rel_tol);
    return out;
  }
  const auto& f = nu3.factors();
  const double s = detail::xi_scale(nu3, xi);
  // Inner convolution C(b) = int A_1(b - x) A_3(x) dx, outer int A_2(y) C(xi - y) dy.
  auto inner = [&](double b) {
    auto g = [&](double x) {
      const auto a1 = detail::absorption_transform(f[0], b - x, inner_rel * 0.1);
      const auto a3 = detail::absorption_transform(f[2], x, inner_rel * 0.1);
      evaluations += a1.evaluations + a3.evaluations;
      return quad::Sample{a1.value * a3.value, a1.error_estimate * a3.value + a3.error_estimate * a1.value};
    };
    const auto axis =
        quad::Axis::semi_infinite(0.0, s, b > 0.0 ? std::vector<double>{b} : std::vector<double>{});
    return quad::integrate_1d(g, axis, quad::Tolerance{inner_rel, 0.0, opt.max_evaluations});
  };
  bool inner_converged = true;
  auto outer = [&](double y) {
    const auto a2 = detail::absorption_transform(f[1], y, inner_rel);
    const auto c = inner(xi - y);
    inner_converged = inner_converged && c.converged;
    evaluations += a2.evaluations;
    return quad::Sample{a2.value * c.value, a2.error_estimate * c.value + c.error_estimate * a2.value};
  };
  const auto axis = quad::Axis::semi_infinite(0.0, s, xi > 0.0 ? std::vector<double>{xi} : std::vector<double>{});
  const auto est = quad::integrate_1d(outer, axis, quad::Tolerance{opt.rel_tol, 0.0, opt.max_evaluations});
  out.value = pre * est.value;
  out.error_estimate = pre * est.error_estimate;
  out.evaluations = evaluations;
  out.converged = est.converged && inner_converged;
  detail::require_converged(out, opt.rel_tol);
  return out;
}

/// Delta^(n)(i xi) for any n >= 2. Deterministic evaluation dispatches to
/// the second- and third-order routines; Monte Carlo integrates the full
/// (2n-1)-fold integrand.
inline NonlinearCorrection delta_nl_n_imag_axis(const NonlinearKernel& nu_n, double xi, const DeltaOptions& opt = {}) {
  const std::size_t n = nu_n.order();
  if (n < 2) throw std::invalid_argument("delta_nl_n_imag_axis: order must be >= 2");
  detail::require_xi(xi);
  if (opt.method == DeltaMethod::deterministic) {
    if (n == 2) return delta_nl2_imag_axis(nu_n, xi, opt);
    if (n == 3) return delta_nl3_imag_axis(nu_n, xi, opt);
    throw Error(ErrorKind::order_unsupported,
                "deterministic quadrature supports orders 2 and 3; order " + std::to_string(n) +
                    " requires the Monte Carlo method");
  }
  NonlinearCorrection out = detail::delta_generic(nu_n, xi, opt, true);
  if (!opt.allow_unconverged) detail::require_converged(out, opt.rel_tol);
  return out;
}

struct ImChiDeltaOptions {
  double rel_tol = 1e-6;
  std::size_t max_evaluations = 20'000'000;
  double upper = 0.0;               // integration cutoff per axis; 0 uses the Im chi1 grid
  std::vector<double> breakpoints;  // frequencies where the integrand has structure
  double tolerance = 1e-10;         // relative floor on |Im chi1| below which division is refused
};

/// Real-axis Delta^(n)(w) from susceptibilities:
///   (2 pi i / (8 pi)^n) int dw_2..dw_n (Im chi_n(w - sum, w_2, ..))^2
///                        / (Im chi1(w - sum) prod_k Im chi1(w_k)),
/// with Im chi1 extended oddly to negative frequency. Purely imaginary.
inline NonlinearCorrection delta_from_im_chi(const SusceptibilityKernel& im_chi_n_kernel,
                                             const SpectralFunction& im_chi1, double w,
                                             const ImChiDeltaOptions& opt = {}) {
  if (im_chi_n_kernel.kind() != SusceptibilityKernel::Kind::im_chi)
    throw std::invalid_argument("delta_from_im_chi: kernel must hold Im chi^(n)");
  const std::size_t n = im_chi_n_kernel.order();
  if (n < 2) throw std::invalid_argument("delta_from_im_chi: order must be >= 2");
  if (!(w > 0.0)) throw std::invalid_argument("delta_from_im_chi: frequency must be > 0");
  NonlinearCorrection out{n, 0.0, w, false, 0.0, 0, true};
  const double floor = opt.tolerance * im_chi1.max_abs();
  auto chi1 = [&](double x) { return x < 0.0 ? -im_chi1(-x) : im_chi1(x); };
  std::vector<double> args(n);
  auto f = [&](std::span<const double> x) {
    double first = w;
    for (std::size_t j = 1; j < n; ++j) {
      args[j] = x[j - 1];
      first -= x[j - 1];
    }
    args[0] = first;
    const double num = im_chi_n_kernel(args).real();
    if (num == 0.0) return 0.0;
    double denom = 1.0;
    for (double a : args) {
      const double c = chi1(a);
      if (std::abs(c) <= floor) {
        throw Error(ErrorKind::division_by_spectrum,
                    "Im chi1 vanishes at frequency " + std::to_string(a) + " where Im chi^(" +
                        std::to_string(n) + ") does not");
      }
      denom *= c;
    }
    return num * num / denom;
  };
  const double upper = opt.upper > 0.0 ? opt.upper : im_chi1.upper();
  std::vector<double> breaks;
  for (double b : opt.breakpoints) {
    if (b > 0.0 && b < upper) breaks.push_back(b);
    if (w - b > 0.0 && w - b < upper) breaks.push_back(w - b);
  }
  if (w < upper) breaks.push_back(w);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  quad::IntegrationSpec spec;
  for (std::size_t j = 1; j < n; ++j) spec.axes.push_back(quad::Axis::finite(0.0, upper, breaks));
  spec.rel_tol = opt.rel_tol;
  spec.max_evaluations = opt.max_evaluations;
  const auto est = quad::integrate_nd(f, spec);
  const double pre = 2.0 * std::numbers::pi / std::pow(8.0 * std::numbers::pi, static_cast<double>(n));
  out.value = {0.0, pre * est.value};
  out.error_estimate = pre * est.error_estimate;
  out.evaluations = est.evaluations;
  out.converged = est.converged;
  if (!out.converged) {
    throw Error(ErrorKind::quadrature_failure,
                "susceptibility-path Delta at w = " + std::to_string(w) + " did not converge");
  }
  return out;
}

/// Sum over orders of Delta^(n)(i xi), tabulated for the force integrals.
///
/// Chebyshev tables hold Lobatto nodes in u = xi / (xi + scale) on [0, 1]
/// (the node u = 1, xi = inf, is pinned to 0) and interpolate
/// barycentrically. Sampled tables interpolate linearly in xi with a
/// power-law tail beyond the last sample.
class DeltaTable {
 public:
  enum class Interpolation { chebyshev_lobatto, piecewise_linear };

  DeltaTable() = default;

  /// `values[j][i]` is Delta of order `orders[j]` at `xi[i]`.
  DeltaTable(std::vector<double> xi, std::vector<std::size_t> orders, std::vector<std::vector<double>> values,
             std::vector<double> error, Interpolation interpolation = Interpolation::piecewise_linear,
             double scale = 1.0)
      : xi_(std::move(xi)),
        orders_(std::move(orders)),
        values_(std::move(values)),
        error_(std::move(error)),
        interpolation_(interpolation),
        scale_(scale) {
    if (values_.size() != orders_.size()) throw std::invalid_argument("DeltaTable: one value column per order");
    if (error_.empty()) error_.assign(xi_.size(), 0.0);
    if (error_.size() != xi_.size()) throw std::invalid_argument("DeltaTable: error column length mismatch");
    for (std::size_t i = 0; i < xi_.size(); ++i) {
      if (!(xi_[i] >= 0.0) || !std::isfinite(xi_[i]) || (i > 0 && !(xi_[i] > xi_[i - 1])))
        throw std::invalid_argument("DeltaTable: xi must be finite, >= 0 and strictly increasing");
    }
    sum_.assign(xi_.size(), 0.0);
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (values_[j].size() != xi_.size()) throw std::invalid_argument("DeltaTable: column length mismatch");
      for (std::size_t i = 0; i < xi_.size(); ++i) {
        const double v = values_[j][i];
        if (!std::isfinite(v)) throw std::invalid_argument("DeltaTable: non-finite value");
        if (v < 0.0) {
          throw Error(ErrorKind::negative_delta, "Delta^(" + std::to_string(orders_[j]) + ")(i xi) = " +
                                                     std::to_string(v) + " < 0 at xi = " + std::to_string(xi_[i]));
        }
        sum_[i] += v;
      }
    }
    if (interpolation_ == Interpolation::chebyshev_lobatto) {
      if (!(scale_ > 0.0)) throw std::invalid_argument("DeltaTable: scale must be > 0");
      build_barycentric();
    } else if (xi_.empty()) {
      throw std::invalid_argument("DeltaTable: needs at least one sample");
    }
  }

  /// Lobatto node positions in xi for `nodes` points (the last, xi = inf,
  /// is omitted).
  static std::vector<double> chebyshev_nodes(std::size_t nodes, double scale) {
    if (nodes < 3) throw std::invalid_argument("DeltaTable: need at least 3 Chebyshev nodes");
    std::vector<double> xi(nodes - 1);
    for (std::size_t j = 0; j + 1 < nodes; ++j) {
      const double u = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(j) /
                                             static_cast<double>(nodes - 1)));
      xi[j] = scale * u / (1.0 - u);
    }
    return xi;
  }

  bool empty() const { return orders_.empty(); }
  const std::vector<double>& xi() const { return xi_; }
  const std::vector<std::size_t>& orders() const { return orders_; }
  const std::vector<std::vector<double>>& values() const { return values_; }
  const std::vector<double>& error() const { return error_; }
  const std::vector<double>& sum() const { return sum_; }
  Interpolation interpolation() const { return interpolation_; }
  double scale() const { return scale_; }

  /// Sum of all orders at xi; never negative.
  double operator()(double xi) const {
    if (orders_.empty() || !(xi >= 0.0)) return 0.0;
    if (interpolation_ == Interpolation::chebyshev_lobatto) return chebyshev(xi);
    return linear(xi);
  }

  void write_csv(std::ostream& os) const {
    if (interpolation_ == Interpolation::chebyshev_lobatto) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.16e", scale_);
      os << "# delta_interpolation: chebyshev_lobatto scale=" << buf << "\n";
    }
    os << "xi";
    for (auto o : orders_) os << ",delta_" << o;
    os << ",error\n";
    char buf[32];
    for (std::size_t i = 0; i < xi_.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.16e", xi_[i]);
      os << buf;
      for (const auto& col : values_) {
        std::snprintf(buf, sizeof buf, "%.16e", col[i]);
        os << ',' << buf;
      }
      std::snprintf(buf, sizeof buf, "%.16e", error_[i]);
      os << ',' << buf << '\n';
    }
  }

  /// Parses the CSV written by write_csv (or any table with the same
  /// header). Lines starting with '#' are metadata.
  static DeltaTable read_csv(std::istream& is, const std::string& source = "<stream>") {
    std::string line;
    std::vector<std::string> header;
    std::vector<double> xi;
    std::vector<std::size_t> orders;
    std::vector<std::vector<double>> values;
    std::vector<double> error;
    bool has_error = false;
    Interpolation interp = Interpolation::piecewise_linear;
    double scale = 1.0;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::config_error, source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto pos = line.find("delta_interpolation: chebyshev_lobatto");
        if (pos != std::string::npos) {
          interp = Interpolation::chebyshev_lobatto;
          const auto s = line.find("scale=");
          if (s == std::string::npos) fail("chebyshev table without scale");
          scale = std::stod(line.substr(s + 6));
        }
        continue;
      }
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (header.empty()) {
        header = cells;
        if (header.empty() || header[0] != "xi") fail("first column must be 'xi'");
        for (std::size_t c = 1; c < header.size(); ++c) {
          if (header[c] == "error") {
            if (c + 1 != header.size()) fail("'error' must be the last column");
            has_error = true;
          } else if (header[c].rfind("delta_", 0) == 0) {
            try {
              orders.push_back(static_cast<std::size_t>(std::stoul(header[c].substr(6))));
            } catch (const std::exception&) {
              fail("bad column name '" + header[c] + "'");
            }
          } else {
            fail("unknown column '" + header[c] + "'");
          }
        }
        values.assign(orders.size(), {});
        continue;
      }
      if (cells.size() != header.size()) fail("expected " + std::to_string(header.size()) + " fields");
      try {
        xi.push_back(std::stod(cells[0]));
        for (std::size_t j = 0; j < orders.size(); ++j) values[j].push_back(std::stod(cells[j + 1]));
        if (has_error) error.push_back(std::stod(cells.back()));
      } catch (const std::exception&) {
        fail("non-numeric field");
      }
    }
    if (header.empty()) fail("missing header");
    if (!has_error) error.assign(xi.size(), 0.0);
    return DeltaTable(std::move(xi), std::move(orders), std::move(values), std::move(error), interp, scale);
  }

  static DeltaTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config_error, "cannot open Delta table '" + path + "'");
    return read_csv(in, path);
  }

 private:
  void build_barycentric() {
    const std::size_t nodes = xi_.size() + 1;
    const auto expected = chebyshev_nodes(nodes, scale_);
    for (std::size_t j = 0; j < xi_.size(); ++j) {
      if (std::abs(expected[j] - xi_[j]) > 1e-12 * std::max(1.0, expected[j]))
        throw std::invalid_argument("DeltaTable: xi column does not match the Chebyshev nodes for this scale");
    }
    u_.resize(nodes);
    weights_.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
      u_[j] = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(nodes - 1)));
      weights_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j + 1 == nodes) ? 0.5 : 1.0);
    }
  }

  double chebyshev(double xi) const {
    if (std::isinf(xi)) return 0.0;
    const double u = xi / (xi + scale_);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < u_.size(); ++j) {
      const double f = j < sum_.size() ? sum_[j] : 0.0;
      const double d = u - u_[j];
      if (d == 0.0) return f;
      const double c = weights_[j] / d;
      num += c * f;
      den += c;
    }
    return std::max(0.0, num / den);
  }

  double linear(double xi) const {
    const std::size_t n = xi_.size();
    if (n == 1 || xi <= xi_.front()) return sum_.front();
    if (xi >= xi_.back()) {
      const double a = sum_[n - 2];
      const double b = sum_[n - 1];
      if (xi == xi_.back() || !(a > 0.0) || !(b > 0.0) || !(xi_[n - 2] > 0.0)) return xi == xi_.back() ? b : 0.0;
      const double p = std::log(b / a) / std::log(xi_[n - 1] / xi_[n - 2]);
      return b * std::pow(xi / xi_[n - 1], p);
    }
    const auto it = std::upper_bound(xi_.begin(), xi_.end(), xi);
    const std::size_t i = static_cast<std::size_t>(it - xi_.begin()) - 1;
    const double t = (xi - xi_[i]) / (xi_[i + 1] - xi_[i]);
    return (1.0 - t) * sum_[i] + t * sum_[i + 1];
  }

  std::vector<double> xi_;
  std::vector<std::size_t> orders_;
  std::vector<std::vector<double>> values_;
  std::vector<double> error_;
  Interpolation interpolation_ = Interpolation::piecewise_linear;
  double scale_ = 1.0;
  std::vector<double> sum_;
  std::vector<double> u_;
  std::vector<double> weights_;
};

/// Typical frequency of a set of kernels: the largest per-axis median.
inline double delta_scale(std::span<const NonlinearKernel> kernels) {
  double s = 0.0;
  for (const auto& k : kernels)
    for (std::size_t i = 0; i < k.order(); ++i) s = std::max(s, k.axis_scale(i));
  return s > 0.0 ? s : 1.0;
}

/// Evaluates every kernel on the Chebyshev nodes (in parallel over nodes)
/// and returns the cached table.
inline DeltaTable build_delta_table(std::span<const NonlinearKernel> kernels, const DeltaOptions& opt,
                                    std::size_t nodes = 33, double scale = 0.0, std::size_t jobs = 1) {
  if (scale <= 0.0) scale = delta_scale(kernels);
  const auto xi = DeltaTable::chebyshev_nodes(nodes, scale);
  std::vector<std::size_t> orders;
  for (const auto& k : kernels) orders.push_back(k.order());
  std::vector<std::vector<double>> values(kernels.size(), std::vector<double>(xi.size(), 0.0));
  std::vector<double> error(xi.size(), 0.0);
  std::vector<std::vector<double>> errors(kernels.size(), std::vector<double>(xi.size(), 0.0));
  parallel_for_index(xi.size() * kernels.size(), jobs, [&](std::size_t idx) {
    const std::size_t j = idx / xi.size();
    const std::size_t i = idx % xi.size();
    DeltaOptions o = opt;
    o.seed = opt.seed + idx;
    const auto r = delta_nl_n_imag_axis(kernels[j], xi[i], o);
    values[j][i] = r.real();
    errors[j][i] = r.error_estimate;
  });
  for (std::size_t i = 0; i < xi.size(); ++i)
    for (std::size_t j = 0; j < kernels.size(); ++j) error[i] += errors[j][i];
  return DeltaTable(xi, std::move(orders), std::move(values), std::move(error),
                    DeltaTable::Interpolation::chebyshev_lobatto, scale);
}

}  // namespace casimir
