#pragma once

// Adaptive Gauss-Kronrod quadrature on finite and semi-infinite axes, nested
// multidimensional quadrature and seeded stratified Monte Carlo.
//
// Semi-infinite axes [a, inf) use the rational map x = a + s u/(1-u), u in
// [0, 1). The scale s should sit near the knee of the integrand.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "casimir/errors.hpp"

namespace casimir::quad {

struct Axis {
  enum class Kind { finite, semi_infinite };

  Kind kind = Kind::finite;
  double lower = 0.0;
  double upper = 1.0;  // unused for semi-infinite axes
  double scale = 1.0;  // rational-map scale for semi-infinite axes
  std::vector<double> breakpoints;  // x-space points where the integrand has kinks

  static Axis finite(double a, double b, std::vector<double> breaks = {}) {
    return Axis{Kind::finite, a, b, 1.0, std::move(breaks)};
  }
  static Axis semi_infinite(double a, double scale, std::vector<double> breaks = {}) {
    return Axis{Kind::semi_infinite, a, std::numeric_limits<double>::infinity(),
                scale > 0.0 ? scale : 1.0, std::move(breaks)};
  }

  double u_lower() const { return kind == Kind::finite ? lower : 0.0; }
  double u_upper() const { return kind == Kind::finite ? upper : 1.0; }

  double x_of(double u) const {
    return kind == Kind::finite ? u : lower + scale * u / (1.0 - u);
  }
  double jacobian(double u) const {
    if (kind == Kind::finite) return 1.0;
    const double d = 1.0 - u;
    return scale / (d * d);
  }
  double u_of(double x) const {
    if (kind == Kind::finite) return x;
    const double t = x - lower;
    return t / (t + scale);
  }

  /// Initial partition of the u-interval: endpoints plus interior breakpoints.
  std::vector<double> edges() const {
    std::vector<double> e{u_lower(), u_upper()};
    for (double x : breakpoints) {
      const double u = u_of(x);
      if (std::isfinite(u) && u > u_lower() && u < u_upper()) e.push_back(u);
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a)); }),
            e.end());
    return e;
  }
};

struct Tolerance {
  double rel = 1e-10;
  double abs = 0.0;
  std::size_t max_evaluations = 2'000'000;
};

struct IntegrationSpec {
  std::vector<Axis> axes;
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  std::size_t max_evaluations = 5'000'000;
  std::uint64_t seed = 0;

  Tolerance tolerance() const { return {rel_tol, abs_tol, max_evaluations}; }
};

struct IntegralEstimate {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/// Integrand sample: `aux` is integrated with the same rule but does not
/// drive refinement. Nested integration uses it to carry inner error bounds.
struct Sample {
  double value = 0.0;
  double aux = 0.0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk{
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk{
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478532, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg{
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double aux = 0.0;
  double error = 0.0;
};

template <class T>
Sample as_sample(const T& s) {
  if constexpr (std::is_same_v<T, Sample>) {
    return s;
  } else {
    return Sample{static_cast<double>(s), 0.0};
  }
}

/// One GK21 panel. `g` takes the integration variable and returns a Sample
/// (or a double).
template <class G>
Segment gk21(G& g, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 21> fv{};
  double aux = 0.0;
  const Sample c = as_sample(g(center));
  fv[20] = c.value;
  double resk = kWgk[10] * c.value;
  aux += kWgk[10] * c.aux;
  double resg = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const Sample lo = as_sample(g(center - dx));
    const Sample hi = as_sample(g(center + dx));
    fv[2 * j] = lo.value;
    fv[2 * j + 1] = hi.value;
    resk += kWgk[j] * (lo.value + hi.value);
    aux += kWgk[j] * (lo.aux + hi.aux);
    if (j % 2 == 1) resg += kWg[j / 2] * (lo.value + hi.value);
  }
  const double mean = 0.5 * resk;
  double resabs = kWgk[10] * std::abs(fv[20]);
  double resasc = kWgk[10] * std::abs(fv[20] - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    resabs += kWgk[j] * (std::abs(fv[2 * j]) + std::abs(fv[2 * j + 1]));
    resasc += kWgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
  }
  const double ah = std::abs(half);
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  if (!std::isfinite(resk)) err = std::numeric_limits<double>::infinity();
  return Segment{a, b, resk * half, aux * half, err};
}

struct AdaptiveResult {
  double value = 0.0;
  double aux = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/// Globally adaptive bisection over the initial partition `edges`. The
/// evaluation budget is shared through `budget` so nested integrals stop
/// refining together once it is spent.
template <class G>
AdaptiveResult adaptive(G& g, const std::vector<double>& edges, double rel, double abs,
                        std::size_t& budget) {
  constexpr std::size_t kPanelCost = 21;
  auto by_error = [](const Segment& x, const Segment& y) { return x.error < y.error; };

  AdaptiveResult out;
  std::vector<Segment> heap;
  heap.reserve(64);
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    heap.push_back(gk21(g, edges[i], edges[i + 1]));
    out.evaluations += kPanelCost;
    budget = budget > kPanelCost ? budget - kPanelCost : 0;
    total += heap.back().value;
    total_err += heap.back().error;
  }
  std::make_heap(heap.begin(), heap.end(), by_error);

  while (total_err > std::max(abs, rel * std::abs(total))) {
    if (budget < 2 * kPanelCost || !std::isfinite(total_err)) {
      out.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        std::abs(worst.b - worst.a) < 1e-15 * std::max(1.0, std::abs(mid))) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_error);
      out.converged = false;
      break;
    }
    const Segment left = gk21(g, worst.a, mid);
    const Segment right = gk21(g, mid, worst.b);
    out.evaluations += 2 * kPanelCost;
    budget -= 2 * kPanelCost;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
  }

  // Re-sum in a fixed order so the result does not depend on heap history.
  std::sort(heap.begin(), heap.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  out.value = 0.0;
  out.aux = 0.0;
  out.error = 0.0;
  for (const auto& s : heap) {
    out.value += s.value;
    out.aux += s.aux;
    out.error += s.error;
  }
  if (out.converged) out.converged = out.error <= std::max(abs, rel * std::abs(out.value));
  return out;
}

}  // namespace detail

/// Adaptive GK21 integration of `f(x)` over one axis. `f` may return a
/// `Sample`; its aux channel is reported as an additional error term.
template <class F>
IntegralEstimate integrate_1d(F&& f, const Axis& axis, const Tolerance& tol = {}) {
  auto g = [&](double u) {
    const Sample s = detail::as_sample(f(axis.x_of(u)));
    const double j = axis.jacobian(u);
    return Sample{s.value * j, s.aux * j};
  };
  std::size_t budget = tol.max_evaluations;
  const auto r = detail::adaptive(g, axis.edges(), tol.rel, tol.abs, budget);
  return IntegralEstimate{r.value, r.error + std::abs(r.aux), r.evaluations, r.converged};
}

template <class F>
IntegralEstimate integrate_1d(F&& f, const IntegrationSpec& spec) {
  if (spec.axes.size() != 1) throw std::invalid_argument("integrate_1d: spec must have exactly one axis");
  return integrate_1d(std::forward<F>(f), spec.axes.front(), spec.tolerance());
}

template <class F>
IntegralEstimate integrate_1d(F&& f, double a, double b, const Tolerance& tol = {}) {
  return integrate_1d(std::forward<F>(f), Axis::finite(a, b), tol);
}

inline constexpr std::size_t kMaxDeterministicDimension = 5;

namespace detail {

template <class F>
struct Nested {
  F& f;
  const std::vector<Axis>& axes;
  std::vector<std::vector<double>> edges;
  double rel;
  double abs;
  std::vector<double> point;
  std::size_t budget;
  std::size_t evaluations = 0;
  bool converged = true;

  AdaptiveResult level(std::size_t d) {
    const Axis& axis = axes[d];
    const bool innermost = d + 1 == axes.size();
    auto g = [&](double u) -> Sample {
      point[d] = axis.x_of(u);
      const double j = axis.jacobian(u);
      if (innermost) {
        ++evaluations;
        return Sample{f(std::span<const double>(point)) * j, 0.0};
      }
      const AdaptiveResult inner = level(d + 1);
      return Sample{inner.value * j, (inner.error + std::abs(inner.aux)) * j};
    };
    // Inner levels run one decade tighter than the level enclosing them.
    const double level_rel = rel * std::pow(0.1, static_cast<double>(d));
    AdaptiveResult r = adaptive(g, edges[d], level_rel, d == 0 ? abs : 0.0, budget);
    if (!r.converged) converged = false;
    return r;
  }
};

}  // namespace detail

/// Nested adaptive quadrature; the last axis is innermost. `f` receives the
/// point as a span of x-coordinates in axis order.
template <class F>
IntegralEstimate integrate_nd(F&& f, const IntegrationSpec& spec) {
  const std::size_t d = spec.axes.size();
  if (d == 0) throw std::invalid_argument("integrate_nd: no axes");
  if (d > kMaxDeterministicDimension) {
    throw Error(ErrorKind::dimension_too_high,
                "deterministic quadrature supports at most 5 axes, got " + std::to_string(d));
  }
  detail::Nested<std::remove_reference_t<F>> nested{f, spec.axes, {}, spec.rel_tol, spec.abs_tol,
                                                     std::vector<double>(d, 0.0), spec.max_evaluations};
  for (const auto& axis : spec.axes) nested.edges.push_back(axis.edges());
  const auto r = nested.level(0);
  IntegralEstimate est{r.value, r.error + std::abs(r.aux), nested.evaluations, nested.converged};
  est.converged = est.converged && est.error_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::abs(est.value));
  return est;
}

/// Uniform double in [0, 1) built from the top 53 bits; identical on every
/// platform for a given engine state.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Stratified Monte Carlo over the mapped unit cube. Uses exactly
/// `spec.max_evaluations` samples; the standard error is the error estimate.
template <class F>
IntegralEstimate integrate_mc(F&& f, const IntegrationSpec& spec) {
  const std::size_t d = spec.axes.size();
  if (d == 0) throw std::invalid_argument("integrate_mc: no axes");
  const std::size_t n = std::max<std::size_t>(spec.max_evaluations, 2);

  // k strata per axis with at least two samples in every stratum.
  std::size_t k = 1;
  while (true) {
    std::size_t cells = 1;
    bool overflow = false;
    for (std::size_t i = 0; i < d; ++i) {
      cells *= (k + 1);
      if (cells > n / 2) {
        overflow = true;
        break;
      }
    }
    if (overflow) break;
    ++k;
  }
  std::size_t cells = 1;
  for (std::size_t i = 0; i < d; ++i) cells *= k;
  const std::size_t per_cell = n / cells;

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> index(d, 0);
  std::vector<double> point(d, 0.0);
  const double width = 1.0 / static_cast<double>(k);

  double value = 0.0;
  double variance = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rest = c;
    for (std::size_t i = 0; i < d; ++i) {
      index[i] = rest % k;
      rest /= k;
    }
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t s = 0; s < per_cell; ++s) {
      double weight = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const Axis& axis = spec.axes[i];
        const double t = (static_cast<double>(index[i]) + uniform01(rng)) * width;
        const double u = axis.u_lower() + t * (axis.u_upper() - axis.u_lower());
        point[i] = axis.x_of(u);
        weight *= axis.jacobian(u) * (axis.u_upper() - axis.u_lower());
      }
      const double y = f(std::span<const double>(point)) * weight;
      const double delta = y - mean;
      mean += delta / static_cast<double>(s + 1);
      m2 += delta * (y - mean);
    }
    const double cell_fraction = 1.0 / static_cast<double>(cells);
    value += cell_fraction * mean;
    const double sample_var = per_cell > 1 ? m2 / static_cast<double>(per_cell - 1) : 0.0;
    variance += cell_fraction * cell_fraction * sample_var / static_cast<double>(per_cell);
  }
  IntegralEstimate est;
  est.value = value;
  est.error_estimate = std::sqrt(variance);
  est.evaluations = cells * per_cell;
  est.converged = std::isfinite(value) &&
                  est.error_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
  return est;
}

}  // namespace casimir::quad
