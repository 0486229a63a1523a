#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "casimir/quadrature.hpp"

namespace casimir {

struct PvResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/// PV of the integral of g(x)/(x^2 - w^2) over [lo, hi] (hi may be +inf),
/// w > 0. The pole is removed by subtracting g(w); the subtracted piece is
/// integrated analytically. `breakpoints` mark kinks of g.
template <class G>
PvResult pv_integral(G&& g, double lo, double hi, double w, std::span<const double> breakpoints,
                     const quad::Tolerance& tol = {}) {
  const bool infinite = !std::isfinite(hi);
  double top = hi;
  if (infinite) {
    top = std::max(2.0 * w, lo + 1.0);
    if (!breakpoints.empty()) top = std::max(top, breakpoints.back());
  }
  // A pole on an endpoint is integrable only when g(w) = 0.
  const bool pole_inside = w >= lo && w <= top;
  const double gw = pole_inside ? g(w) : 0.0;

  double analytic = 0.0;
  if (pole_inside && gw != 0.0) {
    const double ratio = ((top - w) * (lo + w)) / ((top + w) * (lo - w));
    analytic = gw / (2.0 * w) * std::log(std::abs(ratio));
    if (w == lo || w == top) analytic = std::numeric_limits<double>::infinity();
  }

  std::vector<double> breaks;
  breaks.reserve(breakpoints.size() + 1);
  for (double x : breakpoints)
    if (x > lo && x < top) breaks.push_back(x);
  if (w > lo && w < top) breaks.push_back(w);
  std::sort(breaks.begin(), breaks.end());

  auto regular = [&](double x) {
    const double d = x * x - w * w;
    if (d == 0.0) return 0.0;
    return (g(x) - gw) / d;
  };
  quad::Tolerance inner = tol;
  inner.abs = std::max(tol.abs, tol.rel * std::abs(analytic));
  const auto body = quad::integrate_1d(regular, quad::Axis::finite(lo, top, std::move(breaks)), inner);

  PvResult out{body.value + analytic, body.error_estimate, body.evaluations, body.converged};
  if (infinite) {
    auto tail_f = [&](double x) { return g(x) / (x * x - w * w); };
    const auto tail = quad::integrate_1d(tail_f, quad::Axis::semi_infinite(top, top), inner);
    out.value += tail.value;
    out.error_estimate += tail.error_estimate;
    out.evaluations += tail.evaluations;
    out.converged = out.converged && tail.converged;
  }
  return out;
}

}  // namespace casimir
