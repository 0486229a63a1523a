#pragma once

// Real functions of one positive frequency tabulated on a strictly increasing
// grid. Values between nodes are interpolated in log-frequency.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace casimir {

enum class Extrapolation { zero, power_law };
enum class Interpolation { log_linear, log_cubic };

/// `n` log-spaced points spanning [lo, hi] inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

class SpectralFunction {
 public:
  SpectralFunction() = default;

  SpectralFunction(std::vector<double> grid, std::vector<double> values,
                   Extrapolation extrapolation = Extrapolation::zero,
                   Interpolation interpolation = Interpolation::log_linear)
      : grid_(std::move(grid)),
        values_(std::move(values)),
        extrapolation_(extrapolation),
        interpolation_(interpolation) {
    if (grid_.size() < 2) throw std::invalid_argument("SpectralFunction: need at least two nodes");
    if (grid_.size() != values_.size()) throw std::invalid_argument("SpectralFunction: grid/value size mismatch");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (!(grid_[i] > 0.0) || !std::isfinite(grid_[i]))
        throw std::invalid_argument("SpectralFunction: grid nodes must be positive and finite");
      if (i > 0 && !(grid_[i] > grid_[i - 1]))
        throw std::invalid_argument("SpectralFunction: grid must be strictly increasing (node " +
                                    std::to_string(i) + ")");
      if (!std::isfinite(values_[i]))
        throw std::invalid_argument("SpectralFunction: non-finite value at node " + std::to_string(i));
    }
    log_grid_.resize(grid_.size());
    std::transform(grid_.begin(), grid_.end(), log_grid_.begin(), [](double w) { return std::log(w); });
    if (interpolation_ == Interpolation::log_cubic) build_slopes();
  }

  /// Samples `f` on `grid`.
  template <class F>
  static SpectralFunction sample(F&& f, std::vector<double> grid,
                                 Extrapolation extrapolation = Extrapolation::zero,
                                 Interpolation interpolation = Interpolation::log_linear) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
    return SpectralFunction(std::move(grid), std::move(v), extrapolation, interpolation);
  }

  double operator()(double w) const {
    if (grid_.empty()) return 0.0;
    if (w < grid_.front() || w > grid_.back()) return extrapolate(w);
    if (w == grid_.back()) return values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    if (w == grid_[i]) return values_[i];
    const double h = log_grid_[i + 1] - log_grid_[i];
    const double t = (std::log(w) - log_grid_[i]) / h;
    if (interpolation_ == Interpolation::log_linear) return (1.0 - t) * values_[i] + t * values_[i + 1];
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * values_[i] + (t3 - 2 * t2 + t) * h * slopes_[i] +
           (-2 * t3 + 3 * t2) * values_[i + 1] + (t3 - t2) * h * slopes_[i + 1];
  }

  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  double lower() const { return grid_.front(); }
  double upper() const { return grid_.back(); }
  Extrapolation extrapolation() const { return extrapolation_; }
  Interpolation interpolation() const { return interpolation_; }

  /// Largest |value| over the nodes.
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Copy keeping every `stride`-th node (and always the last one).
  SpectralFunction decimated(std::size_t stride = 2) const {
    std::vector<double> g;
    std::vector<double> v;
    for (std::size_t i = 0; i < grid_.size(); i += stride) {
      g.push_back(grid_[i]);
      v.push_back(values_[i]);
    }
    if (g.back() != grid_.back()) {
      g.push_back(grid_.back());
      v.push_back(values_.back());
    }
    if (g.size() < 2) return *this;
    return SpectralFunction(std::move(g), std::move(v), extrapolation_, interpolation_);
  }

  SpectralFunction scaled(double factor) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= factor;
    return SpectralFunction(grid_, std::move(v), extrapolation_, interpolation_);
  }

  /// Applies `f` to every node value.
  template <class F>
  SpectralFunction transformed(F&& f) const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid_[i], values_[i]);
    return SpectralFunction(grid_, std::move(v), extrapolation_, interpolation_);
  }

 private:
  double extrapolate(double w) const {
    if (extrapolation_ == Extrapolation::zero || !(w > 0.0)) return 0.0;
    const bool low = w < grid_.front();
    const std::size_t i0 = low ? 0 : grid_.size() - 1;
    const std::size_t i1 = low ? 1 : grid_.size() - 2;
    const double v0 = values_[i0];
    const double v1 = values_[i1];
    if (v0 == 0.0 || v1 == 0.0 || (v0 > 0.0) != (v1 > 0.0)) return 0.0;
    const double p = std::log(v0 / v1) / (log_grid_[i0] - log_grid_[i1]);
    return v0 * std::exp(p * (std::log(w) - log_grid_[i0]));
  }

  void build_slopes() {
    const std::size_t n = grid_.size();
    slopes_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0) {
        slopes_[i] = (values_[1] - values_[0]) / (log_grid_[1] - log_grid_[0]);
      } else if (i + 1 == n) {
        slopes_[i] = (values_[n - 1] - values_[n - 2]) / (log_grid_[n - 1] - log_grid_[n - 2]);
      } else {
        // Three-point derivative on a non-uniform grid.
        const double hl = log_grid_[i] - log_grid_[i - 1];
        const double hr = log_grid_[i + 1] - log_grid_[i];
        const double dl = (values_[i] - values_[i - 1]) / hl;
        const double dr = (values_[i + 1] - values_[i]) / hr;
        slopes_[i] = (hr * dl + hl * dr) / (hl + hr);
      }
    }
  }

  std::vector<double> grid_;
  std::vector<double> log_grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  Extrapolation extrapolation_ = Extrapolation::zero;
  Interpolation interpolation_ = Interpolation::log_linear;
};

/// Log-spaced background grid on [lo, hi] with `dense` extra points packed
/// uniformly into [center - span, center + span]. Used for narrow features.
inline std::vector<double> clustered_grid(double lo, double hi, std::size_t n, double center, double span,
                                          std::size_t dense) {
  std::vector<double> g = log_grid(lo, hi, n);
  const double a = std::max(lo, center - span);
  const double b = std::min(hi, center + span);
  if (dense >= 2 && b > a) {
    for (std::size_t i = 0; i < dense; ++i)
      g.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(dense - 1));
  }
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  out.reserve(g.size());
  for (double x : g) {
    if (out.empty() || x > out.back() * (1.0 + 1e-12)) out.push_back(x);
  }
  return out;
}

/// Normalized Lorentzian of half-width `width` centred at `center`.
inline double lorentzian(double w, double center, double width) {
  const double d = w - center;
  return width / (std::numbers::pi * (d * d + width * width));
}

/// Coupling whose square is a narrow Lorentzian of total weight `weight`
/// centred at `center`: the grid stand-in for weight * delta(w - center).
inline SpectralFunction narrow_coupling(double center, double weight, double width, std::size_t dense = 4001) {
  const double span = 400.0 * width;
  std::vector<double> grid = clustered_grid(center * 1e-3, center * 1e3, 600, center, span, dense);
  // Geometric refinement of the Lorentzian shoulders just outside the dense block.
  for (double k = 1.0; k < 60.0; k *= 1.05) {
    grid.push_back(center + span * (1.0 + k * 0.05));
    if (center - span * (1.0 + k * 0.05) > grid.front()) grid.push_back(center - span * (1.0 + k * 0.05));
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> g;
  for (double x : grid) {
    if (g.empty() || x > g.back() * (1.0 + 1e-12)) g.push_back(x);
  }
  return SpectralFunction::sample([&](double w) { return std::sqrt(weight * lorentzian(w, center, width)); },
                                  std::move(g), Extrapolation::zero, Interpolation::log_cubic);
}

}  // namespace casimir
