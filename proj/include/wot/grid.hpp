#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "wot/measure.hpp"
#include "wot/rng.hpp"

namespace wot {

/// Regular grid of m^d cells covering [-R, R]^d. Flat indices are row-major
/// with axis 0 most significant.
struct GridSpec {
  int dim = 1;
  double half_range = 8.0;
  int cells_per_axis = 400;

  void validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 1, 2 or 3");
    if (cells_per_axis < 2) throw std::invalid_argument("GridSpec: cells_per_axis must be >= 2");
    if (!(half_range > 0.0) || !std::isfinite(half_range)) throw std::invalid_argument("GridSpec: half_range must be positive");
  }

  double cell_width() const { return 2.0 * half_range / cells_per_axis; }
  double cell_volume() const { return std::pow(cell_width(), dim); }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(cells_per_axis);
    return n;
  }

  /// Edge k in [0, m]; exact mirror symmetry edge(m - k) = -edge(k).
  double edge(int k) const { return half_range * static_cast<double>(2 * k - cells_per_axis) / cells_per_axis; }
  double axis_center(int k) const {
    return half_range * static_cast<double>(2 * k + 1 - cells_per_axis) / cells_per_axis;
  }

  std::vector<int> unflatten(std::size_t flat) const {
    std::vector<int> idx(static_cast<std::size_t>(dim));
    for (int a = dim - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(cells_per_axis));
      flat /= static_cast<std::size_t>(cells_per_axis);
    }
    return idx;
  }

  Vec center(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Vec x(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) x[a] = axis_center(idx[a]);
    return x;
  }

  /// Relative distance (in cell widths) under which a point counts as lying
  /// on an edge. Interpolated points that land on an edge in exact arithmetic
  /// otherwise fall on either side depending on rounding.
  static constexpr double kEdgeSnap = 1e-9;

  /// Axis cell containing x: half-open [a, b), the last cell closed.
  int locate_axis(double x) const {
    const double u = (x + half_range) / cell_width();
    const double nearest = std::round(u);
    const double snapped = std::abs(u - nearest) <= kEdgeSnap ? nearest : u;
    if (!(snapped >= 0.0 && snapped <= cells_per_axis)) {
      throw std::out_of_range("GridSpec: point " + std::to_string(x) + " outside [-R, R]; enlarge the grid");
    }
    const int k = static_cast<int>(std::floor(snapped));
    return k >= cells_per_axis ? cells_per_axis - 1 : k;
  }

  std::size_t locate(const Vec& x) const {
    if (x.size() != static_cast<std::size_t>(dim)) throw std::invalid_argument("GridSpec: point dimension mismatch");
    std::size_t flat = 0;
    for (double v : x) flat = flat * static_cast<std::size_t>(cells_per_axis) + static_cast<std::size_t>(locate_axis(v));
    return flat;
  }

  bool operator==(const GridSpec&) const = default;
};

/// Probability masses on the cells of a grid.
struct Histogram {
  GridSpec grid;
  std::vector<double> masses;

  Histogram() = default;
  Histogram(GridSpec g, std::vector<double> m) : grid(g), masses(std::move(m)) {
    grid.validate();
    if (masses.size() != grid.cell_count()) throw std::invalid_argument("Histogram: mass count does not match the grid");
    double total = 0.0;
    for (double v : masses) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("Histogram: masses must be finite and >= 0");
      total += v;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      throw std::invalid_argument("Histogram: masses sum to " + std::to_string(total) + ", expected 1");
    }
  }

  static Histogram normalized(GridSpec g, std::vector<double> m) {
    const double total = std::accumulate(m.begin(), m.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("Histogram::normalized: total mass must be positive");
    for (double& v : m) v /= total;
    return Histogram(g, std::move(m));
  }

  /// Cells with positive mass as a discrete measure on cell centers.
  DiscreteMeasure<Vec> to_measure() const {
    std::vector<Vec> pts;
    std::vector<double> w;
    for (std::size_t c = 0; c < masses.size(); ++c) {
      if (masses[c] > 0.0) {
        pts.push_back(grid.center(c));
        w.push_back(masses[c]);
      }
    }
    return DiscreteMeasure<Vec>(std::move(pts), std::move(w));
  }

  /// Flat indices of the cells with positive mass, in order.
  std::vector<std::size_t> support_cells() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < masses.size(); ++c) {
      if (masses[c] > 0.0) out.push_back(c);
    }
    return out;
  }
};

/// Phi(x) = 0.5 erfc(-x / sqrt 2).
inline double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Phi(b) - Phi(a) without cancellation in either tail; symmetric under
/// (a, b) -> (-b, -a) bit for bit.
inline double gaussian_interval_mass(double a, double b) {
  const double s = std::sqrt(2.0);
  if (b <= 0.0) return 0.5 * (std::erfc(-b / s) - std::erfc(-a / s));
  if (a >= 0.0) return 0.5 * (std::erfc(a / s) - std::erfc(b / s));
  return 1.0 - 0.5 * (std::erfc(-a / s) + std::erfc(b / s));
}

namespace detail {

/// Normalized per-axis masses of N(mean, sigma^2).
inline std::vector<double> axis_gaussian_masses(const GridSpec& g, double mean, double sigma) {
  std::vector<double> m(static_cast<std::size_t>(g.cells_per_axis));
  double total = 0.0;
  for (int k = 0; k < g.cells_per_axis; ++k) {
    m[static_cast<std::size_t>(k)] = gaussian_interval_mass((g.edge(k) - mean) / sigma, (g.edge(k + 1) - mean) / sigma);
    total += m[static_cast<std::size_t>(k)];
  }
  if (!(total > 0.0)) throw std::invalid_argument("discretize_gaussian: no Gaussian mass on the grid");
  for (double& v : m) v /= total;
  return m;
}

inline std::vector<double> outer_product(const GridSpec& g, const std::vector<std::vector<double>>& axes) {
  std::vector<double> out(g.cell_count());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto idx = g.unflatten(c);
    double v = 1.0;
    for (std::size_t a = 0; a < idx.size(); ++a) v *= axes[a][static_cast<std::size_t>(idx[a])];
    out[c] = v;
  }
  return out;
}

}  // namespace detail

/// Standard Gaussian restricted to the grid and renormalized.
struct GaussianReference {
  Histogram histogram;
  /// 1 - (Phi(R) - Phi(-R))^d.
  double truncation_mass = 0.0;
};

inline GaussianReference gaussian_reference(const GridSpec& grid) {
  grid.validate();
  auto axis = detail::axis_gaussian_masses(grid, 0.0, 1.0);
  // CDF differences are already mirror-exact; mirroring the normalized values
  // keeps that through the division as well.
  const std::size_t m = axis.size();
  for (std::size_t k = 0; k < m / 2; ++k) axis[m - 1 - k] = axis[k];
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(grid.dim), axis);
  GaussianReference ref;
  ref.histogram = Histogram::normalized(grid, detail::outer_product(grid, axes));
  const double outside = std::erfc(grid.half_range / std::sqrt(2.0));
  ref.truncation_mass = -std::expm1(grid.dim * std::log1p(-outside));
  return ref;
}

/// Product of per-axis normalized CDF differences of N(mean_a, sigma^2).
inline Histogram discretize_gaussian(const GridSpec& grid, const Vec& mean, double sigma = 1.0) {
  grid.validate();
  if (mean.size() != static_cast<std::size_t>(grid.dim)) throw std::invalid_argument("discretize_gaussian: mean dimension mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("discretize_gaussian: sigma must be positive");
  std::vector<std::vector<double>> axes;
  for (double mu : mean) axes.push_back(detail::axis_gaussian_masses(grid, mu, sigma));
  return Histogram::normalized(grid, detail::outer_product(grid, axes));
}

/// Gaussian N(mean, sigma^2) conditioned on [lo, hi]^d, discretized.
inline Histogram discretize_truncated_gaussian(const GridSpec& grid, const Vec& mean, double sigma, double lo, double hi) {
  Histogram h = discretize_gaussian(grid, mean, sigma);
  for (std::size_t c = 0; c < h.masses.size(); ++c) {
    for (double x : grid.center(c)) {
      if (x < lo || x > hi) h.masses[c] = 0.0;
    }
  }
  return Histogram::normalized(grid, std::move(h.masses));
}

/// Cells kept with probability support_fraction (at least one), masses
/// uniform on (0, 1], then normalized.
inline Histogram random_histogram(const GridSpec& grid, std::uint64_t seed, double support_fraction = 1.0) {
  grid.validate();
  GaussianSource rng(seed);
  std::vector<double> m(grid.cell_count(), 0.0);
  bool any = false;
  for (double& v : m) {
    if (rng.uniform() < support_fraction) {
      v = 1.0 - rng.uniform();
      any = true;
    }
  }
  if (!any) m[static_cast<std::size_t>(rng.below(m.size()))] = 1.0;
  return Histogram::normalized(grid, std::move(m));
}

}  // namespace wot
