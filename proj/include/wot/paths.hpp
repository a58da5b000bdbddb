#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wot/rng.hpp"

namespace wot {

/// Largest supported dyadic level; 2^20 cells is far beyond desk scale.
inline constexpr int kMaxPathLevel = 20;

/// Continuous path on [0,1] starting at the origin, linear between the
/// dyadic knots j/2^level.
class DyadicPath {
 public:
  DyadicPath() : DyadicPath(0) {}

  /// Zero path at the given level.
  explicit DyadicPath(int level) : level_(checked_level(level)), knots_(cells_at(level_) + 1, 0.0) {}

  DyadicPath(int level, std::vector<double> knots) : level_(checked_level(level)), knots_(std::move(knots)) {
    if (knots_.size() != cells_at(level_) + 1) {
      throw std::invalid_argument("DyadicPath: level " + std::to_string(level_) + " needs " +
                                  std::to_string(cells_at(level_) + 1) + " knots, got " +
                                  std::to_string(knots_.size()));
    }
    if (knots_.front() != 0.0) {
      throw std::invalid_argument("DyadicPath: paths start at the origin (knots[0] must be 0)");
    }
    for (double v : knots_) {
      if (!std::isfinite(v)) throw std::invalid_argument("DyadicPath: knot values must be finite");
    }
  }

  /// Samples f at the knots; f(0) is forced to be zero.
  template <class F>
  static DyadicPath from_function(int level, F&& f) {
    const std::size_t n = cells_at(checked_level(level));
    std::vector<double> knots(n + 1);
    for (std::size_t j = 0; j <= n; ++j) knots[j] = f(static_cast<double>(j) / static_cast<double>(n));
    if (knots[0] != 0.0) throw std::invalid_argument("DyadicPath::from_function: f(0) must be 0");
    return DyadicPath(level, std::move(knots));
  }

  static std::size_t cells_at(int level) { return std::size_t{1} << level; }

  int level() const { return level_; }
  std::size_t cells() const { return knots_.size() - 1; }
  std::span<const double> knots() const { return knots_; }
  double knot(std::size_t j) const { return knots_.at(j); }

  /// Slope on cell c, i.e. (knots[c+1] - knots[c]) * 2^level.
  double slope(std::size_t c) const { return (knots_[c + 1] - knots_[c]) * static_cast<double>(cells()); }

  /// Linear interpolation; exact at the knots.
  double operator()(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("DyadicPath: evaluation time must lie in [0,1]");
    const double scaled = t * static_cast<double>(cells());
    auto j = static_cast<std::size_t>(scaled);
    if (j >= cells()) return knots_.back();
    const double frac = scaled - static_cast<double>(j);
    if (frac == 0.0) return knots_[j];
    return knots_[j] + frac * (knots_[j + 1] - knots_[j]);
  }

  friend bool operator==(const DyadicPath&, const DyadicPath&) = default;

 private:
  static int checked_level(int level) {
    if (level < 0 || level > kMaxPathLevel) {
      throw std::invalid_argument("DyadicPath: level must lie in [0," + std::to_string(kMaxPathLevel) + "]");
    }
    return level;
  }

  int level_;
  std::vector<double> knots_;
};

inline double eval_path(const DyadicPath& path, double t) { return path(t); }

/// Implements the dyadic projection: the level-m path with knots path(j/2^m).
/// For m above the path's level this is an exact refinement.
inline DyadicPath project(const DyadicPath& path, int m) {
  if (m < 0) throw std::invalid_argument("project: level must be nonnegative");
  const std::size_t n = DyadicPath::cells_at(m);
  std::vector<double> knots(n + 1);
  if (m <= path.level()) {
    const std::size_t stride = path.cells() / n;
    for (std::size_t j = 0; j <= n; ++j) knots[j] = path.knot(j * stride);
  } else {
    for (std::size_t j = 0; j <= n; ++j) knots[j] = path(static_cast<double>(j) / static_cast<double>(n));
  }
  return DyadicPath(m, std::move(knots));
}

/// Both paths re-expressed on the finer of their two grids.
inline std::pair<DyadicPath, DyadicPath> common_refinement(const DyadicPath& a, const DyadicPath& b) {
  const int level = std::max(a.level(), b.level());
  return {a.level() == level ? a : project(a, level), b.level() == level ? b : project(b, level)};
}

/// alpha * a + beta * b on the common refinement.
inline DyadicPath combine(double alpha, const DyadicPath& a, double beta, const DyadicPath& b) {
  auto [ra, rb] = common_refinement(a, b);
  std::vector<double> knots(ra.cells() + 1);
  for (std::size_t j = 0; j < knots.size(); ++j) knots[j] = alpha * ra.knot(j) + beta * rb.knot(j);
  knots[0] = 0.0;
  return DyadicPath(ra.level(), std::move(knots));
}

inline DyadicPath operator+(const DyadicPath& a, const DyadicPath& b) { return combine(1.0, a, 1.0, b); }
inline DyadicPath operator-(const DyadicPath& a, const DyadicPath& b) { return combine(1.0, a, -1.0, b); }

inline DyadicPath operator*(double alpha, const DyadicPath& a) {
  std::vector<double> knots(a.knots().begin(), a.knots().end());
  for (double& v : knots) v *= alpha;
  knots[0] = 0.0;
  return DyadicPath(a.level(), std::move(knots));
}

/// Brownian path at the given level: independent N(0, 2^-level) increments.
inline DyadicPath sample_brownian(int level, std::uint64_t seed) {
  if (level < 0) throw std::invalid_argument("sample_brownian: level must be nonnegative");
  GaussianSource source(seed);
  const std::size_t n = DyadicPath::cells_at(level);
  const double scale = std::sqrt(1.0 / static_cast<double>(n));
  std::vector<double> knots(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) knots[j] = knots[j - 1] + scale * source.normal();
  return DyadicPath(level, std::move(knots));
}

/// Independent Brownian paths; path i uses seed + i.
inline std::vector<DyadicPath> sample_brownian_ensemble(int level, std::size_t count, std::uint64_t seed) {
  std::vector<DyadicPath> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_brownian(level, seed + i));
  return out;
}

/// |h|_H, exact for piecewise-linear paths.
inline double cameron_martin_norm(const DyadicPath& path) {
  double sum = 0.0;
  for (std::size_t c = 0; c < path.cells(); ++c) {
    const double d = path.knot(c + 1) - path.knot(c);
    sum += d * d;
  }
  return std::sqrt(sum * static_cast<double>(path.cells()));
}

/// Uniform norm; attained at a knot for piecewise-linear paths.
inline double sup_norm(const DyadicPath& path) {
  double m = 0.0;
  for (double v : path.knots()) m = std::max(m, std::abs(v));
  return m;
}

/// One knot per row: "t,value".
inline void write_path_csv(std::ostream& os, const DyadicPath& path) {
  os << "t,value\n";
  const auto n = static_cast<double>(path.cells());
  os.precision(17);
  for (std::size_t j = 0; j <= path.cells(); ++j) os << static_cast<double>(j) / n << ',' << path.knot(j) << '\n';
}

}  // namespace wot
