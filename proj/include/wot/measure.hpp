#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wot/paths.hpp"

namespace wot {

using Vec = std::vector<double>;

inline constexpr double kWeightSumTolerance = 1e-12;

/// Finitely supported probability measure. Duplicate points are merged
/// (first occurrence keeps its position) and the weights must sum to one.
template <class Point>
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  DiscreteMeasure(std::vector<Point> points, std::vector<double> weights) {
    if (points.size() != weights.size()) {
      throw std::invalid_argument("DiscreteMeasure: points and weights differ in length");
    }
    if (points.empty()) throw std::invalid_argument("DiscreteMeasure: empty support");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double w = weights[i];
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("DiscreteMeasure: weights must be finite and >= 0");
      std::size_t found = points_.size();
      for (std::size_t k = 0; k < points_.size(); ++k) {
        if (points_[k] == points[i]) {
          found = k;
          break;
        }
      }
      if (found == points_.size()) {
        points_.push_back(std::move(points[i]));
        weights_.push_back(w);
      } else {
        weights_[found] += w;
      }
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      throw std::invalid_argument("DiscreteMeasure: weights sum to " + std::to_string(total) + ", expected 1");
    }
  }

  static DiscreteMeasure uniform(std::vector<Point> points) {
    const double w = 1.0 / static_cast<double>(points.size());
    std::vector<double> weights(points.size(), w);
    return DiscreteMeasure(std::move(points), std::move(weights));
  }

  /// Rescales arbitrary nonnegative weights to total mass one.
  static DiscreteMeasure normalized(std::vector<Point> points, std::vector<double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("DiscreteMeasure::normalized: total mass must be positive");
    for (double& w : weights) w /= total;
    return DiscreteMeasure(std::move(points), std::move(weights));
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& point(std::size_t i) const { return points_.at(i); }
  double weight(std::size_t i) const { return weights_.at(i); }

 private:
  std::vector<Point> points_;
  std::vector<double> weights_;
};

inline std::size_t dimension_of(const Vec& v) { return v.size(); }
inline std::size_t dimension_of(const DyadicPath& p) { return p.cells(); }

inline Vec lerp(const Vec& a, const Vec& b, double t) {
  if (a.size() != b.size()) throw std::invalid_argument("lerp: dimension mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - t) * a[i] + t * b[i];
  return out;
}

inline DyadicPath lerp(const DyadicPath& a, const DyadicPath& b, double t) { return combine(1.0 - t, a, t, b); }

}  // namespace wot
