#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wot/cost.hpp"
#include "wot/measure.hpp"
#include "wot/transport.hpp"

namespace wot {

/// Oriented transport rays on a finite ground set S for a metric cost.
///
/// (x, y) is accepted when some (w, z) of the originating pairs satisfies
///   d(w,x) + d(x,y) + d(y,z) - d(w,z) <= tol.
/// Pairs whose residual falls in (tol, 2 tol] are rejected but listed as
/// uncertain.
template <class Point>
struct RayGraph {
  std::vector<Point> points;
  Matrix distance;
  /// Originating pairs (indices into points).
  std::vector<std::pair<int, int>> gamma;
  /// Accepted oriented pairs, lexicographic.
  std::vector<std::pair<int, int>> oriented_pairs;
  std::vector<double> residuals;
  std::vector<std::pair<int, int>> uncertain_pairs;
  double tol = 0.0;

  std::vector<std::vector<int>> outgoing() const {
    std::vector<std::vector<int>> out(points.size());
    for (auto [x, y] : oriented_pairs) out[static_cast<std::size_t>(x)].push_back(y);
    return out;
  }
  std::vector<std::vector<int>> incoming() const {
    std::vector<std::vector<int>> in(points.size());
    for (auto [x, y] : oriented_pairs) in[static_cast<std::size_t>(y)].push_back(x);
    return in;
  }
  bool contains(int x, int y) const {
    return std::binary_search(oriented_pairs.begin(), oriented_pairs.end(), std::make_pair(x, y));
  }
};

/// 1e-8 times the diameter of the point set.
inline double default_ray_tolerance(const Matrix& distance, double relative = 1e-8) {
  return relative * (distance.size() == 0 ? 0.0 : distance.maxCoeff());
}

template <class Point>
Matrix pairwise_distances(const std::vector<Point>& points, const CostSpec& metric) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = metric.distance(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
      d(j, i) = d(i, j);
    }
  }
  return d;
}

/// tol <= 0 selects default_ray_tolerance.
template <class Point>
RayGraph<Point> build_transport_rays(std::vector<Point> points, std::vector<std::pair<int, int>> gamma,
                                     const CostSpec& metric, double tol = 0.0) {
  if (!metric.is_metric()) throw std::invalid_argument("build_transport_rays: the cost must be a norm (power 1)");
  const int n = static_cast<int>(points.size());
  for (auto [w, z] : gamma) {
    if (w < 0 || z < 0 || w >= n || z >= n) throw std::out_of_range("build_transport_rays: pair index outside S");
  }
  RayGraph<Point> g;
  g.distance = pairwise_distances(points, metric);
  g.points = std::move(points);
  g.gamma = std::move(gamma);
  g.tol = tol > 0.0 ? tol : default_ray_tolerance(g.distance);
  const Matrix& d = g.distance;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      double best = std::numeric_limits<double>::infinity();
      for (auto [w, z] : g.gamma) best = std::min(best, d(w, x) + d(x, y) + d(y, z) - d(w, z));
      if (best <= g.tol) {
        g.oriented_pairs.emplace_back(x, y);
        g.residuals.push_back(std::max(best, 0.0));
      } else if (best <= 2.0 * g.tol) {
        g.uncertain_pairs.emplace_back(x, y);
      }
    }
  }
  return g;
}

/// Ground set and originating pairs from a plan: S holds the sources, the
/// targets and, for every support pair (w, z) and every fraction s in
/// `fractions`, the point (1 - s) w + s z. Exact duplicates are merged.
template <class Point>
std::pair<std::vector<Point>, std::vector<std::pair<int, int>>> ray_ground_set(
    const DiscreteMeasure<Point>& mu0, const DiscreteMeasure<Point>& mu1, const TransportPlan& plan,
    const std::vector<double>& fractions = {}) {
  std::vector<Point> s;
  auto index_of = [&s](const Point& p) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] == p) return static_cast<int>(k);
    }
    s.push_back(p);
    return static_cast<int>(s.size() - 1);
  };
  std::vector<int> src(mu0.size());
  std::vector<int> dst(mu1.size());
  for (std::size_t i = 0; i < mu0.size(); ++i) src[i] = index_of(mu0.point(i));
  for (std::size_t j = 0; j < mu1.size(); ++j) dst[j] = index_of(mu1.point(j));
  std::vector<std::pair<int, int>> gamma;
  for (auto [i, j] : plan.support()) {
    gamma.emplace_back(src[static_cast<std::size_t>(i)], dst[static_cast<std::size_t>(j)]);
    for (double f : fractions) index_of(lerp(mu0.point(static_cast<std::size_t>(i)), mu1.point(static_cast<std::size_t>(j)), f));
  }
  return {std::move(s), std::move(gamma)};
}

struct TransportSets {
  /// Points with a ray partner other than themselves.
  std::vector<int> with_endpoints;
  /// Points with both a nontrivial outgoing and a nontrivial incoming ray.
  std::vector<int> without_endpoints;
};

namespace detail {
inline bool has_other(const std::vector<int>& v, int self) {
  return std::any_of(v.begin(), v.end(), [self](int y) { return y != self; });
}
}  // namespace detail

template <class Point>
TransportSets transport_sets(const RayGraph<Point>& g) {
  const auto out = g.outgoing();
  const auto in = g.incoming();
  TransportSets t;
  for (std::size_t x = 0; x < g.points.size(); ++x) {
    const int xi = static_cast<int>(x);
    const bool fwd = detail::has_other(out[x], xi);
    const bool bwd = detail::has_other(in[x], xi);
    if (fwd || bwd) t.with_endpoints.push_back(xi);
    if (fwd && bwd) t.without_endpoints.push_back(xi);
  }
  return t;
}

struct Endpoints {
  std::vector<int> initial;
  std::vector<int> final_points;
};

/// Initial points start some ray and have no incoming ray other than the
/// degenerate one; final points symmetrically.
template <class Point>
Endpoints endpoints(const RayGraph<Point>& g) {
  const auto out = g.outgoing();
  const auto in = g.incoming();
  Endpoints e;
  for (std::size_t x = 0; x < g.points.size(); ++x) {
    const int xi = static_cast<int>(x);
    if (!out[x].empty() && !detail::has_other(in[x], xi)) e.initial.push_back(xi);
    if (!in[x].empty() && !detail::has_other(out[x], xi)) e.final_points.push_back(xi);
  }
  return e;
}

struct BranchingViolation {
  int point = -1;
  int partner_a = -1;
  int partner_b = -1;
  double residual = 0.0;
};

struct NonBranchingReport {
  bool passed = true;
  double worst_residual = 0.0;
  std::size_t triples_checked = 0;
  std::vector<BranchingViolation> violations;
};

/// For every x in the transport set, any two nondegenerate ray partners must
/// lie on one geodesic through x, respecting orientation:
///   incoming a, outgoing b:  d(a,x) + d(x,b) = d(a,b)
///   outgoing b1, b2:         one of them lies between x and the other
///   incoming a1, a2:         likewise on the incoming side.
template <class Point>
NonBranchingReport check_non_branching(const RayGraph<Point>& g, double tol = 0.0) {
  if (tol <= 0.0) tol = g.tol;
  const Matrix& d = g.distance;
  const auto out = g.outgoing();
  const auto in = g.incoming();
  NonBranchingReport r;
  auto between = [&d](int from, int mid, int to) { return d(from, mid) + d(mid, to) - d(from, to); };
  auto note = [&](int x, int a, int b, double res) {
    ++r.triples_checked;
    r.worst_residual = std::max(r.worst_residual, res);
    if (res > tol) r.violations.push_back({x, a, b, res});
  };
  for (int x : transport_sets(g).without_endpoints) {
    std::vector<int> fwd;
    std::vector<int> bwd;
    for (int y : out[static_cast<std::size_t>(x)]) {
      if (y != x) fwd.push_back(y);
    }
    for (int y : in[static_cast<std::size_t>(x)]) {
      if (y != x) bwd.push_back(y);
    }
    for (int a : bwd) {
      for (int b : fwd) note(x, a, b, between(a, x, b));
    }
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      for (std::size_t j = i + 1; j < fwd.size(); ++j) {
        const int b1 = fwd[i];
        const int b2 = fwd[j];
        note(x, b1, b2, std::min(between(x, b1, b2), between(x, b2, b1)));
      }
    }
    for (std::size_t i = 0; i < bwd.size(); ++i) {
      for (std::size_t j = i + 1; j < bwd.size(); ++j) {
        const int a1 = bwd[i];
        const int a2 = bwd[j];
        note(x, a1, a2, std::min(between(a1, a2, x), between(a2, a1, x)));
      }
    }
  }
  r.passed = r.violations.empty();
  return r;
}

struct EquivalenceReport {
  bool reflexive = true;
  bool symmetric = true;
  bool transitive = true;
  bool passed() const { return reflexive && symmetric && transitive; }
};

/// R = G u G^{-1} restricted to the transport set, checked by explicit
/// closure.
template <class Point>
EquivalenceReport ray_relation_check(const RayGraph<Point>& g) {
  const auto t = transport_sets(g).without_endpoints;
  const std::size_t n = t.size();
  std::vector<char> rel(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rel[i * n + j] = g.contains(t[i], t[j]) || g.contains(t[j], t[i]);
  }
  EquivalenceReport r;
  for (std::size_t i = 0; i < n; ++i) {
    if (!rel[i * n + i]) r.reflexive = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (rel[i * n + j] != rel[j * n + i]) r.symmetric = false;
      if (!rel[i * n + j]) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (rel[j * n + k] && !rel[i * n + k]) r.transitive = false;
      }
    }
  }
  return r;
}

}  // namespace wot
