#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "wot/paths.hpp"

namespace oracle {

/// Gauss-Legendre nodes on [-1, 1] by Golub-Welsch (symmetric eigenproblem),
/// independent of the Newton iteration in the library.
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

inline Rule golub_welsch(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Rule r;
  for (int k = 0; k < n; ++k) {
    r.x.push_back(es.eigenvalues()(k));
    const double v = es.eigenvectors()(0, k);
    r.w.push_back(2.0 * v * v);
  }
  return r;
}

/// int_lo^hi f with a composite Gauss rule.
template <class F>
double integrate(F&& f, double lo, double hi, int panels = 1, int points = 20) {
  static const Rule rule = golub_welsch(20);
  const Rule& r = points == 20 ? rule : golub_welsch(points);
  double total = 0.0;
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    for (std::size_t k = 0; k < r.x.size(); ++k) total += r.w[k] * f(a + 0.5 * width * (r.x[k] + 1.0));
  }
  return total * 0.5 * width;
}

/// int int_[0,1]^2 |t - s|^a = 2 int_0^1 (1 - u) u^a du, computed
/// numerically on a graded mesh toward u = 0.
inline double abs_power_integral(double a) {
  double total = 0.0;
  double hi = 1.0;
  for (int level = 0; level < 60; ++level) {
    const double lo = hi / 2.0;
    total += integrate([a](double u) { return 2.0 * (1.0 - u) * std::pow(u, a); }, lo, hi);
    hi = lo;
  }
  return total;
}

/// F(w) = int int (w(t)-w(s))^{2k} |t-s|^{-beta} in lag form
///   2 int_0^1 u^{-beta} int_0^{1-u} (w(s+u) - w(s))^{2k} ds du,
/// with the inner integral split at every kink (exact for the polynomial
/// pieces) and the outer split at multiples of the cell width.
inline double sobolev_energy_lag_form(const wot::DyadicPath& w, int two_k, double beta, int points = 20) {
  const auto n = static_cast<double>(w.cells());
  auto inner = [&](double u) {
    std::vector<double> cuts{0.0, 1.0 - u};
    for (std::size_t j = 1; j < w.cells(); ++j) {
      const double t = j / n;
      if (t < 1.0 - u) cuts.push_back(t);
      if (t - u > 0.0) cuts.push_back(t - u);
    }
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (cuts[k + 1] <= cuts[k]) continue;
      s += integrate([&](double x) { return std::pow(w(x + u) - w(x), two_k); }, cuts[k], cuts[k + 1], 1, points);
    }
    return s;
  };
  double total = 0.0;
  for (std::size_t j = 0; j < w.cells(); ++j) {
    total += integrate([&](double u) { return 2.0 * std::pow(u, -beta) * inner(u); }, j / n, (j + 1) / n, 1, points);
  }
  return total;
}

/// min over permutations of sum_i c(i, sigma(i)), divided by n.
inline double assignment_brute_force(const Eigen::MatrixXd& c) {
  const auto n = static_cast<int>(c.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += c(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

/// Central difference (f(x + eps) - f(x - eps)) / (2 eps).
template <class F>
double central_difference(F&& f, double eps) {
  return (f(eps) - f(-eps)) / (2.0 * eps);
}

}  // namespace oracle
