#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wot/transport.hpp"

namespace wot {

struct SinkhornOptions {
  double epsilon = 0.1;
  std::size_t max_iter = 100000;
  /// Target l1 marginal residual.
  double tol = 1e-9;
  /// Residual is evaluated every check_every sweeps.
  std::size_t check_every = 10;
};

struct SinkhornResult {
  TransportPlan plan;
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> f;
  std::vector<double> g;
};

namespace detail {

/// log sum_k exp(x_k), -inf for an all -inf input.
template <class Range>
double log_sum_exp(const Range& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace detail

/// Entropic optimal transport, log-domain Sinkhorn iterations on the dual
/// potentials (f, g); the plan is exp((f_i + g_j - c_ij) / epsilon).
/// Non-convergence is reported through converged/residual, not thrown.
inline SinkhornResult solve_sinkhorn(const std::vector<double>& a, const std::vector<double>& b, const Matrix& cost,
                                     const SinkhornOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw std::invalid_argument("solve_sinkhorn: epsilon must be positive");
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (static_cast<std::size_t>(cost.rows()) != m || static_cast<std::size_t>(cost.cols()) != n) {
    throw std::invalid_argument("solve_sinkhorn: cost matrix shape does not match the marginals");
  }
  const double eps = opts.epsilon;
  std::vector<double> log_a(m);
  std::vector<double> log_b(n);
  for (std::size_t i = 0; i < m; ++i) log_a[i] = a[i] > 0.0 ? std::log(a[i]) : -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) log_b[j] = b[j] > 0.0 ? std::log(b[j]) : -std::numeric_limits<double>::infinity();

  SinkhornResult out;
  out.f.assign(m, 0.0);
  out.g.assign(n, 0.0);
  std::vector<double> scratch(std::max(m, n));

  auto plan_entry = [&](std::size_t i, std::size_t j) {
    return std::exp((out.f[i] + out.g[j] - cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / eps);
  };
  auto row_residual = [&]() {
    double r = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += plan_entry(i, j);
      r += std::abs(s - a[i]);
    }
    return r;
  };

  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      scratch.resize(n);
      for (std::size_t j = 0; j < n; ++j) scratch[j] = (out.g[j] - cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / eps;
      out.f[i] = std::isinf(log_a[i]) ? log_a[i] : eps * (log_a[i] - detail::log_sum_exp(scratch));
    }
    for (std::size_t j = 0; j < n; ++j) {
      scratch.resize(m);
      for (std::size_t i = 0; i < m; ++i) scratch[i] = (out.f[i] - cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / eps;
      out.g[j] = std::isinf(log_b[j]) ? log_b[j] : eps * (log_b[j] - detail::log_sum_exp(scratch));
    }
    out.iterations = it;
    if (it % opts.check_every == 0 || it == opts.max_iter) {
      // columns are exact after the g-update
      out.residual = row_residual();
      if (out.residual <= 0.5 * opts.tol) break;
    }
  }

  out.plan.mass.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.plan.mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = plan_entry(i, j);
  }
  out.plan.source_weights = a;
  out.plan.target_weights = b;
  out.residual = out.plan.marginal_l1_residual();
  out.converged = out.residual <= opts.tol;
  out.value = out.plan.value(cost);
  return out;
}

template <class Point>
SinkhornResult solve_sinkhorn(const DiscreteMeasure<Point>& mu0, const DiscreteMeasure<Point>& mu1,
                              const Matrix& cost, const SinkhornOptions& opts) {
  return solve_sinkhorn(mu0.weights(), mu1.weights(), cost, opts);
}

}  // namespace wot
