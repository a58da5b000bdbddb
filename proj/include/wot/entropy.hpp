#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "wot/cost.hpp"
#include "wot/grid.hpp"
#include "wot/transport.hpp"

namespace wot {

/// sum_i p_i ln(p_i / q_i), 0 ln 0 = 0, +inf when p charges a q-null cell.
inline double relative_entropy(const Histogram& p, const Histogram& q) {
  if (!(p.grid == q.grid)) throw std::invalid_argument("relative_entropy: histograms live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < p.masses.size(); ++i) {
    const double pi = p.masses[i];
    if (pi == 0.0) continue;
    const double qi = q.masses[i];
    if (qi == 0.0) return std::numeric_limits<double>::infinity();
    s += pi * std::log(pi / qi);
  }
  return s;
}

/// Entropy with respect to the grid's Gaussian reference.
inline double gaussian_entropy(const Histogram& p) { return relative_entropy(p, gaussian_reference(p.grid).histogram); }

struct EntropyDecomposition {
  double gaussian_entropy = 0.0;
  /// sum p_i ln(p_i / h^d), the Lebesgue stand-in.
  double lebesgue_entropy = 0.0;
  double second_moment_half = 0.0;
  double log_normalizer = 0.0;
  /// gaussian_entropy minus the sum of the three other terms.
  double residual = 0.0;
};

inline EntropyDecomposition entropy_decomposition_check(const Histogram& p) {
  const GridSpec& g = p.grid;
  EntropyDecomposition out;
  out.gaussian_entropy = gaussian_entropy(p);
  const double vol = g.cell_volume();
  for (std::size_t c = 0; c < p.masses.size(); ++c) {
    const double pc = p.masses[c];
    if (pc == 0.0) continue;
    out.lebesgue_entropy += pc * std::log(pc / vol);
    double r2 = 0.0;
    for (double x : g.center(c)) r2 += x * x;
    out.second_moment_half += 0.5 * pc * r2;
  }
  out.log_normalizer = 0.5 * g.dim * std::log(2.0 * std::numbers::pi);
  out.residual = out.gaussian_entropy - (out.lebesgue_entropy + out.second_moment_half + out.log_normalizer);
  return out;
}

/// Push each plan entry to (1 - t) x_i + t y_j and bin it. Points leaving the
/// grid box are an error.
inline Histogram displacement_interpolate(const std::vector<Vec>& sources, const std::vector<Vec>& targets,
                                          const TransportPlan& plan, double t, const GridSpec& grid) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("displacement_interpolate: t must lie in [0, 1]");
  if (plan.rows() != sources.size() || plan.cols() != targets.size()) {
    throw std::invalid_argument("displacement_interpolate: plan shape does not match the supports");
  }
  grid.validate();
  std::vector<double> m(grid.cell_count(), 0.0);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const double mass = plan.mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (mass <= 0.0) continue;
      m[grid.locate(lerp(sources[i], targets[j], t))] += mass;
    }
  }
  return Histogram(grid, std::move(m));
}

struct DeficitRow {
  double t = 0.0;
  double entropy = 0.0;
  /// Chord minus the curvature term: the upper bound for entropy(t).
  double bound = 0.0;
  double deficit = 0.0;
};

struct KConvexityReport {
  double k = 0.0;
  double entropy0 = 0.0;
  double entropy1 = 0.0;
  /// Optimal transport value for the cost (W^2 for squared costs).
  double w2 = 0.0;
  double cell_width = 0.0;
  double tolerance_constant = 5.0;
  double tolerance = 0.0;
  double truncation_mass = 0.0;
  double min_deficit = 0.0;
  double max_abs_deficit = 0.0;
  bool infinite_entropy = false;
  std::vector<DeficitRow> rows;

  bool convex_within_tolerance() const { return !infinite_entropy && min_deficit >= -tolerance; }
  bool equality_within_tolerance() const { return !infinite_entropy && max_abs_deficit <= tolerance; }
};

struct KConvexityOptions {
  double tolerance_constant = 5.0;
  ExactSolverOptions solver;
};

/// D(t) = (1 - t) Ent(rho0) + t Ent(rho1) - K t (1 - t) / 2 * W^2 - Ent(rho_t)
/// along the displacement interpolation of an optimal plan between the cell
/// centers, entropies relative to the grid's Gaussian reference.
inline KConvexityReport kconvexity_deficit(const Histogram& rho0, const Histogram& rho1, const CostSpec& cost, double k,
                                           const std::vector<double>& t_list, const KConvexityOptions& opts = {}) {
  if (!(rho0.grid == rho1.grid)) throw std::invalid_argument("kconvexity_deficit: histograms live on different grids");
  if (!(k >= 0.0)) throw std::invalid_argument("kconvexity_deficit: K must be >= 0");
  if (cost.power() != 2.0) throw std::invalid_argument("kconvexity_deficit: the cost must be a squared norm");
  const GridSpec& g = rho0.grid;
  const auto ref = gaussian_reference(g);
  const auto mu0 = rho0.to_measure();
  const auto mu1 = rho1.to_measure();
  const auto sol = solve_exact(mu0, mu1, build_cost_matrix(mu0, mu1, cost), opts.solver);

  KConvexityReport r;
  r.k = k;
  r.entropy0 = relative_entropy(rho0, ref.histogram);
  r.entropy1 = relative_entropy(rho1, ref.histogram);
  r.w2 = sol.value;
  r.cell_width = g.cell_width();
  r.tolerance_constant = opts.tolerance_constant;
  r.tolerance = opts.tolerance_constant * r.cell_width;
  r.truncation_mass = ref.truncation_mass;
  r.infinite_entropy = std::isinf(r.entropy0) || std::isinf(r.entropy1);
  r.min_deficit = std::numeric_limits<double>::infinity();
  for (double t : t_list) {
    DeficitRow row;
    row.t = t;
    row.entropy = relative_entropy(displacement_interpolate(mu0.points(), mu1.points(), sol.plan, t, g), ref.histogram);
    row.bound = (1.0 - t) * r.entropy0 + t * r.entropy1 - 0.5 * k * t * (1.0 - t) * r.w2;
    row.deficit = row.bound - row.entropy;
    r.min_deficit = std::min(r.min_deficit, row.deficit);
    r.max_abs_deficit = std::max(r.max_abs_deficit, std::abs(row.deficit));
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace wot
