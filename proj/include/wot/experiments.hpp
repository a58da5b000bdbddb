#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wot/cost.hpp"
#include "wot/duality.hpp"
#include "wot/entropy.hpp"
#include "wot/grid.hpp"
#include "wot/norms.hpp"
#include "wot/paths.hpp"
#include "wot/transport.hpp"

namespace wot {

inline double plan_l1_distance(const TransportPlan& a, const TransportPlan& b) {
  if (a.mass.rows() != b.mass.rows() || a.mass.cols() != b.mass.cols()) {
    throw std::invalid_argument("plan_l1_distance: plan shapes differ");
  }
  return (a.mass - b.mass).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// p -> infinity

struct PLimitRow {
  double p = 0.0;
  double w2 = 0.0;
  /// l1 distance to the previous plan; NaN for the first row.
  double plan_change = std::numeric_limits<double>::quiet_NaN();
  bool alternative_optimum = false;
  /// Row added while doubling p past the requested list.
  bool extension = false;
};

struct PLimitOptions {
  /// Relative slack for the monotonicity and domination comparisons.
  double compare_tol = 1e-12;
  /// Plans closer than this in l1 count as equal.
  double plan_tol = 1e-12;
  /// Doublings of p tried after the list while looking for a stable plan.
  int max_doublings = 40;
  /// Consecutive equal plans required to accept a limit.
  int stable_runs = 2;
  /// Doubling also continues until |x|_p^2 <= (1 + this) |x|_inf^2 on R^d.
  double norm_gap = 1e-10;
  CycleCheckOptions cycles;
  ExactSolverOptions solver;
};

struct PLimitReport {
  std::vector<PLimitRow> rows;
  double w2_inf = 0.0;
  bool nonincreasing = true;
  bool dominates_inf = true;
  bool tie_degenerate = false;
  /// False when ties were found: the plan sequence may jump between optima.
  bool convergence_claimed = false;
  bool limit_stable = false;
  double limit_p = 0.0;
  TransportPlan limit_plan;
  /// Value of the limit plan under the sup-norm squared cost.
  double limit_value_inf = 0.0;
  CycleCheckReport limit_cycles;

  bool passed() const { return nonincreasing && dominates_inf && limit_cycles.passed; }
};

/// Solves with |x - y|_p^2 for each p, then keeps doubling p until the plan
/// stops changing and checks that plan for sup-norm cyclical monotonicity.
inline PLimitReport p_limit_experiment(const DiscreteMeasure<Vec>& mu0, const DiscreteMeasure<Vec>& mu1,
                                       const std::vector<double>& p_list, const PLimitOptions& opts = {}) {
  if (p_list.empty()) throw std::invalid_argument("p_limit_experiment: empty p list");
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    if (!(p_list[i] >= 2.0) || std::isinf(p_list[i])) throw std::invalid_argument("p_limit_experiment: p must lie in [2, inf)");
    if (i > 0 && !(p_list[i] > p_list[i - 1])) throw std::invalid_argument("p_limit_experiment: p list must ascend");
  }
  ExactSolverOptions solver = opts.solver;
  solver.probe_uniqueness = true;

  PLimitReport r;
  const Matrix c_inf = build_cost_matrix(mu0, mu1, CostSpec::linf_squared());
  r.w2_inf = solve_exact(mu0, mu1, c_inf, opts.solver).value;

  TransportPlan prev;
  int stable = 0;
  auto step = [&](double p, bool extension) {
    const auto sol = solve_exact(mu0, mu1, build_cost_matrix(mu0, mu1, CostSpec::lp_squared(p)), solver);
    PLimitRow row;
    row.p = p;
    row.w2 = sol.value;
    row.extension = extension;
    row.alternative_optimum = sol.alternative_optimum.value_or(false);
    if (!r.rows.empty()) {
      row.plan_change = plan_l1_distance(prev, sol.plan);
      const double last = r.rows.back().w2;
      if (row.w2 > last + opts.compare_tol * std::max(1.0, last)) r.nonincreasing = false;
      stable = row.plan_change <= opts.plan_tol ? stable + 1 : 0;
    }
    if (row.w2 < r.w2_inf - opts.compare_tol * std::max(1.0, r.w2_inf)) r.dominates_inf = false;
    r.tie_degenerate = r.tie_degenerate || row.alternative_optimum;
    r.rows.push_back(row);
    prev = sol.plan;
  };
  for (double p : p_list) step(p, false);
  const double d = mu0.size() > 0 ? static_cast<double>(mu0.point(0).size()) : 1.0;
  auto gap = [&](double q) { return std::expm1(2.0 * std::log(d) / q); };
  double p = p_list.back();
  for (int k = 0; k < opts.max_doublings && (stable < opts.stable_runs || gap(p) > opts.norm_gap); ++k) {
    p *= 2.0;
    step(p, true);
  }
  r.limit_stable = stable >= opts.stable_runs && gap(p) <= opts.norm_gap;
  r.limit_p = r.rows.back().p;
  r.limit_plan = prev;
  r.limit_value_inf = prev.value(c_inf);
  r.convergence_claimed = r.limit_stable && !r.tie_degenerate;
  r.limit_cycles = check_cyclical_monotonicity(prev, c_inf, opts.cycles);
  return r;
}

// ---------------------------------------------------------------------------
// projections of path ensembles

struct ProjectionRow {
  int level = 0;
  /// W for the sup-norm squared cost (square root of the optimal value).
  double w = 0.0;
  bool below_top = true;
};

struct ProjectionReport {
  int top_level = 0;
  double w_top = 0.0;
  std::vector<ProjectionRow> rows;
  /// |pi_n w|_inf <= |w|_inf on every path and level, compared exactly.
  bool sup_contraction = true;
  bool contraction = true;
  bool nondecreasing = true;
  /// The gap to the top-level value shrinks and vanishes at the top level.
  bool converges = true;
  double compare_tol = 1e-12;

  bool passed() const { return sup_contraction && contraction && nondecreasing && converges; }
};

inline ProjectionReport projection_experiment(const std::vector<DyadicPath>& ensemble0, const std::vector<DyadicPath>& ensemble1,
                                              const std::vector<int>& levels, double compare_tol = 1e-12) {
  if (ensemble0.empty() || ensemble1.empty()) throw std::invalid_argument("projection_experiment: empty ensemble");
  const int top = ensemble0.front().level();
  for (const auto* ens : {&ensemble0, &ensemble1}) {
    for (const auto& w : *ens) {
      if (w.level() != top) throw std::invalid_argument("projection_experiment: paths must share one level");
    }
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] > top) throw std::invalid_argument("projection_experiment: level outside [0, top]");
    if (i > 0 && !(levels[i] > levels[i - 1])) throw std::invalid_argument("projection_experiment: levels must ascend");
  }
  const CostSpec cost = CostSpec::linf_squared();
  auto w_at = [&](int level) {
    std::vector<DyadicPath> a;
    std::vector<DyadicPath> b;
    for (const auto& w : ensemble0) a.push_back(project(w, level));
    for (const auto& w : ensemble1) b.push_back(project(w, level));
    const auto mu0 = DiscreteMeasure<DyadicPath>::normalized(a, std::vector<double>(a.size(), 1.0));
    const auto mu1 = DiscreteMeasure<DyadicPath>::normalized(b, std::vector<double>(b.size(), 1.0));
    return std::sqrt(std::max(0.0, solve_exact(mu0, mu1, build_cost_matrix(mu0, mu1, cost)).value));
  };

  ProjectionReport r;
  r.compare_tol = compare_tol;
  r.top_level = top;
  r.w_top = w_at(top);
  const double slack = compare_tol * std::max(1.0, r.w_top);
  for (int level : levels) {
    for (const auto* ens : {&ensemble0, &ensemble1}) {
      for (const auto& w : *ens) {
        if (sup_norm(project(w, level)) > sup_norm(w)) r.sup_contraction = false;
      }
    }
    ProjectionRow row;
    row.level = level;
    row.w = w_at(level);
    row.below_top = row.w <= r.w_top + slack;
    r.contraction = r.contraction && row.below_top;
    if (!r.rows.empty() && row.w < r.rows.back().w - slack) r.nondecreasing = false;
    r.rows.push_back(row);
  }
  if (!r.rows.empty() && r.rows.back().level == top) r.converges = std::abs(r.rows.back().w - r.w_top) <= slack;
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    if (r.w_top - r.rows[i].w > r.w_top - r.rows[i - 1].w + slack) r.converges = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// projection-norm search

struct ConjectureOptions {
  SobolevParams params;
  QuadratureSpec quad;
  int top_level = 8;
  std::vector<int> levels{2, 3, 4, 5, 6, 7};
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  /// Histogram of ratios on [0, bin_limit) plus an overflow bin.
  double bin_width = 0.025;
  double bin_limit = 2.0;
};

struct ConjectureLevel {
  int level = 0;
  double max_ratio = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double mean_ratio = 0.0;
  std::size_t witness_sample = 0;
  /// Same ratio for the sup norm; never above one.
  double max_sup_ratio = 0.0;
  std::size_t candidates = 0;
  std::vector<std::size_t> histogram;
};

struct ConjectureReport {
  ConjectureOptions options;
  std::vector<ConjectureLevel> levels;
  double max_ratio = 0.0;
  int witness_level = 0;
  std::size_t witness_sample = 0;
  std::uint64_t witness_seed = 0;
  DyadicPath witness{0};
  /// Relative change of the witness norms under quadrature refinement.
  double quadrature_tolerance = 0.0;
  /// Ratios above this are counterexample candidates.
  double candidate_threshold = 1.0;
  std::size_t candidates = 0;
  bool sup_sanity = true;
};

/// r = ||pi_n w|| / ||w|| over Brownian samples w at the top level. Reports
/// the distribution only: no outcome is asserted.
inline ConjectureReport projection_norm_conjecture_search(const ConjectureOptions& opts) {
  for (int level : opts.levels) {
    if (level < 0 || level > opts.top_level) throw std::invalid_argument("conjecture search: level outside [0, top]");
  }
  if (!(opts.bin_width > 0.0) || !(opts.bin_limit > 0.0)) throw std::invalid_argument("conjecture search: bad histogram bins");
  opts.quad.validate();
  ConjectureReport r;
  r.options = opts;
  const auto bins = static_cast<std::size_t>(std::ceil(opts.bin_limit / opts.bin_width));
  std::vector<std::vector<double>> ratios(opts.levels.size());
  std::vector<double> sup_ratios(opts.levels.size(), 0.0);
  for (std::size_t s = 0; s < opts.samples; ++s) {
    const DyadicPath w = sample_brownian(opts.top_level, opts.seed + s);
    const double nw = sobolev_norm(w, opts.params, opts.quad);
    const double sw = sup_norm(w);
    for (std::size_t l = 0; l < opts.levels.size(); ++l) {
      const DyadicPath pw = project(w, opts.levels[l]);
      ratios[l].push_back(nw > 0.0 ? sobolev_norm(pw, opts.params, opts.quad) / nw : 1.0);
      if (sw > 0.0) sup_ratios[l] = std::max(sup_ratios[l], sup_norm(pw) / sw);
    }
  }
  for (std::size_t l = 0; l < opts.levels.size(); ++l) {
    ConjectureLevel lv;
    lv.level = opts.levels[l];
    lv.histogram.assign(bins + 1, 0);
    double sum = 0.0;
    for (std::size_t s = 0; s < ratios[l].size(); ++s) {
      const double x = ratios[l][s];
      sum += x;
      if (x > lv.max_ratio) {
        lv.max_ratio = x;
        lv.witness_sample = s;
      }
      lv.min_ratio = std::min(lv.min_ratio, x);
      const auto b = static_cast<std::size_t>(x / opts.bin_width);
      ++lv.histogram[std::min(b, bins)];
    }
    lv.mean_ratio = ratios[l].empty() ? 0.0 : sum / static_cast<double>(ratios[l].size());
    lv.max_sup_ratio = sup_ratios[l];
    r.sup_sanity = r.sup_sanity && lv.max_sup_ratio <= 1.0;
    if (lv.max_ratio > r.max_ratio || r.levels.empty()) {
      r.max_ratio = lv.max_ratio;
      r.witness_level = lv.level;
      r.witness_sample = lv.witness_sample;
    }
    r.levels.push_back(std::move(lv));
  }
  if (!r.levels.empty()) {
    r.witness_seed = opts.seed + r.witness_sample;
    r.witness = sample_brownian(opts.top_level, r.witness_seed);
    const double e_top = sobolev_refinement_check(r.witness, opts.params, opts.quad).relative_change;
    const double e_proj = sobolev_refinement_check(project(r.witness, r.witness_level), opts.params, opts.quad).relative_change;
    r.quadrature_tolerance = std::max({e_top, e_proj, std::numeric_limits<double>::epsilon()});
  }
  r.candidate_threshold = 1.0 + 10.0 * r.quadrature_tolerance;
  for (std::size_t l = 0; l < r.levels.size(); ++l) {
    for (double x : ratios[l]) r.levels[l].candidates += x > r.candidate_threshold ? 1 : 0;
    r.candidates += r.levels[l].candidates;
  }
  return r;
}

// ---------------------------------------------------------------------------
// density bound along the one-dimensional displacement

/// A histogram whose density against the Gaussian reference exceeds M.
class DensityBoundError : public std::invalid_argument {
 public:
  DensityBoundError(int which, std::size_t cell, double density, double bound)
      : std::invalid_argument("density of rho" + std::to_string(which) + " in cell " + std::to_string(cell) + " is " +
                              std::to_string(density) + " > M = " + std::to_string(bound)),
        which_(which), cell_(cell), density_(density) {}
  int which() const { return which_; }
  std::size_t cell() const { return cell_; }
  double density() const { return density_; }

 private:
  int which_;
  std::size_t cell_;
  double density_;
};

/// Linear piece of the monotone map: [x0, x1] -> [y0, y1] carrying mass.
struct MonotonePiece {
  std::size_t source_cell = 0;
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;
  double mass = 0.0;
};

/// Increasing rearrangement F1^{-1} o F0 between piecewise-constant
/// densities on a one-dimensional grid, as linear pieces. Optimal for every
/// strictly convex cost |x - y|^p, p > 1.
inline std::vector<MonotonePiece> monotone_map_pieces(const Histogram& rho0, const Histogram& rho1) {
  const GridSpec& g = rho0.grid;
  const double h = g.cell_width();
  const std::size_t m = rho0.masses.size();
  std::vector<MonotonePiece> out;
  std::size_t i = 0;
  std::size_t j = 0;
  double used0 = 0.0;
  double used1 = 0.0;
  while (true) {
    while (i < m && rho0.masses[i] - used0 <= 0.0) {
      ++i;
      used0 = 0.0;
    }
    while (j < m && rho1.masses[j] - used1 <= 0.0) {
      ++j;
      used1 = 0.0;
    }
    if (i >= m || j >= m) break;
    const double p0 = rho0.masses[i];
    const double p1 = rho1.masses[j];
    const double rest0 = p0 - used0;
    const double rest1 = p1 - used1;
    const bool close0 = rest0 <= rest1;
    const bool close1 = rest1 <= rest0;
    MonotonePiece piece;
    piece.source_cell = i;
    piece.mass = std::min(rest0, rest1);
    piece.x0 = g.edge(static_cast<int>(i)) + h * used0 / p0;
    piece.y0 = g.edge(static_cast<int>(j)) + h * used1 / p1;
    used0 += piece.mass;
    used1 += piece.mass;
    // an exhausted cell closes exactly at its edge
    piece.x1 = close0 ? g.edge(static_cast<int>(i) + 1) : g.edge(static_cast<int>(i)) + h * used0 / p0;
    piece.y1 = close1 ? g.edge(static_cast<int>(j) + 1) : g.edge(static_cast<int>(j)) + h * used1 / p1;
    if (close0) {
      ++i;
      used0 = 0.0;
    }
    if (close1) {
      ++j;
      used1 = 0.0;
    }
    out.push_back(piece);
  }
  return out;
}

struct DensityEstimateRow {
  double t = 0.0;
  std::size_t sets_checked = 0;
  /// min over sets of gamma(T_t(A)) - threshold(A).
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_first_cell = 0;
  std::size_t worst_end_cell = 0;
  bool passed = true;
};

struct DensityEstimateReport {
  double m = 0.0;
  /// Pointwise bound of the piecewise-constant densities against the
  /// continuous Gaussian; at least the cell-ratio bound M.
  double m_effective = 0.0;
  double p = 2.0;
  double absolute_tol = 1e-12;
  std::vector<DensityEstimateRow> rows;
  bool passed = true;
};

/// For each t and each dyadic block A of cells: gamma(T_t(A)) >= rho0(A) / M
/// up to the binning tolerance rho0(A) (1/M - 1/M_eff), T_t = (1 - t) Id + t T.
inline DensityEstimateReport displacement_density_estimate(const Histogram& rho0, const Histogram& rho1, double m_bound,
                                                           double p, const std::vector<double>& t_list,
                                                           double absolute_tol = 1e-12) {
  if (!(rho0.grid == rho1.grid)) throw std::invalid_argument("displacement_density_estimate: histograms live on different grids");
  if (rho0.grid.dim != 1) throw std::invalid_argument("displacement_density_estimate: only d = 1 is supported");
  if (!(p > 1.0)) throw std::invalid_argument("displacement_density_estimate: p must exceed 1");
  if (!(m_bound > 0.0)) throw std::invalid_argument("displacement_density_estimate: M must be positive");
  const GridSpec& g = rho0.grid;
  const auto ref = gaussian_reference(g);
  const double h = g.cell_width();
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  DensityEstimateReport r;
  r.m = m_bound;
  r.p = p;
  r.absolute_tol = absolute_tol;
  int which = 0;
  for (const Histogram* rho : {&rho0, &rho1}) {
    for (std::size_t c = 0; c < rho->masses.size(); ++c) {
      if (rho->masses[c] == 0.0) continue;
      const double density = rho->masses[c] / ref.histogram.masses[c];
      if (density > m_bound) throw DensityBoundError(which, c, density, m_bound);
      const double far = std::max(std::abs(g.edge(static_cast<int>(c))), std::abs(g.edge(static_cast<int>(c) + 1)));
      r.m_effective = std::max(r.m_effective, rho->masses[c] / h / (inv_sqrt_2pi * std::exp(-0.5 * far * far)));
    }
    ++which;
  }
  const double divisor = std::max(m_bound, r.m_effective);
  const auto pieces = monotone_map_pieces(rho0, rho1);
  const std::size_t m = rho0.masses.size();

  for (double t : t_list) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("displacement_density_estimate: t must lie in [0, 1]");
    // gamma mass of the image of each source cell
    std::vector<double> image(m, 0.0);
    for (const auto& pc : pieces) {
      const double a = (1.0 - t) * pc.x0 + t * pc.y0;
      const double b = (1.0 - t) * pc.x1 + t * pc.y1;
      image[pc.source_cell] += gaussian_interval_mass(a, b);
    }
    DensityEstimateRow row;
    row.t = t;
    for (std::size_t width = 1;; width *= 2) {
      for (std::size_t first = 0; first < m; first += width) {
        const std::size_t end = std::min(first + width, m);
        double mass = 0.0;
        double gam = 0.0;
        for (std::size_t c = first; c < end; ++c) {
          mass += rho0.masses[c];
          gam += image[c];
        }
        if (mass == 0.0) continue;
        ++row.sets_checked;
        const double margin = gam - (mass / divisor - absolute_tol);
        if (margin < row.worst_margin) {
          row.worst_margin = margin;
          row.worst_first_cell = first;
          row.worst_end_cell = end;
        }
      }
      if (width >= m) break;
    }
    row.passed = row.worst_margin >= 0.0;
    r.passed = r.passed && row.passed;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace wot
