#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wot/cost.hpp"
#include "wot/measure.hpp"

namespace wot {

inline constexpr double kDefaultSupportRatio = 1e-10;

/// Coupling matrix with its marginals. Support entries are those above
/// support_ratio times the largest entry.
struct TransportPlan {
  Matrix mass;
  std::vector<double> source_weights;
  std::vector<double> target_weights;
  double support_ratio = kDefaultSupportRatio;

  std::size_t rows() const { return static_cast<std::size_t>(mass.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(mass.cols()); }

  double support_threshold() const { return mass.size() == 0 ? 0.0 : support_ratio * mass.maxCoeff(); }

  bool in_support(std::size_t i, std::size_t j) const {
    return mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > support_threshold();
  }

  /// Support entries in row-major (lexicographic) order.
  std::vector<std::pair<int, int>> support() const {
    std::vector<std::pair<int, int>> out;
    const double thr = support_threshold();
    for (Eigen::Index i = 0; i < mass.rows(); ++i) {
      for (Eigen::Index j = 0; j < mass.cols(); ++j) {
        if (mass(i, j) > thr) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
    return out;
  }

  /// Largest absolute deviation of a row or column sum from its marginal.
  double marginal_error() const {
    double err = 0.0;
    for (Eigen::Index i = 0; i < mass.rows(); ++i) {
      err = std::max(err, std::abs(mass.row(i).sum() - source_weights[static_cast<std::size_t>(i)]));
    }
    for (Eigen::Index j = 0; j < mass.cols(); ++j) {
      err = std::max(err, std::abs(mass.col(j).sum() - target_weights[static_cast<std::size_t>(j)]));
    }
    return err;
  }

  /// l1 norm of the marginal residual (rows and columns).
  double marginal_l1_residual() const {
    double err = 0.0;
    for (Eigen::Index i = 0; i < mass.rows(); ++i) {
      err += std::abs(mass.row(i).sum() - source_weights[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index j = 0; j < mass.cols(); ++j) {
      err += std::abs(mass.col(j).sum() - target_weights[static_cast<std::size_t>(j)]);
    }
    return err;
  }

  double value(const Matrix& cost) const { return (mass.array() * cost.array()).sum(); }
};

/// Kantorovich pair: psi plays the role of phi^c, with psi_j - phi_i <= c_ij.
struct DualPotentials {
  std::vector<double> phi;
  std::vector<double> psi;

  /// sum_j psi_j b_j - sum_i phi_i a_i.
  double objective(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) s += psi[j] * b[j];
    for (std::size_t i = 0; i < phi.size(); ++i) s -= phi[i] * a[i];
    return s;
  }

  /// max_ij (psi_j - phi_i - c_ij); nonpositive for feasible potentials.
  double max_infeasibility(const Matrix& cost) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
      for (Eigen::Index j = 0; j < cost.cols(); ++j) {
        worst = std::max(worst, psi[static_cast<std::size_t>(j)] - phi[static_cast<std::size_t>(i)] - cost(i, j));
      }
    }
    return worst;
  }
};

struct ExactSolverOptions {
  std::size_t size_cap = 512;
  /// After optimality, test whether a zero-reduced-cost edge leads to a
  /// different optimal vertex (dual degeneracy with a nonzero step).
  bool probe_uniqueness = false;
  /// 0 selects 20 * m * n + 1000.
  std::size_t max_pivots = 0;
};

struct ExactSolution {
  TransportPlan plan;
  DualPotentials potentials;
  double value = 0.0;
  double duality_gap = 0.0;
  std::size_t pivots = 0;
  std::size_t degenerate_pivots = 0;
  bool used_bland = false;
  /// Set when probe_uniqueness found an alternative optimal vertex.
  std::optional<bool> alternative_optimum;
};

namespace detail {

/// Transportation simplex on the bipartite basis tree.
///
/// Start: northwest corner (m + n - 1 basic cells, degenerate zeros kept).
/// Entering cell: most negative reduced cost, lowest row-major index on ties;
/// after a run of degenerate pivots the rule switches to Bland's (first
/// negative in index order) which cannot cycle. Leaving cell: smallest
/// flow on the cycle's minus cells, lowest index on ties.
class TransportationSimplex {
 public:
  TransportationSimplex(const std::vector<double>& a, const std::vector<double>& b, const Matrix& cost)
      : m_(a.size()), n_(b.size()), a_(a), b_(b), cost_(cost), flow_(Matrix::Zero(cost.rows(), cost.cols())),
        basic_(m_ * n_, 0), u_(m_, 0.0), v_(n_, 0.0) {
    const double scale = cost.size() == 0 ? 1.0 : cost.cwiseAbs().maxCoeff();
    tol_ = 1e-12 * std::max(1.0, scale);
  }

  void solve(const ExactSolverOptions& opts) {
    northwest_corner();
    const std::size_t cap = opts.max_pivots ? opts.max_pivots : 20 * m_ * n_ + 1000;
    const std::size_t degenerate_limit = 10 * (m_ + n_);
    std::size_t degenerate_run = 0;
    while (true) {
      compute_potentials();
      const std::size_t enter = used_bland_ ? price_bland() : price_dantzig();
      if (enter == npos) break;
      if (pivots_ >= cap) throw std::runtime_error("solve_exact: pivot limit exceeded");
      const double theta = pivot(enter);
      ++pivots_;
      if (theta <= 0.0) {
        ++degenerate_pivots_;
        if (++degenerate_run > degenerate_limit) used_bland_ = true;
      } else {
        degenerate_run = 0;
      }
    }
  }

  /// True if some nonbasic zero-reduced-cost cell admits a positive step.
  bool has_alternative_optimum() {
    compute_potentials();
    const double mass_tol = 1e-12;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t id = i * n_ + j;
        if (basic_[id]) continue;
        if (reduced_cost(i, j) > 1e3 * tol_) continue;
        const auto cycle = find_cycle(i, j);
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cycle.size(); k += 2) theta = std::min(theta, flow_at(cycle[k]));
        if (theta > mass_tol) return true;
      }
    }
    return false;
  }

  const Matrix& flow() const { return flow_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  std::size_t pivots() const { return pivots_; }
  std::size_t degenerate_pivots() const { return degenerate_pivots_; }
  bool used_bland() const { return used_bland_; }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  double& flow_at(std::size_t id) {
    return flow_(static_cast<Eigen::Index>(id / n_), static_cast<Eigen::Index>(id % n_));
  }
  double cost_at(std::size_t i, std::size_t j) const {
    return cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double reduced_cost(std::size_t i, std::size_t j) const { return cost_at(i, j) - u_[i] - v_[j]; }

  void northwest_corner() {
    std::vector<double> rs = a_;
    std::vector<double> cs = b_;
    std::size_t i = 0;
    std::size_t j = 0;
    basis_.clear();
    while (true) {
      const double x = std::min(rs[i], cs[j]);
      const std::size_t id = i * n_ + j;
      flow_at(id) = std::max(x, 0.0);
      basic_[id] = 1;
      basis_.push_back(id);
      rs[i] -= x;
      cs[j] -= x;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (i + 1 == m_) {
        ++j;
      } else if (j + 1 == n_) {
        ++i;
      } else if (rs[i] <= cs[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_adjacency() {
    row_adj_.assign(m_, {});
    col_adj_.assign(n_, {});
    for (std::size_t id : basis_) {
      row_adj_[id / n_].push_back(id);
      col_adj_[id % n_].push_back(id);
    }
  }

  void compute_potentials() {
    build_adjacency();
    std::vector<char> row_seen(m_, 0);
    std::vector<char> col_seen(n_, 0);
    // node encoding: rows 0..m-1, columns m..m+n-1
    std::vector<std::size_t> stack{0};
    row_seen[0] = 1;
    u_[0] = 0.0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node < m_) {
        for (std::size_t id : row_adj_[node]) {
          const std::size_t j = id % n_;
          if (col_seen[j]) continue;
          col_seen[j] = 1;
          v_[j] = cost_at(node, j) - u_[node];
          stack.push_back(m_ + j);
        }
      } else {
        const std::size_t j = node - m_;
        for (std::size_t id : col_adj_[j]) {
          const std::size_t i = id / n_;
          if (row_seen[i]) continue;
          row_seen[i] = 1;
          u_[i] = cost_at(i, j) - v_[j];
          stack.push_back(i);
        }
      }
    }
  }

  std::size_t price_dantzig() const {
    double best = -tol_;
    std::size_t enter = npos;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t id = i * n_ + j;
        if (basic_[id]) continue;
        const double r = reduced_cost(i, j);
        if (r < best) {
          best = r;
          enter = id;
        }
      }
    }
    return enter;
  }

  std::size_t price_bland() const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t id = i * n_ + j;
        if (!basic_[id] && reduced_cost(i, j) < -tol_) return id;
      }
    }
    return npos;
  }

  /// Basic cells on the tree path from column j back to row i. Entering
  /// (i, j) with sign +, these alternate -, +, -, ... starting at column j.
  std::vector<std::size_t> find_cycle(std::size_t i, std::size_t j) const {
    const std::size_t nodes = m_ + n_;
    std::vector<std::size_t> parent_cell(nodes, npos);
    std::vector<std::size_t> parent_node(nodes, npos);
    std::vector<char> seen(nodes, 0);
    std::vector<std::size_t> queue{i};
    seen[i] = 1;
    const std::size_t goal = m_ + j;
    for (std::size_t head = 0; head < queue.size() && !seen[goal]; ++head) {
      const std::size_t node = queue[head];
      const auto& adj = node < m_ ? row_adj_[node] : col_adj_[node - m_];
      for (std::size_t id : adj) {
        const std::size_t next = node < m_ ? m_ + id % n_ : id / n_;
        if (seen[next]) continue;
        seen[next] = 1;
        parent_cell[next] = id;
        parent_node[next] = node;
        queue.push_back(next);
      }
    }
    if (!seen[goal]) throw std::logic_error("solve_exact: basis tree is not spanning");
    std::vector<std::size_t> cycle;
    for (std::size_t node = goal; node != i; node = parent_node[node]) cycle.push_back(parent_cell[node]);
    return cycle;
  }

  double pivot(std::size_t enter) {
    const std::size_t i = enter / n_;
    const std::size_t j = enter % n_;
    const auto cycle = find_cycle(i, j);
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = npos;
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      const double x = flow_at(cycle[k]);
      if (x < theta || (x == theta && cycle[k] < leave)) {
        theta = x;
        leave = cycle[k];
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      double& x = flow_at(cycle[k]);
      x = (k % 2 == 0) ? std::max(x - theta, 0.0) : x + theta;
    }
    flow_at(enter) = theta;
    flow_at(leave) = 0.0;
    basic_[enter] = 1;
    basic_[leave] = 0;
    *std::find(basis_.begin(), basis_.end(), leave) = enter;
    return theta;
  }

  std::size_t m_;
  std::size_t n_;
  const std::vector<double>& a_;
  const std::vector<double>& b_;
  const Matrix& cost_;
  Matrix flow_;
  std::vector<char> basic_;
  std::vector<std::size_t> basis_;
  std::vector<std::vector<std::size_t>> row_adj_;
  std::vector<std::vector<std::size_t>> col_adj_;
  std::vector<double> u_;
  std::vector<double> v_;
  double tol_ = 0.0;
  std::size_t pivots_ = 0;
  std::size_t degenerate_pivots_ = 0;
  bool used_bland_ = false;
};

}  // namespace detail

/// Exact discrete optimal transport between weight vectors a and b.
inline ExactSolution solve_exact(const std::vector<double>& a, const std::vector<double>& b, const Matrix& cost,
                                 const ExactSolverOptions& opts = {}) {
  if (a.empty() || b.empty()) throw std::invalid_argument("solve_exact: empty marginal");
  if (static_cast<std::size_t>(cost.rows()) != a.size() || static_cast<std::size_t>(cost.cols()) != b.size()) {
    throw std::invalid_argument("solve_exact: cost matrix shape does not match the marginals");
  }
  if (a.size() > opts.size_cap || b.size() > opts.size_cap) {
    throw std::length_error("solve_exact: instance " + std::to_string(a.size()) + "x" + std::to_string(b.size()) +
                            " exceeds the size cap " + std::to_string(opts.size_cap));
  }
  if (!cost.allFinite()) throw std::invalid_argument("solve_exact: costs must be finite");
  double sa = 0.0;
  double sb = 0.0;
  for (double x : a) sa += x;
  for (double x : b) sb += x;
  if (std::abs(sa - sb) > 1e-9) throw std::invalid_argument("solve_exact: marginals carry different total mass");

  detail::TransportationSimplex simplex(a, b, cost);
  simplex.solve(opts);

  ExactSolution out;
  out.plan.mass = simplex.flow();
  out.plan.source_weights = a;
  out.plan.target_weights = b;
  out.potentials.phi.resize(a.size());
  out.potentials.psi = simplex.v();
  for (std::size_t i = 0; i < a.size(); ++i) out.potentials.phi[i] = -simplex.u()[i];
  out.value = out.plan.value(cost);
  out.duality_gap = out.value - out.potentials.objective(a, b);
  out.pivots = simplex.pivots();
  out.degenerate_pivots = simplex.degenerate_pivots();
  out.used_bland = simplex.used_bland();
  if (opts.probe_uniqueness) out.alternative_optimum = simplex.has_alternative_optimum();
  return out;
}

template <class Point>
ExactSolution solve_exact(const DiscreteMeasure<Point>& mu0, const DiscreteMeasure<Point>& mu1, const Matrix& cost,
                          const ExactSolverOptions& opts = {}) {
  return solve_exact(mu0.weights(), mu1.weights(), cost, opts);
}

}  // namespace wot
