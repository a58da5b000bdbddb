#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wot/rng.hpp"
#include "wot/transport.hpp"

namespace wot {

/// psi_j = min_i (phi_i + c_ij).
inline std::vector<double> c_transform(std::span<const double> phi, const Matrix& cost) {
  if (phi.size() != static_cast<std::size_t>(cost.rows())) throw std::invalid_argument("c_transform: size mismatch");
  std::vector<double> psi(static_cast<std::size_t>(cost.cols()), std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      psi[static_cast<std::size_t>(j)] = std::min(psi[static_cast<std::size_t>(j)], phi[static_cast<std::size_t>(i)] + cost(i, j));
    }
  }
  return psi;
}

/// Back-transform phi_i = max_j (psi_j - c_ij). Applied to c_transform(phi)
/// it never exceeds phi and is a fixed point of the next round trip.
inline std::vector<double> reverse_c_transform(std::span<const double> psi, const Matrix& cost) {
  if (psi.size() != static_cast<std::size_t>(cost.cols())) throw std::invalid_argument("reverse_c_transform: size mismatch");
  std::vector<double> phi(static_cast<std::size_t>(cost.rows()), -std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      phi[static_cast<std::size_t>(i)] = std::max(phi[static_cast<std::size_t>(i)], psi[static_cast<std::size_t>(j)] - cost(i, j));
    }
  }
  return phi;
}

// ---------------------------------------------------------------------------
// cyclical monotonicity

/// Thrown when exhaustive cycle enumeration would exceed the configured cap.
class CombinatorialCapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct CycleCheckOptions {
  int max_cycle_length = 4;
  double tolerance = 1e-9;
  /// Upper bound on the number of cycles enumerated exhaustively.
  double cycle_cap = 2e8;
  /// Random cycles instead of the exhaustive sweep when over the cap.
  bool allow_sampling = false;
  std::size_t samples = 1000000;
  std::uint64_t seed = 0;
};

struct CycleCheckReport {
  bool passed = true;
  /// max over cycles of sum c(x_k,y_k) - sum c(x_k,y_{k+1}); 0 when no cycle exists.
  double worst_violation = 0.0;
  /// Support pairs (row, col) of the worst cycle, in cycle order.
  std::vector<std::pair<int, int>> worst_cycle;
  std::size_t cycles_checked = 0;
  std::size_t support_size = 0;
  bool sampled = false;
};

/// Number of distinct cycles (up to rotation) of length 2..max_len on s pairs.
inline double count_cycles(std::size_t s, int max_len) {
  double total = 0.0;
  for (int len = 2; len <= max_len; ++len) {
    if (static_cast<std::size_t>(len) > s) break;
    double c = 1.0;
    for (int k = 0; k < len; ++k) c *= static_cast<double>(s - static_cast<std::size_t>(k));
    total += c / len;
  }
  return total;
}

namespace detail {

class CycleEnumerator {
 public:
  CycleEnumerator(const std::vector<std::pair<int, int>>& pairs, const Matrix& cost, CycleCheckReport& report)
      : pairs_(pairs), cost_(cost), report_(report) {}

  void run(int max_len) {
    chosen_.clear();
    used_.assign(pairs_.size(), 0);
    for (std::size_t first = 0; first < pairs_.size(); ++first) {
      chosen_.push_back(first);
      used_[first] = 1;
      extend(first, max_len, c(first, first), 0.0);
      used_[first] = 0;
      chosen_.pop_back();
    }
  }

  void evaluate(const std::vector<std::size_t>& cycle) {
    double diag = 0.0;
    double shifted = 0.0;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      diag += c(cycle[k], cycle[k]);
      shifted += c(cycle[k], cycle[(k + 1) % cycle.size()]);
    }
    record(cycle, diag - shifted);
  }

 private:
  /// c(x of pair p, y of pair q).
  double c(std::size_t p, std::size_t q) const { return cost_(pairs_[p].first, pairs_[q].second); }

  void extend(std::size_t first, int max_len, double diag, double shifted) {
    const std::size_t last = chosen_.back();
    if (chosen_.size() >= 2) record(chosen_, diag - (shifted + c(last, first)));
    if (static_cast<int>(chosen_.size()) == max_len) return;
    for (std::size_t next = first + 1; next < pairs_.size(); ++next) {
      if (used_[next]) continue;
      used_[next] = 1;
      chosen_.push_back(next);
      extend(first, max_len, diag + c(next, next), shifted + c(last, next));
      chosen_.pop_back();
      used_[next] = 0;
    }
  }

  void record(const std::vector<std::size_t>& cycle, double violation) {
    ++report_.cycles_checked;
    if (report_.cycles_checked == 1 || violation > report_.worst_violation) {
      report_.worst_violation = violation;
      report_.worst_cycle.clear();
      for (std::size_t p : cycle) report_.worst_cycle.push_back(pairs_[p]);
    }
  }

  const std::vector<std::pair<int, int>>& pairs_;
  const Matrix& cost_;
  CycleCheckReport& report_;
  std::vector<std::size_t> chosen_;
  std::vector<char> used_;
};

}  // namespace detail

/// Exhaustive c-cyclical monotonicity test over the plan support: every
/// cycle (x_1,y_1),...,(x_N,y_N) of distinct support pairs with N <= L must
/// satisfy sum c(x_i,y_i) <= sum c(x_i,y_{i+1}) up to the tolerance.
inline CycleCheckReport check_cyclical_monotonicity(const TransportPlan& plan, const Matrix& cost,
                                                    const CycleCheckOptions& opts = {}) {
  if (opts.max_cycle_length < 2) throw std::invalid_argument("check_cyclical_monotonicity: cycle length must be >= 2");
  const auto pairs = plan.support();
  CycleCheckReport report;
  report.support_size = pairs.size();
  const double total = count_cycles(pairs.size(), opts.max_cycle_length);
  detail::CycleEnumerator enumerator(pairs, cost, report);
  if (total <= opts.cycle_cap) {
    enumerator.run(opts.max_cycle_length);
  } else if (opts.allow_sampling) {
    report.sampled = true;
    GaussianSource rng(opts.seed);
    std::vector<std::size_t> cycle;
    for (std::size_t s = 0; s < opts.samples; ++s) {
      const auto len = static_cast<std::size_t>(2 + rng.below(static_cast<std::uint64_t>(opts.max_cycle_length - 1)));
      cycle.clear();
      while (cycle.size() < len) {
        const auto p = static_cast<std::size_t>(rng.below(pairs.size()));
        if (std::find(cycle.begin(), cycle.end(), p) == cycle.end()) cycle.push_back(p);
      }
      enumerator.evaluate(cycle);
    }
  } else {
    throw CombinatorialCapExceeded("check_cyclical_monotonicity: " + std::to_string(total) +
                                   " cycles exceed the cap " + std::to_string(opts.cycle_cap) +
                                   "; lower the cycle length or enable sampling");
  }
  if (report.cycles_checked == 0) report.worst_violation = 0.0;
  report.passed = report.worst_violation <= opts.tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// graph property

struct MongeMap {
  /// Target index per source; -1 for sources without mass.
  std::vector<int> target_of;
};

struct SplitRow {
  int source = 0;
  double row_mass = 0.0;
  /// (target, mass) for every support entry of the row.
  std::vector<std::pair<int, double>> masses;
};

struct SplitReport {
  std::vector<SplitRow> rows;
};

/// A map if every row carries at least (1 - tol) of its mass on one target,
/// otherwise the offending rows.
inline std::variant<MongeMap, SplitReport> extract_monge_map(const TransportPlan& plan, double tol = 1e-9) {
  MongeMap map;
  SplitReport split;
  const double thr = plan.support_threshold();
  for (Eigen::Index i = 0; i < plan.mass.rows(); ++i) {
    const double row = plan.mass.row(i).sum();
    if (row <= thr) {
      map.target_of.push_back(-1);
      continue;
    }
    Eigen::Index best = 0;
    const double top = plan.mass.row(i).maxCoeff(&best);
    if (top >= (1.0 - tol) * row) {
      map.target_of.push_back(static_cast<int>(best));
      continue;
    }
    SplitRow sr;
    sr.source = static_cast<int>(i);
    sr.row_mass = row;
    for (Eigen::Index j = 0; j < plan.mass.cols(); ++j) {
      if (plan.mass(i, j) > thr) sr.masses.emplace_back(static_cast<int>(j), plan.mass(i, j));
    }
    split.rows.push_back(std::move(sr));
  }
  if (!split.rows.empty()) return split;
  return map;
}

// ---------------------------------------------------------------------------
// potentials on the support

struct SupportSystemReport {
  bool passed = true;
  /// max |psi_j - phi_i - c_ij| over support entries.
  double worst_support_slack = 0.0;
  std::pair<int, int> worst_support_entry{-1, -1};
  /// max (psi_j - phi_i - c_ij) over all entries; <= tol when feasible.
  double worst_violation = -std::numeric_limits<double>::infinity();
  std::pair<int, int> worst_violation_entry{-1, -1};
};

/// Equality psi_j - phi_i = c_ij on the plan support, inequality elsewhere.
inline SupportSystemReport verify_support_system(const TransportPlan& plan, const DualPotentials& pot,
                                                 const Matrix& cost, double tol = 1e-9) {
  if (pot.phi.size() != plan.rows() || pot.psi.size() != plan.cols()) {
    throw std::invalid_argument("verify_support_system: potentials do not match the plan");
  }
  SupportSystemReport r;
  const double thr = plan.support_threshold();
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      const double gap = pot.psi[static_cast<std::size_t>(j)] - pot.phi[static_cast<std::size_t>(i)] - cost(i, j);
      if (gap > r.worst_violation) {
        r.worst_violation = gap;
        r.worst_violation_entry = {static_cast<int>(i), static_cast<int>(j)};
      }
      if (plan.mass(i, j) > thr && std::abs(gap) > r.worst_support_slack) {
        r.worst_support_slack = std::abs(gap);
        r.worst_support_entry = {static_cast<int>(i), static_cast<int>(j)};
      }
    }
  }
  r.passed = r.worst_support_slack <= tol && r.worst_violation <= tol;
  return r;
}

// ---------------------------------------------------------------------------
// gradient map for c(x,y) = |x - y|_2^p

/// grad_x |x - y|_2^p = p |x - y|^{p-2} (x - y).
inline Vec cost_gradient(const Vec& x, const Vec& y, double p) {
  if (x.size() != y.size()) throw std::invalid_argument("cost_gradient: dimension mismatch");
  if (!(p > 1.0)) throw std::invalid_argument("cost_gradient: p must exceed 1");
  Vec diff(x.size());
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff[i] = x[i] - y[i];
    r2 += diff[i] * diff[i];
  }
  if (r2 == 0.0) return Vec(x.size(), 0.0);
  const double scale = p * std::pow(std::sqrt(r2), p - 2.0);
  for (double& d : diff) d *= scale;
  return diff;
}

/// The unique y with grad_x c(x, y) = v: |x - y| = (|v|/p)^{1/(p-1)} and
/// x - y = v |x - y|^{2-p} / p.
inline Vec invert_cost_gradient(const Vec& x, const Vec& v, double p) {
  if (x.size() != v.size()) throw std::invalid_argument("invert_cost_gradient: dimension mismatch");
  if (!(p > 1.0)) throw std::invalid_argument("invert_cost_gradient: p must exceed 1");
  double vn2 = 0.0;
  for (double c : v) vn2 += c * c;
  if (vn2 == 0.0) return x;
  const double r = std::pow(std::sqrt(vn2) / p, 1.0 / (p - 1.0));
  const double scale = std::pow(r, 2.0 - p) / p;
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - v[i] * scale;
  return y;
}

}  // namespace wot
