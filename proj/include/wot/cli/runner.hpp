#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "wot/cli/config.hpp"
#include "wot/io.hpp"
#include "wot/sinkhorn.hpp"
#include "wot/version.hpp"
#include "wot/wot.hpp"

namespace wot::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kCheckFailed = 2 };

/// Independent stream seed for one use of the run seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Named pass/fail checks, result blocks and CSV tables of one run.
class Report {
 public:
  void check(const std::string& name, bool passed, json detail = json::object()) {
    json c{{"name", name}, {"passed", passed}};
    for (auto& [k, v] : detail.items()) c[k] = v;
    checks_.push_back(std::move(c));
  }

  io::CsvTable& table(const std::string& name, std::vector<std::string> header) {
    tables_.emplace_back(name, io::CsvTable(std::move(header)));
    return tables_.back().second;
  }

  json& results() { return results_; }

  bool passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const json& c) { return c["passed"].get<bool>(); });
  }

  std::vector<std::string> failed() const {
    std::vector<std::string> out;
    for (const auto& c : checks_) {
      if (!c["passed"].get<bool>()) out.push_back(c["name"].get<std::string>());
    }
    return out;
  }

  const json& checks() const { return checks_; }

  /// report.json plus one CSV per table; nothing time- or host-dependent.
  void write(const ExperimentConfig& cfg) const {
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    const std::vector<std::string> preamble{"version: wot " + std::string(kVersion), "config: " + cfg.resolved.dump()};
    json files = json::array();
    for (const auto& [name, t] : tables_) {
      std::ofstream os(dir / (name + ".csv"), std::ios::binary);
      t.write(os, preamble);
      if (!os) throw std::runtime_error("cannot write " + (dir / (name + ".csv")).string());
      files.push_back(name + ".csv");
    }
    json report{{"version", std::string(kVersion)},
                {"rng", std::string(kGaussianAlgorithm)},
                {"subcommand", cfg.subcommand},
                {"config", cfg.resolved},
                {"passed", passed()},
                {"checks", checks_},
                {"results", results_},
                {"tables", std::move(files)}};
    std::ofstream os(dir / "report.json", std::ios::binary);
    os << report.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  }

 private:
  json checks_ = json::array();
  json results_ = json::object();
  std::list<std::pair<std::string, io::CsvTable>> tables_;
};

namespace detail {

/// Sweep lists a subcommand does not read must stay empty.
inline void allow_sweeps(const ExperimentConfig& cfg, std::initializer_list<std::string_view> used) {
  auto reject = [&](std::string_view name, bool given) {
    if (given && std::find(used.begin(), used.end(), name) == used.end()) {
      throw ConfigError("sweep." + std::string(name), "not used by subcommand " + cfg.subcommand);
    }
  };
  reject("levels", !cfg.sweep.levels.empty());
  reject("p_values", !cfg.sweep.p_values.empty());
  reject("t_values", !cfg.sweep.t_values.empty());
  reject("panels", !cfg.sweep.panels.empty());
  reject("costs", !cfg.sweep.costs.empty());
  reject("cells_per_axis", !cfg.sweep.cells_per_axis.empty());
}

inline std::vector<std::string> checked_list(Section& ex, std::string_view key, const std::vector<std::string>& def,
                                             const std::vector<std::string>& allowed) {
  auto v = ex.strings(key, def);
  for (const auto& s : v) {
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      throw ConfigError(ex.full(key), "unknown entry \"" + s + "\"");
    }
  }
  return v;
}

inline bool has(const std::vector<std::string>& v, std::string_view s) { return std::find(v.begin(), v.end(), s) != v.end(); }

inline std::vector<int> to_int(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

inline void require_ascending(const std::string& key, const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw ConfigError(key, "must be strictly ascending");
  }
}

inline void require_ascending(const std::string& key, const std::vector<std::int64_t>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw ConfigError(key, "must be strictly ascending");
  }
}

/// Quadrature of int_0^1 2 (1 - u) u^a du on dyadic panels towards 0, where
/// u^a is smooth; the closed form is not used.
inline double quadrature_embedding_constant(const SobolevParams& params) {
  const double a = params.embedding_exponent();
  const auto rule = gauss_legendre(20);
  double sum = 0.0;
  double hi = 1.0;
  for (int j = 0; j < 200; ++j) {
    const double lo = hi / 2;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = lo + (hi - lo) * rule.nodes[q];
      sum += (hi - lo) * rule.weights[q] * 2.0 * (1.0 - u) * std::pow(u, a);
    }
    hi = lo;
  }
  return std::pow(sum, 1.0 / params.power());
}

/// Minimum over permutations of sum_i c(i, s(i)) / n.
inline double assignment_minimum(const Matrix& c) {
  const auto n = static_cast<std::size_t>(c.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += c(static_cast<Eigen::Index>(i), perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

inline std::vector<Vec> gaussian_points(std::size_t n, std::size_t d, GaussianSource& rng, double shift = 0.0) {
  std::vector<Vec> pts(n, Vec(d));
  for (auto& p : pts) {
    for (double& x : p) x = rng.normal();
    p[0] += shift;
  }
  return pts;
}

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

/// Cost by name: l2_squared, lp_squared, linf_squared, sobolev, warped_sup.
inline CostSpec named_cost(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "l2_squared") return CostSpec::lp_squared(2.0);
  if (name == "lp_squared") return std::isinf(cfg.cost.p) ? CostSpec::linf_squared() : CostSpec::lp_squared(cfg.cost.p);
  if (name == "linf_squared") return CostSpec::linf_squared();
  if (name == "sobolev") return CostSpec::sobolev_p(cfg.cost.p, cfg.sobolev, cfg.quadrature);
  if (name == "warped_sup") return CostSpec::warped_sup(to_matrix(cfg.cost.warp));
  throw ConfigError("sweep.costs", "unknown cost \"" + name + "\"");
}

/// The [cost] section as a squared (power 2) cost on R^d.
inline CostSpec squared_cost(const ExperimentConfig& cfg) {
  if (cfg.cost.kind == "lp_squared") return std::isinf(cfg.cost.p) ? CostSpec::linf_squared() : CostSpec::lp_squared(cfg.cost.p);
  if (cfg.cost.kind == "linf_squared") return CostSpec::linf_squared();
  if (cfg.cost.kind == "warped_sup") return CostSpec::warped_sup(to_matrix(cfg.cost.warp));
  throw ConfigError("cost.kind", "subcommand " + cfg.subcommand + " needs a squared cost on R^d, got " + cfg.cost.kind);
}

inline json path_rows(const DyadicPath& w) {
  json knots = json::array();
  for (double x : w.knots()) knots.push_back(io::number(x));
  return json{{"level", w.level()}, {"knots", std::move(knots)}};
}

inline json pairs_json(const std::vector<std::pair<int, int>>& v) {
  json a = json::array();
  for (auto [x, y] : v) a.push_back(json::array({x, y}));
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// norm

inline void run_norm(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"panels"});
  const auto checks = detail::checked_list(ex, "checks", {"embedding", "linear", "gradient"}, {"embedding", "linear", "gradient"});
  const auto samples = static_cast<std::size_t>(ex.integer("samples", 1000, 1, 1000000));
  const int level = static_cast<int>(ex.integer("level", 8, 0, 14));
  const int linear_level = static_cast<int>(ex.integer("linear_level", 8, 0, 14));
  const auto gradient_samples = static_cast<std::size_t>(ex.integer("gradient_samples", 100, 1, 100000));
  const int gradient_level = static_cast<int>(ex.integer("gradient_level", 4, 0, 12));
  const double fd_step = ex.real("fd_step", 1e-4);
  if (!(fd_step > 0.0)) throw ConfigError("experiment.fd_step", "must be positive");
  ex.finish();
  const int p0 = cfg.quadrature.panels_per_cell;
  if (cfg.sweep.panels.empty()) cfg.sweep.panels = {p0, 2 * p0, 4 * p0};
  cfg.resolved["sweep"]["panels"] = cfg.sweep.panels;

  const SobolevParams& params = cfg.sobolev;
  const auto& tol = cfg.tolerance;
  const double c = params.c_embed();

  if (detail::has(checks, "embedding")) {
    log << "norm: embedding inequality on " << samples << " paths at level " << level << '\n';
    const double c_quad = detail::quadrature_embedding_constant(params);
    const double c_rel = std::abs(c - c_quad) / c;
    rep.check("embedding_constant", c_rel <= tol.at("constant_rel"),
              {{"closed_form", c}, {"quadrature", c_quad}, {"relative_difference", c_rel}});
    auto& t = rep.table("embedding", {"sample", "seed", "sobolev_norm", "cameron_martin_norm", "ratio"});
    double worst = 0.0;
    std::size_t witness = 0;
    const std::uint64_t base = stream_seed(cfg.seed, 1);
    for (std::size_t s = 0; s < samples; ++s) {
      const DyadicPath w = sample_brownian(level, base + s);
      const double n = sobolev_norm(w, params, cfg.quadrature);
      const double h = cameron_martin_norm(w);
      const double ratio = h > 0.0 ? n / (c * h) : 0.0;
      if (ratio > worst) {
        worst = ratio;
        witness = s;
      }
      t.row() << s << std::to_string(base + s) << n << h << ratio;
    }
    rep.check("embedding_inequality", worst <= 1.0 + tol.at("embedding_rel"),
              {{"max_ratio", worst}, {"witness_sample", witness}, {"samples", samples}});
  }

  if (detail::has(checks, "linear")) {
    log << "norm: linear path over " << cfg.sweep.panels.size() << " panel counts\n";
    // int int |t-s|^b for b = 2k - 1 - 2k gamma
    const double b = params.power() - params.kernel_exponent();
    const double exact = std::pow(2.0 / ((b + 1.0) * (b + 2.0)), 1.0 / params.power());
    const DyadicPath w = DyadicPath::from_function(linear_level, [](double s) { return s; });
    auto& t = rep.table("linear", {"panels_per_cell", "sobolev_norm", "exact", "relative_error"});
    double worst = 0.0;
    for (auto panels : cfg.sweep.panels) {
      const QuadratureSpec q{static_cast<int>(panels), cfg.quadrature.gauss_points};
      const double n = sobolev_norm(w, params, q);
      const double rel = std::abs(n - exact) / exact;
      worst = std::max(worst, rel);
      t.row() << static_cast<int>(panels) << n << exact << rel;
    }
    rep.check("linear_path", worst <= tol.at("linear_rel"), {{"exact", exact}, {"max_relative_error", worst}});
  }

  if (detail::has(checks, "gradient")) {
    log << "norm: directional derivatives on " << gradient_samples << " pairs\n";
    auto& t = rep.table("gradient", {"sample", "derivative", "finite_difference", "relative_error", "bound", "bound_holds"});
    double worst = 0.0;
    bool bound_ok = true;
    const std::uint64_t bw = stream_seed(cfg.seed, 2);
    const std::uint64_t bh = stream_seed(cfg.seed, 3);
    for (std::size_t s = 0; s < gradient_samples; ++s) {
      const DyadicPath w = sample_brownian(gradient_level, bw + s);
      const DyadicPath h = sample_brownian(gradient_level, bh + s);
      const double d = sobolev_directional_derivative(w, h, params, cfg.quadrature);
      const double fd = (sobolev_energy(combine(1.0, w, fd_step, h), params, cfg.quadrature) -
                         sobolev_energy(combine(1.0, w, -fd_step, h), params, cfg.quadrature)) /
                        (2.0 * fd_step);
      const double rel = std::abs(d - fd) / std::max(std::abs(fd), std::numeric_limits<double>::min());
      const double bound = params.power() * std::pow(sobolev_norm(w, params, cfg.quadrature), params.power() - 1) *
                           sobolev_norm(h, params, cfg.quadrature);
      const bool holds = std::abs(d) <= bound * (1.0 + 1e-12);
      worst = std::max(worst, rel);
      bound_ok = bound_ok && holds;
      t.row() << s << d << fd << rel << bound << holds;
    }
    rep.check("gradient_finite_difference", worst <= tol.at("gradient_rel"), {{"max_relative_error", worst}});
    rep.check("gradient_bound", bound_ok);
  }
}

// ---------------------------------------------------------------------------
// ot

inline void run_ot(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"costs", "p_values"});
  const auto checks = detail::checked_list(ex, "checks", {"lp", "cycles", "monge", "inversion"},
                                           {"lp", "cycles", "monge", "inversion", "sinkhorn"});
  const auto instances = static_cast<std::size_t>(ex.integer("instances", 50, 1, 100000));
  const auto min_points = static_cast<std::size_t>(ex.integer("min_points", 2, 1, 8));
  const auto max_points = static_cast<std::size_t>(ex.integer("max_points", 7, 1, 8));
  if (max_points < min_points) throw ConfigError("experiment.max_points", "must be >= min_points");
  const auto dim = static_cast<std::size_t>(ex.integer("dim", 2, 1, 16));
  const int path_level = static_cast<int>(ex.integer("path_level", 3, 0, 10));
  const int max_cycle = static_cast<int>(ex.integer("max_cycle_length", 4, 2, 8));
  const auto monge_instances = static_cast<std::size_t>(ex.integer("monge_instances", 50, 1, 100000));
  const auto monge_points = static_cast<std::size_t>(ex.integer("monge_points", 6, 1, 512));
  const auto swap = ex.reals("swap", {0.0, 1.0, 2.0, 5.0});
  if (swap.size() != 4) throw ConfigError("experiment.swap", "expects [x1, x2, y1, y2]");
  const auto inv_dims = ex.integers("inversion_dims", {1, 2, 3});
  const auto inv_samples = static_cast<std::size_t>(ex.integer("inversion_samples", 20, 1, 1000000));
  const double sinkhorn_eps = ex.real("sinkhorn_epsilon", 0.05);
  if (!(sinkhorn_eps > 0.0)) throw ConfigError("experiment.sinkhorn_epsilon", "must be positive");
  ex.finish();
  for (auto d : inv_dims) {
    if (d < 1) throw ConfigError("experiment.inversion_dims", "entries must be positive");
  }
  if (cfg.sweep.costs.empty()) cfg.sweep.costs = {"l2_squared", "linf_squared", "sobolev"};
  if (cfg.sweep.p_values.empty()) cfg.sweep.p_values = {1.5, 2.0, 3.0, 4.0};
  for (double p : cfg.sweep.p_values) {
    if (!(p > 1.0) || std::isinf(p)) throw ConfigError("sweep.p_values", "gradient inversion needs 1 < p < inf");
  }
  std::vector<CostSpec> costs;
  for (const auto& name : cfg.sweep.costs) {
    costs.push_back(detail::named_cost(name, cfg));
    if (name == "warped_sup" && static_cast<std::size_t>(costs.back().warp().rows()) != dim) {
      throw ConfigError("cost.warp", "size must match experiment.dim");
    }
  }
  cfg.resolved["sweep"]["costs"] = cfg.sweep.costs;
  cfg.resolved["sweep"]["p_values"] = cfg.sweep.p_values;
  const auto& tol = cfg.tolerance;

  if (detail::has(checks, "lp") || detail::has(checks, "cycles")) {
    log << "ot: " << instances << " instances x " << costs.size() << " costs\n";
    auto& t = rep.table("instances", {"instance", "cost", "n", "value", "brute_force", "abs_error", "duality_gap",
                                      "support_slack", "worst_dual_violation", "cycles_checked", "worst_cycle_violation"});
    double worst_err = 0.0;
    double worst_gap = 0.0;
    bool slack_ok = true;
    bool cycles_ok = true;
    double worst_cycle = -std::numeric_limits<double>::infinity();
    GaussianSource rng(stream_seed(cfg.seed, 4));
    const std::uint64_t path_base = stream_seed(cfg.seed, 5);
    CycleCheckOptions copt;
    copt.max_cycle_length = max_cycle;
    copt.tolerance = tol.at("cycle");
    for (std::size_t inst = 0; inst < instances; ++inst) {
      const std::size_t n = min_points + inst % (max_points - min_points + 1);
      const auto a = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(n, dim, rng));
      const auto b = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(n, dim, rng));
      std::vector<DyadicPath> pa;
      std::vector<DyadicPath> pb;
      for (std::size_t i = 0; i < n; ++i) {
        pa.push_back(sample_brownian(path_level, path_base + 2 * (inst * 8 + i)));
        pb.push_back(sample_brownian(path_level, path_base + 2 * (inst * 8 + i) + 1));
      }
      const auto wa = DiscreteMeasure<DyadicPath>::uniform(pa);
      const auto wb = DiscreteMeasure<DyadicPath>::uniform(pb);
      for (std::size_t k = 0; k < costs.size(); ++k) {
        const Matrix c = costs[k].norm() == GroundNorm::sobolev ? build_cost_matrix(wa, wb, costs[k]) : build_cost_matrix(a, b, costs[k]);
        const auto sol = solve_exact(a.weights(), b.weights(), c);
        const double brute = detail::assignment_minimum(c);
        const double err = std::abs(sol.value - brute);
        const auto sup = verify_support_system(sol.plan, sol.potentials, c, tol.at("support"));
        const auto cyc = check_cyclical_monotonicity(sol.plan, c, copt);
        worst_err = std::max(worst_err, err);
        worst_gap = std::max(worst_gap, std::abs(sol.duality_gap));
        slack_ok = slack_ok && sup.passed;
        cycles_ok = cycles_ok && cyc.passed;
        worst_cycle = std::max(worst_cycle, cyc.worst_violation);
        t.row() << inst << cfg.sweep.costs[k] << n << sol.value << brute << err << sol.duality_gap << sup.worst_support_slack
                << sup.worst_violation << cyc.cycles_checked << cyc.worst_violation;
      }
    }
    if (detail::has(checks, "lp")) {
      rep.check("lp_brute_force", worst_err <= tol.at("lp_abs"), {{"max_abs_error", worst_err}});
      rep.check("duality_gap", worst_gap <= tol.at("lp_abs"), {{"max_abs_gap", worst_gap}});
      rep.check("complementary_slackness", slack_ok);
    }
    if (detail::has(checks, "cycles")) {
      rep.check("cyclical_monotonicity", cycles_ok, {{"max_cycle_length", max_cycle}, {"worst_violation", io::number(worst_cycle)}});
    }
  }

  if (detail::has(checks, "cycles")) {
    const double x1 = swap[0], x2 = swap[1], y1 = swap[2], y2 = swap[3];
    Matrix c(2, 2);
    c << (x1 - y1) * (x1 - y1), (x1 - y2) * (x1 - y2), (x2 - y1) * (x2 - y1), (x2 - y2) * (x2 - y2);
    TransportPlan swapped;
    swapped.mass = Matrix::Zero(2, 2);
    swapped.mass(0, 1) = 0.5;
    swapped.mass(1, 0) = 0.5;
    swapped.source_weights = {0.5, 0.5};
    swapped.target_weights = {0.5, 0.5};
    const auto r = check_cyclical_monotonicity(swapped, c, CycleCheckOptions{2, tol.at("cycle")});
    const double predicted = 2.0 * (x2 - x1) * (y2 - y1);
    const bool ok = !r.passed && std::abs(r.worst_violation - predicted) <= 1e-12 * std::max(1.0, std::abs(predicted));
    rep.check("swap_counterexample_flagged", ok, {{"predicted_violation", predicted}, {"measured_violation", r.worst_violation}});
    rep.results()["swap_counterexample"] = io::to_json(r);
  }

  if (detail::has(checks, "monge")) {
    log << "ot: Monge map extraction on " << monge_instances << " instances\n";
    const CostSpec cost = detail::squared_cost(cfg);
    auto& t = rep.table("monge", {"instance", "n", "result", "split_rows"});
    GaussianSource rng(stream_seed(cfg.seed, 6));
    bool all_maps = true;
    for (std::size_t inst = 0; inst < monge_instances; ++inst) {
      const auto a = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(monge_points, dim, rng));
      const auto b = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(monge_points, dim, rng));
      const auto sol = solve_exact(a, b, build_cost_matrix(a, b, cost));
      const auto out = extract_monge_map(sol.plan);
      const bool is_map = std::holds_alternative<MongeMap>(out);
      all_maps = all_maps && is_map;
      t.row() << inst << monge_points << (is_map ? "map" : "split") << (is_map ? std::size_t{0} : std::get<SplitReport>(out).rows.size());
    }
    rep.check("monge_generic", all_maps, {{"instances", monge_instances}, {"cost", cost.name()}});
    const auto a = DiscreteMeasure<Vec>::uniform({{0.0}});
    const auto b = DiscreteMeasure<Vec>::uniform({{-1.0}, {1.0}});
    const auto out = extract_monge_map(solve_exact(a, b, build_cost_matrix(a, b, CostSpec::lp_squared(2.0))).plan);
    rep.check("monge_split_reported", std::holds_alternative<SplitReport>(out));
    rep.results()["split_instance"] = io::to_json(out);
  }

  if (detail::has(checks, "inversion")) {
    auto& t = rep.table("inversion", {"p", "d", "samples", "max_relative_error"});
    GaussianSource rng(stream_seed(cfg.seed, 7));
    double worst = 0.0;
    for (double p : cfg.sweep.p_values) {
      for (auto d : inv_dims) {
        double w = 0.0;
        for (std::size_t s = 0; s < inv_samples; ++s) {
          const Vec x = detail::gaussian_points(1, static_cast<std::size_t>(d), rng)[0];
          const Vec y = detail::gaussian_points(1, static_cast<std::size_t>(d), rng)[0];
          const Vec back = invert_cost_gradient(x, cost_gradient(x, y, p), p);
          for (std::size_t i = 0; i < y.size(); ++i) w = std::max(w, std::abs(back[i] - y[i]) / std::max(1.0, std::abs(y[i])));
        }
        worst = std::max(worst, w);
        t.row() << p << static_cast<int>(d) << inv_samples << w;
      }
    }
    rep.check("gradient_inversion", worst <= tol.at("inversion"), {{"max_relative_error", worst}});
  }

  if (detail::has(checks, "sinkhorn")) {
    auto& t = rep.table("sinkhorn", {"instance", "epsilon", "value", "exact", "converged", "iterations", "residual"});
    GaussianSource rng(stream_seed(cfg.seed, 8));
    const CostSpec cost = detail::squared_cost(cfg);
    bool all = true;
    for (std::size_t inst = 0; inst < std::min<std::size_t>(instances, 10); ++inst) {
      const auto a = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(max_points, dim, rng));
      const auto b = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(max_points, dim, rng));
      const Matrix c = build_cost_matrix(a, b, cost);
      SinkhornOptions so;
      so.epsilon = sinkhorn_eps;
      const auto r = solve_sinkhorn(a, b, c, so);
      all = all && r.converged;
      t.row() << inst << sinkhorn_eps << r.value << solve_exact(a, b, c).value << r.converged << r.iterations << r.residual;
    }
    rep.check("sinkhorn_converged", all);
  }
}

// ---------------------------------------------------------------------------
// rays

namespace detail {

template <class Point>
struct RayOutcome {
  RayGraph<Point> graph;
  NonBranchingReport branching;
  EquivalenceReport relation;
};

template <class Point>
RayOutcome<Point> analyse_rays(std::vector<Point> s, std::vector<std::pair<int, int>> gamma, const CostSpec& metric, double rel) {
  const Matrix d = pairwise_distances(s, metric);
  const double tol = default_ray_tolerance(d, rel);
  RayOutcome<Point> out{build_transport_rays(std::move(s), std::move(gamma), metric, tol), {}, {}};
  out.branching = check_non_branching(out.graph);
  out.relation = ray_relation_check(out.graph);
  return out;
}

}  // namespace detail

inline void run_rays(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"t_values"});
  const std::string instance = ex.choice("instance", "random", {"random", "linf_branching", "explicit"});
  const auto instances = static_cast<std::size_t>(ex.integer("instances", 20, 1, 100000));
  const auto points = static_cast<std::size_t>(ex.integer("points", 6, 1, 64));
  const auto dim = static_cast<std::size_t>(ex.integer("dim", 2, 1, 16));
  const double shift = ex.real("shift", 3.0);
  const int path_level = static_cast<int>(ex.integer("path_level", 4, 0, 10));
  const auto support = ex.rows("support", {});
  const auto pairs = ex.rows("pairs", {});
  ex.finish();
  if (cfg.sweep.t_values.empty()) cfg.sweep.t_values = {0.25, 0.5, 0.75};
  cfg.resolved["sweep"]["t_values"] = cfg.sweep.t_values;
  const bool paths = cfg.cost.kind == "sobolev";
  if (cfg.cost.kind != "lp_metric" && !paths) {
    throw ConfigError("cost.kind", "rays need a norm cost: lp_metric or sobolev, got " + cfg.cost.kind);
  }
  if (paths && instance != "random") throw ConfigError("experiment.instance", "the sobolev metric supports random instances only");
  if (instance == "explicit") {
    if (support.empty() || pairs.empty()) throw ConfigError("experiment.support", "explicit instances need support and pairs");
    if (pairs.front().size() != 2) throw ConfigError("experiment.pairs", "rows must be index pairs");
  } else if (!support.empty() || !pairs.empty()) {
    throw ConfigError("experiment.support", "only used by explicit instances");
  }
  const CostSpec metric = paths ? CostSpec::sobolev_p(1.0, cfg.sobolev, cfg.quadrature) : CostSpec::lp_metric(cfg.cost.p);
  double rel = cfg.tolerance.at("ray_rel");
  if (rel == 0.0) rel = paths ? 1e-6 : 1e-8;
  rep.results()["metric"] = metric.name();
  rep.results()["relative_tolerance"] = rel;

  auto& t = rep.table("rays", {"instance", "support_points", "plan_pairs", "oriented_pairs", "uncertain_pairs", "triples_checked",
                               "worst_residual", "non_branching", "equivalence"});
  bool branching_ok = true;
  bool relation_ok = true;
  auto record = [&](std::size_t inst, const auto& o) {
    branching_ok = branching_ok && o.branching.passed;
    relation_ok = relation_ok && o.relation.passed();
    t.row() << inst << o.graph.points.size() << o.graph.gamma.size() << o.graph.oriented_pairs.size() << o.graph.uncertain_pairs.size()
            << o.branching.triples_checked << o.branching.worst_residual << o.branching.passed << o.relation.passed();
  };

  if (instance == "random") {
    log << "rays: " << instances << " random instances under " << metric.name() << '\n';
    GaussianSource rng(stream_seed(cfg.seed, 9));
    const std::uint64_t path_base = stream_seed(cfg.seed, 10);
    for (std::size_t inst = 0; inst < instances; ++inst) {
      if (paths) {
        std::vector<DyadicPath> a;
        std::vector<DyadicPath> b;
        for (std::size_t i = 0; i < points; ++i) {
          a.push_back(sample_brownian(path_level, path_base + 2 * (inst * 64 + i)));
          b.push_back(sample_brownian(path_level, path_base + 2 * (inst * 64 + i) + 1));
        }
        const auto mu0 = DiscreteMeasure<DyadicPath>::uniform(a);
        const auto mu1 = DiscreteMeasure<DyadicPath>::uniform(b);
        const auto sol = solve_exact(mu0, mu1, build_cost_matrix(mu0, mu1, metric));
        auto [s, gamma] = ray_ground_set(mu0, mu1, sol.plan, cfg.sweep.t_values);
        record(inst, detail::analyse_rays(std::move(s), std::move(gamma), metric, rel));
      } else {
        const auto mu0 = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(points, dim, rng));
        const auto mu1 = DiscreteMeasure<Vec>::uniform(detail::gaussian_points(points, dim, rng, shift));
        const auto sol = solve_exact(mu0, mu1, build_cost_matrix(mu0, mu1, metric));
        auto [s, gamma] = ray_ground_set(mu0, mu1, sol.plan, cfg.sweep.t_values);
        record(inst, detail::analyse_rays(std::move(s), std::move(gamma), metric, rel));
      }
    }
  } else {
    std::vector<Vec> s;
    std::vector<std::pair<int, int>> gamma;
    if (instance == "linf_branching") {
      // two sup-norm geodesics from the origin through (1, 0)
      s = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 1.0}, {2.0, -1.0}};
      gamma = {{0, 2}, {0, 3}};
    } else {
      s = support;
      for (const auto& r : pairs) {
        if (r[0] != std::floor(r[0]) || r[1] != std::floor(r[1])) throw ConfigError("experiment.pairs", "indices must be integers");
        gamma.emplace_back(static_cast<int>(r[0]), static_cast<int>(r[1]));
      }
    }
    log << "rays: " << instance << " instance under " << metric.name() << '\n';
    auto o = detail::analyse_rays(std::move(s), std::move(gamma), metric, rel);
    record(0, o);
    rep.results()["graph"] = io::to_json(o.graph);
    rep.results()["non_branching"] = io::to_json(o.branching);
    const auto sets = transport_sets(o.graph);
    const auto ends = endpoints(o.graph);
    rep.results()["transport_set"] = sets.with_endpoints;
    rep.results()["transport_set_interior"] = sets.without_endpoints;
    rep.results()["initial_points"] = ends.initial;
    rep.results()["final_points"] = ends.final_points;
  }
  rep.check("non_branching", branching_ok);
  rep.check("ray_equivalence", relation_ok);
}

// ---------------------------------------------------------------------------
// convexity

inline void run_convexity(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"t_values", "cells_per_axis"});
  const std::string kase = ex.choice("case", "gaussian_shift", {"gaussian_shift", "random"});
  const double k = ex.real("K", 1.0);
  if (!(k >= 0.0)) throw ConfigError("experiment.K", "must be nonnegative");
  const double mean0 = ex.real("mean0", -1.0);
  const double mean1 = ex.real("mean1", 1.0);
  const double sigma = ex.real("sigma", 1.0);
  if (!(sigma > 0.0)) throw ConfigError("experiment.sigma", "must be positive");
  const auto instances = static_cast<std::size_t>(ex.integer("instances", 20, 1, 100000));
  const double fraction = ex.real("support_fraction", 1.0);
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("experiment.support_fraction", "must lie in (0, 1]");
  ex.finish();
  if (cfg.sweep.t_values.empty()) cfg.sweep.t_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  if (cfg.sweep.cells_per_axis.empty()) cfg.sweep.cells_per_axis = {cfg.grid.cells_per_axis};
  detail::require_ascending("sweep.cells_per_axis", cfg.sweep.cells_per_axis);
  if (kase == "random" && cfg.sweep.cells_per_axis.size() != 1) {
    throw ConfigError("sweep.cells_per_axis", "random histograms use the single [grid] resolution");
  }
  cfg.resolved["sweep"]["t_values"] = cfg.sweep.t_values;
  cfg.resolved["sweep"]["cells_per_axis"] = cfg.sweep.cells_per_axis;
  const CostSpec cost = detail::squared_cost(cfg);
  KConvexityOptions opts;
  opts.tolerance_constant = cfg.tolerance.at("deficit_cells");

  auto& deficits = rep.table("deficits", {"run", "cells_per_axis", "t", "entropy", "bound", "deficit", "tolerance"});
  auto& summary = rep.table("summary", {"run", "cells_per_axis", "cell_width", "w2", "entropy0", "entropy1", "min_deficit",
                                        "max_abs_deficit", "tolerance", "truncation_mass"});
  std::vector<KConvexityReport> reports;
  std::vector<GridSpec> grids;
  if (kase == "gaussian_shift") {
    for (auto m : cfg.sweep.cells_per_axis) {
      GridSpec g = cfg.grid;
      g.cells_per_axis = static_cast<int>(m);
      try {
        g.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("sweep.cells_per_axis", e.what());
      }
      Vec mu0(static_cast<std::size_t>(g.dim), 0.0);
      Vec mu1(static_cast<std::size_t>(g.dim), 0.0);
      mu0[0] = mean0;
      mu1[0] = mean1;
      log << "convexity: Gaussian pair on " << m << " cells per axis\n";
      reports.push_back(kconvexity_deficit(discretize_gaussian(g, mu0, sigma), discretize_gaussian(g, mu1, sigma), cost, k,
                                           cfg.sweep.t_values, opts));
      grids.push_back(g);
    }
  } else {
    log << "convexity: " << instances << " random histogram pairs\n";
    const std::uint64_t base = stream_seed(cfg.seed, 11);
    for (std::size_t inst = 0; inst < instances; ++inst) {
      const auto rho0 = random_histogram(cfg.grid, base + 2 * inst, fraction);
      const auto rho1 = random_histogram(cfg.grid, base + 2 * inst + 1, fraction);
      reports.push_back(kconvexity_deficit(rho0, rho1, cost, k, cfg.sweep.t_values, opts));
      grids.push_back(cfg.grid);
    }
  }
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const auto& kr = reports[r];
    for (const auto& row : kr.rows) deficits.row() << r << grids[r].cells_per_axis << row.t << row.entropy << row.bound << row.deficit << kr.tolerance;
    summary.row() << r << grids[r].cells_per_axis << kr.cell_width << kr.w2 << kr.entropy0 << kr.entropy1 << kr.min_deficit
                  << kr.max_abs_deficit << kr.tolerance << kr.truncation_mass;
  }
  json per_run = json::array();
  for (const auto& kr : reports) per_run.push_back(io::to_json(kr));
  rep.results()["runs"] = std::move(per_run);
  rep.results()["cost"] = cost.name();

  if (kase == "gaussian_shift") {
    bool eq = true;
    for (const auto& kr : reports) eq = eq && kr.equality_within_tolerance();
    rep.check("equality_case", eq, {{"finest_max_abs_deficit", io::number(reports.back().max_abs_deficit)},
                                    {"finest_tolerance", reports.back().tolerance}});
    if (reports.size() > 1) {
      bool dec = true;
      for (std::size_t r = 1; r < reports.size(); ++r) dec = dec && reports[r].max_abs_deficit <= reports[r - 1].max_abs_deficit;
      rep.check("refinement_decrease", dec);
    }
  } else {
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& kr : reports) {
      ok = ok && kr.convex_within_tolerance();
      worst = std::min(worst, kr.min_deficit);
    }
    rep.check("weak_convexity", ok, {{"min_deficit", io::number(worst)}, {"tolerance", reports.front().tolerance}});
  }
}

// ---------------------------------------------------------------------------
// plimit

inline void run_plimit(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"p_values"});
  const auto instances = static_cast<std::size_t>(ex.integer("instances", 20, 1, 100000));
  const auto points = static_cast<std::size_t>(ex.integer("points", 8, 1, 512));
  const auto target_points = static_cast<std::size_t>(ex.integer("target_points", 8, 1, 512));
  const auto dim = static_cast<std::size_t>(ex.integer("dim", 2, 1, 16));
  const std::string weights = ex.choice("weights", "random", {"random", "uniform"});
  const int max_cycle = static_cast<int>(ex.integer("max_cycle_length", 4, 2, 8));
  const int max_doublings = static_cast<int>(ex.integer("max_doublings", 40, 0, 60));
  ex.finish();
  if (cfg.sweep.p_values.empty()) cfg.sweep.p_values = {2, 4, 8, 16, 32};
  for (double p : cfg.sweep.p_values) {
    if (!(p >= 2.0) || std::isinf(p)) throw ConfigError("sweep.p_values", "entries must lie in [2, inf)");
  }
  detail::require_ascending("sweep.p_values", cfg.sweep.p_values);
  cfg.resolved["sweep"]["p_values"] = cfg.sweep.p_values;
  PLimitOptions opts;
  opts.compare_tol = cfg.tolerance.at("compare");
  opts.plan_tol = cfg.tolerance.at("plan");
  opts.max_doublings = max_doublings;
  opts.cycles.max_cycle_length = max_cycle;
  opts.cycles.tolerance = cfg.tolerance.at("cycle");

  log << "plimit: " << instances << " instances in d = " << dim << '\n';
  auto& t = rep.table("plimit", {"instance", "p", "w2", "plan_change", "alternative_optimum", "extension"});
  auto& s = rep.table("plimit_summary", {"instance", "w2_inf", "nonincreasing", "dominates_inf", "limit_p", "limit_stable",
                                         "tie_degenerate", "convergence_claimed", "limit_value_inf", "cycles_checked",
                                         "worst_cycle_violation"});
  GaussianSource rng(stream_seed(cfg.seed, 12));
  bool nonincreasing = true;
  bool dominates = true;
  bool cycles = true;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    auto measure = [&](std::size_t n) {
      auto pts = detail::gaussian_points(n, dim, rng);
      if (weights == "uniform") return DiscreteMeasure<Vec>::uniform(pts);
      std::vector<double> w(n);
      for (double& x : w) x = 0.2 + rng.uniform();
      return DiscreteMeasure<Vec>::normalized(pts, w);
    };
    const auto mu0 = measure(points);
    const auto mu1 = measure(target_points);
    const auto r = p_limit_experiment(mu0, mu1, cfg.sweep.p_values, opts);
    for (const auto& row : r.rows) t.row() << inst << row.p << row.w2 << row.plan_change << row.alternative_optimum << row.extension;
    s.row() << inst << r.w2_inf << r.nonincreasing << r.dominates_inf << r.limit_p << r.limit_stable << r.tie_degenerate
            << r.convergence_claimed << r.limit_value_inf << r.limit_cycles.cycles_checked << r.limit_cycles.worst_violation;
    nonincreasing = nonincreasing && r.nonincreasing;
    dominates = dominates && r.dominates_inf;
    cycles = cycles && r.limit_cycles.passed;
  }
  rep.check("w2_nonincreasing_in_p", nonincreasing);
  rep.check("w2_dominates_linf", dominates);
  rep.check("limit_plan_cyclically_monotone", cycles, {{"max_cycle_length", max_cycle}});
}

// ---------------------------------------------------------------------------
// project

inline void run_project(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"levels"});
  const auto instances = static_cast<std::size_t>(ex.integer("instances", 1, 1, 10000));
  const auto paths = static_cast<std::size_t>(ex.integer("paths", 20, 1, 512));
  const int top = static_cast<int>(ex.integer("top_level", 8, 0, 14));
  ex.finish();
  if (cfg.sweep.levels.empty()) cfg.sweep.levels = {2, 4, 6, 8};
  detail::require_ascending("sweep.levels", cfg.sweep.levels);
  for (auto l : cfg.sweep.levels) {
    if (l > top) throw ConfigError("sweep.levels", "entries must not exceed experiment.top_level");
  }
  cfg.resolved["sweep"]["levels"] = cfg.sweep.levels;
  const auto levels = detail::to_int(cfg.sweep.levels);

  log << "project: " << instances << " ensemble pairs of " << paths << " paths\n";
  auto& t = rep.table("project", {"instance", "level", "w", "w_top", "below_top"});
  bool sup = true, contraction = true, nondecreasing = true, converges = true;
  const std::uint64_t base = stream_seed(cfg.seed, 13);
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const auto a = sample_brownian_ensemble(top, paths, base + 2 * inst * paths);
    const auto b = sample_brownian_ensemble(top, paths, base + (2 * inst + 1) * paths);
    const auto r = projection_experiment(a, b, levels, cfg.tolerance.at("compare"));
    for (const auto& row : r.rows) t.row() << inst << row.level << row.w << r.w_top << row.below_top;
    sup = sup && r.sup_contraction;
    contraction = contraction && r.contraction;
    nondecreasing = nondecreasing && r.nondecreasing;
    converges = converges && r.converges;
  }
  rep.check("sup_norm_contraction", sup);
  rep.check("wasserstein_below_top", contraction);
  rep.check("nondecreasing_in_level", nondecreasing);
  rep.check("converges_to_top", converges);
}

// ---------------------------------------------------------------------------
// conjecture

inline void run_conjecture(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"levels"});
  ConjectureOptions opts;
  opts.samples = static_cast<std::size_t>(ex.integer("samples", 1000, 1, 10000000));
  opts.top_level = static_cast<int>(ex.integer("top_level", 8, 0, 14));
  opts.bin_width = ex.real("bin_width", 0.025);
  opts.bin_limit = ex.real("bin_limit", 2.0);
  if (!(opts.bin_width > 0.0)) throw ConfigError("experiment.bin_width", "must be positive");
  if (!(opts.bin_limit > opts.bin_width)) throw ConfigError("experiment.bin_limit", "must exceed bin_width");
  ex.finish();
  if (cfg.sweep.levels.empty()) cfg.sweep.levels = {2, 3, 4, 5, 6, 7};
  detail::require_ascending("sweep.levels", cfg.sweep.levels);
  for (auto l : cfg.sweep.levels) {
    if (l > opts.top_level) throw ConfigError("sweep.levels", "entries must not exceed experiment.top_level");
  }
  cfg.resolved["sweep"]["levels"] = cfg.sweep.levels;
  opts.levels = detail::to_int(cfg.sweep.levels);
  opts.params = cfg.sobolev;
  opts.quad = cfg.quadrature;
  opts.seed = stream_seed(cfg.seed, 14);

  log << "conjecture: " << opts.samples << " samples x " << opts.levels.size() << " levels\n";
  const auto r = projection_norm_conjecture_search(opts);
  auto& lt = rep.table("conjecture_levels", {"level", "max_ratio", "min_ratio", "mean_ratio", "witness_sample", "max_sup_ratio", "candidates"});
  auto& ht = rep.table("conjecture_histogram", {"level", "bin_lo", "bin_hi", "count"});
  bool well_formed = r.levels.size() == opts.levels.size();
  for (const auto& lv : r.levels) {
    lt.row() << lv.level << lv.max_ratio << lv.min_ratio << lv.mean_ratio << lv.witness_sample << lv.max_sup_ratio << lv.candidates;
    std::size_t total = 0;
    for (std::size_t b = 0; b < lv.histogram.size(); ++b) {
      const double lo = static_cast<double>(b) * opts.bin_width;
      const double hi = b + 1 == lv.histogram.size() ? std::numeric_limits<double>::infinity() : lo + opts.bin_width;
      ht.row() << lv.level << lo << hi << lv.histogram[b];
      total += lv.histogram[b];
    }
    well_formed = well_formed && total == opts.samples && std::isfinite(lv.max_ratio) && std::isfinite(lv.mean_ratio);
  }
  auto& wt = rep.table("conjecture_witness", {"t", "value"});
  const auto& knots = r.witness.knots();
  for (std::size_t j = 0; j < knots.size(); ++j) wt.row() << static_cast<double>(j) / static_cast<double>(knots.size() - 1) << knots[j];
  rep.results()["max_ratio"] = r.max_ratio;
  rep.results()["witness_level"] = r.witness_level;
  rep.results()["witness_sample"] = r.witness_sample;
  rep.results()["witness_seed"] = std::to_string(r.witness_seed);
  rep.results()["quadrature_tolerance"] = r.quadrature_tolerance;
  rep.results()["candidate_threshold"] = r.candidate_threshold;
  rep.results()["candidates"] = r.candidates;
  rep.results()["note"] = "distribution only; the projection-norm inequality is open and not asserted";
  rep.check("report_well_formed", well_formed);
  rep.check("sup_norm_contraction", r.sup_sanity);
}

// ---------------------------------------------------------------------------
// density

inline void run_density(ExperimentConfig& cfg, Section& ex, Report& rep, std::ostream& log) {
  detail::allow_sweeps(cfg, {"t_values"});
  const double m = ex.real("M", 1.5);
  const double p = ex.real("p", 2.0);
  const double mean0 = ex.real("mean0", -0.15);
  const double mean1 = ex.real("mean1", 0.15);
  const double sigma = ex.real("sigma", 1.0);
  const double lo = ex.real("lo", -1.5);
  const double hi = ex.real("hi", 1.5);
  ex.finish();
  if (!(m >= 1.0)) throw ConfigError("experiment.M", "must be >= 1");
  if (!(p >= 1.0)) throw ConfigError("experiment.p", "must be >= 1");
  if (!(sigma > 0.0)) throw ConfigError("experiment.sigma", "must be positive");
  if (!(lo < hi)) throw ConfigError("experiment.lo", "must be below hi");
  if (cfg.grid.dim != 1) throw ConfigError("grid.dim", "the density estimate is implemented for d = 1");
  if (cfg.sweep.t_values.empty()) cfg.sweep.t_values = {0.0, 0.25, 0.5, 0.75, 1.0};
  cfg.resolved["sweep"]["t_values"] = cfg.sweep.t_values;

  log << "density: truncated Gaussian pair, M = " << m << '\n';
  const auto rho0 = discretize_truncated_gaussian(cfg.grid, {mean0}, sigma, lo, hi);
  const auto rho1 = discretize_truncated_gaussian(cfg.grid, {mean1}, sigma, lo, hi);
  const auto r = displacement_density_estimate(rho0, rho1, m, p, cfg.sweep.t_values, cfg.tolerance.at("density_abs"));
  auto& t = rep.table("density", {"t", "sets_checked", "worst_margin", "worst_first_cell", "worst_end_cell", "passed"});
  for (const auto& row : r.rows) t.row() << row.t << row.sets_checked << row.worst_margin << row.worst_first_cell << row.worst_end_cell << row.passed;
  rep.results()["M"] = r.m;
  rep.results()["M_effective"] = r.m_effective;
  rep.check("density_lower_bound", r.passed);
}

// ---------------------------------------------------------------------------

struct RunOutcome {
  int code = kOk;
  json diagnostics;
};

/// Runs the configured subcommand and writes its artifacts. ConfigError and
/// library argument errors propagate to the caller.
inline RunOutcome run(ExperimentConfig& cfg, std::ostream& log) {
  json& resolved_ex = cfg.resolved["experiment"];
  Section ex(&cfg.experiment, "experiment", &resolved_ex);
  Report rep;
  const std::string& sc = cfg.subcommand;
  if (sc == "norm") {
    run_norm(cfg, ex, rep, log);
  } else if (sc == "ot") {
    run_ot(cfg, ex, rep, log);
  } else if (sc == "rays") {
    run_rays(cfg, ex, rep, log);
  } else if (sc == "convexity") {
    run_convexity(cfg, ex, rep, log);
  } else if (sc == "plimit") {
    run_plimit(cfg, ex, rep, log);
  } else if (sc == "project") {
    run_project(cfg, ex, rep, log);
  } else if (sc == "conjecture") {
    run_conjecture(cfg, ex, rep, log);
  } else if (sc == "density") {
    run_density(cfg, ex, rep, log);
  } else {
    throw ConfigError("subcommand", "unknown subcommand " + sc);
  }
  rep.write(cfg);
  RunOutcome out;
  if (!rep.passed()) {
    out.code = kCheckFailed;
    json failed = json::array();
    for (const auto& c : rep.checks()) {
      if (!c["passed"].get<bool>()) failed.push_back(c);
    }
    out.diagnostics = json{{"error", "check_failed"},
                           {"subcommand", sc},
                           {"failed", std::move(failed)},
                           {"report", (std::filesystem::path(cfg.out_dir) / "report.json").string()}};
  }
  return out;
}

}  // namespace wot::cli
