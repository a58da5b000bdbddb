#include <gtest/gtest.h>

#include <cmath>
#include <variant>

#include "support/oracles.hpp"
#include "wot/cost.hpp"
#include "wot/duality.hpp"
#include "wot/sinkhorn.hpp"
#include "wot/transport.hpp"

using wot::CostSpec;
using wot::DiscreteMeasure;
using wot::Matrix;
using wot::Vec;

namespace {

std::vector<Vec> random_points(std::size_t n, std::size_t d, wot::GaussianSource& rng) {
  std::vector<Vec> pts(n, Vec(d));
  for (auto& p : pts) {
    for (double& x : p) x = rng.normal();
  }
  return pts;
}

std::vector<double> random_weights(std::size_t n, wot::GaussianSource& rng) {
  std::vector<double> w(n);
  double s = 0.0;
  for (double& x : w) s += (x = 0.1 + rng.uniform());
  for (double& x : w) x /= s;
  return w;
}

}  // namespace

TEST(CostSpec, DistancesAndNames) {
  const Vec x{0.0, 0.0};
  const Vec y{3.0, -4.0};
  EXPECT_NEAR(CostSpec::lp_squared(2)(x, y), 25.0, 1e-13);
  EXPECT_EQ(CostSpec::linf_squared()(x, y), 16.0);
  EXPECT_NEAR(CostSpec::lp_metric(1)(x, y), 7.0, 1e-14);
  EXPECT_EQ(CostSpec::lp_metric(INFINITY).norm(), wot::GroundNorm::linf);
  EXPECT_TRUE(CostSpec::lp_metric(2).is_metric());
  EXPECT_EQ(CostSpec::linf_squared().name(), "linf^2");
  Matrix a(2, 2);
  a << 1, 1, 0, 1;
  EXPECT_EQ(CostSpec::warped_sup(a)(x, y), 16.0);
  EXPECT_THROW(CostSpec::warped_sup(Matrix::Zero(2, 2)), std::invalid_argument);
  EXPECT_THROW(CostSpec::lp_squared(0.5), std::invalid_argument);
  EXPECT_THROW(CostSpec::sobolev_p(2, wot::SobolevParams())(x, y), std::invalid_argument);
}

TEST(SolveExact, MatchesPermutationBruteForce) {
  wot::GaussianSource rng(7);
  const CostSpec costs[] = {CostSpec::lp_squared(2), CostSpec::linf_squared(), CostSpec::lp_squared(3)};
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t n = 2 + inst % 6;
    const auto mu0 = DiscreteMeasure<Vec>::uniform(random_points(n, 2, rng));
    const auto mu1 = DiscreteMeasure<Vec>::uniform(random_points(n, 2, rng));
    for (const auto& cost : costs) {
      const Matrix c = wot::build_cost_matrix(mu0, mu1, cost);
      const auto sol = wot::solve_exact(mu0, mu1, c);
      EXPECT_NEAR(sol.value, oracle::assignment_brute_force(c), 1e-12);
      EXPECT_LE(std::abs(sol.duality_gap), 1e-12);
      EXPECT_LE(sol.plan.marginal_error(), 1e-15);
      EXPECT_TRUE(wot::verify_support_system(sol.plan, sol.potentials, c).passed);
    }
  }
}

TEST(SolveExact, SobolevCostOnPaths) {
  const wot::SobolevParams params;
  std::vector<wot::DyadicPath> a;
  std::vector<wot::DyadicPath> b;
  for (int i = 0; i < 5; ++i) {
    a.push_back(wot::sample_brownian(3, 10 + i));
    b.push_back(wot::sample_brownian(3, 20 + i));
  }
  const auto mu0 = DiscreteMeasure<wot::DyadicPath>::uniform(a);
  const auto mu1 = DiscreteMeasure<wot::DyadicPath>::uniform(b);
  for (double p : {1.0, 2.0, 3.0}) {
    const Matrix c = wot::build_cost_matrix(mu0, mu1, CostSpec::sobolev_p(p, params));
    const auto sol = wot::solve_exact(mu0, mu1, c);
    EXPECT_NEAR(sol.value, oracle::assignment_brute_force(c), 1e-12);
  }
}

TEST(SolveExact, UnequalWeightsSatisfyDuality) {
  wot::GaussianSource rng(8);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t m = 3 + inst % 5;
    const std::size_t n = 2 + inst % 7;
    const DiscreteMeasure<Vec> mu0(random_points(m, 3, rng), random_weights(m, rng));
    const DiscreteMeasure<Vec> mu1(random_points(n, 3, rng), random_weights(n, rng));
    const Matrix c = wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2));
    const auto sol = wot::solve_exact(mu0, mu1, c);
    EXPECT_LE(sol.plan.marginal_error(), 1e-14);
    EXPECT_LE(std::abs(sol.duality_gap), 1e-12);
    EXPECT_LE(sol.potentials.max_infeasibility(c), 1e-12);
    // basic solution: at most m + n - 1 support entries
    EXPECT_LE(sol.plan.support().size(), m + n - 1);
  }
}

TEST(SolveExact, OneDimensionalPlanIsMonotone) {
  // quantile coupling of two sorted uniform measures
  const auto mu0 = DiscreteMeasure<Vec>::uniform({{0.0}, {1.0}, {2.0}, {5.0}});
  const auto mu1 = DiscreteMeasure<Vec>::uniform({{-1.0}, {0.5}, {3.0}, {4.0}});
  const auto sol = wot::solve_exact(mu0, mu1, wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2)));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(sol.plan.mass(i, i), 0.25, 1e-15);
}

TEST(SolveExact, IdenticalMeasuresGiveZero) {
  wot::GaussianSource rng(9);
  const auto mu = DiscreteMeasure<Vec>::uniform(random_points(6, 2, rng));
  const auto sol = wot::solve_exact(mu, mu, wot::build_cost_matrix(mu, mu, CostSpec::lp_squared(2)));
  EXPECT_EQ(sol.value, 0.0);
}

TEST(SolveExact, RejectsOversizeAndMassMismatch) {
  const std::vector<double> a(600, 1.0 / 600);
  EXPECT_THROW(wot::solve_exact(a, {1.0}, Matrix::Zero(600, 1)), std::length_error);
  EXPECT_THROW(wot::solve_exact({0.5, 0.5}, {0.9}, Matrix::Zero(2, 1)), std::invalid_argument);
  EXPECT_THROW(wot::solve_exact({1.0}, {1.0}, Matrix::Constant(1, 1, NAN)), std::invalid_argument);
}

TEST(SolveExact, UniquenessProbe) {
  // square corners: both matchings cost the same under the sup norm squared
  const auto mu0 = DiscreteMeasure<Vec>::uniform({{0.0, 0.0}, {1.0, 1.0}});
  const auto mu1 = DiscreteMeasure<Vec>::uniform({{1.0, 0.0}, {0.0, 1.0}});
  wot::ExactSolverOptions opts;
  opts.probe_uniqueness = true;
  const auto tie = wot::solve_exact(mu0, mu1, wot::build_cost_matrix(mu0, mu1, CostSpec::linf_squared()), opts);
  ASSERT_TRUE(tie.alternative_optimum.has_value());
  EXPECT_TRUE(*tie.alternative_optimum);
  const auto mu2 = DiscreteMeasure<Vec>::uniform({{1.0, 0.1}, {0.0, 1.0}});
  const auto unique = wot::solve_exact(mu0, mu2, wot::build_cost_matrix(mu0, mu2, CostSpec::lp_squared(2)), opts);
  EXPECT_FALSE(*unique.alternative_optimum);
}

TEST(SolveExact, DegenerateInstancesTerminate) {
  // many equal costs and equal weights: heavy primal degeneracy
  const std::size_t n = 40;
  std::vector<double> a(n, 1.0 / n);
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c(i, j) = static_cast<double>((i * 7 + j * 3) % 5);
  }
  const auto sol = wot::solve_exact(a, a, c);
  EXPECT_LE(std::abs(sol.duality_gap), 1e-12);
  EXPECT_LE(sol.potentials.max_infeasibility(c), 1e-12);
}

TEST(Sinkhorn, ApproachesExactValueAsEpsilonShrinks) {
  wot::GaussianSource rng(10);
  const DiscreteMeasure<Vec> mu0(random_points(6, 2, rng), random_weights(6, rng));
  const DiscreteMeasure<Vec> mu1(random_points(7, 2, rng), random_weights(7, rng));
  const Matrix c = wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2));
  const double exact = wot::solve_exact(mu0, mu1, c).value;
  double prev_gap = INFINITY;
  for (double eps : {0.5, 0.1, 0.02}) {
    const auto r = wot::solve_sinkhorn(mu0, mu1, c, {eps, 200000, 1e-10, 10});
    EXPECT_TRUE(r.converged) << eps;
    EXPECT_GE(r.value, exact - 1e-9);
    const double gap = r.value - exact;
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 0.05);
}

TEST(Sinkhorn, ReportsNonConvergence) {
  wot::GaussianSource rng(11);
  const auto mu0 = DiscreteMeasure<Vec>::uniform(random_points(5, 2, rng));
  const auto mu1 = DiscreteMeasure<Vec>::uniform(random_points(5, 2, rng));
  const Matrix c = wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2));
  const auto r = wot::solve_sinkhorn(mu0, mu1, c, {1e-3, 3, 1e-14, 1});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_THROW(wot::solve_sinkhorn(mu0, mu1, c, {0.0}), std::invalid_argument);
}

TEST(CTransform, RoundTripIsAFixedPoint) {
  wot::GaussianSource rng(12);
  Matrix c(5, 6);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) = rng.uniform();
  }
  std::vector<double> phi(5);
  for (double& x : phi) x = rng.normal();
  const auto psi = wot::c_transform(phi, c);
  const auto phi2 = wot::reverse_c_transform(psi, c);
  for (std::size_t i = 0; i < phi.size(); ++i) EXPECT_LE(phi2[i], phi[i] + 1e-15);
  const auto psi2 = wot::c_transform(phi2, c);
  for (std::size_t j = 0; j < psi.size(); ++j) EXPECT_NEAR(psi2[j], psi[j], 1e-15);
}

TEST(CTransform, OptimalPotentialsAreCConcave) {
  wot::GaussianSource rng(13);
  const auto mu0 = DiscreteMeasure<Vec>::uniform(random_points(6, 2, rng));
  const auto mu1 = DiscreteMeasure<Vec>::uniform(random_points(6, 2, rng));
  const Matrix c = wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2));
  const auto sol = wot::solve_exact(mu0, mu1, c);
  const auto psi = wot::c_transform(sol.potentials.phi, c);
  // psi = phi^c on the support columns
  for (auto [i, j] : sol.plan.support()) {
    EXPECT_NEAR(psi[static_cast<std::size_t>(j)] - sol.potentials.phi[static_cast<std::size_t>(i)], c(i, j), 1e-12);
  }
}

TEST(CyclicalMonotonicity, OptimalPlansPass) {
  wot::GaussianSource rng(14);
  for (int inst = 0; inst < 10; ++inst) {
    const DiscreteMeasure<Vec> mu0(random_points(6, 2, rng), random_weights(6, rng));
    const DiscreteMeasure<Vec> mu1(random_points(6, 2, rng), random_weights(6, rng));
    const Matrix c = wot::build_cost_matrix(mu0, mu1, CostSpec::linf_squared());
    const auto r = wot::check_cyclical_monotonicity(wot::solve_exact(mu0, mu1, c).plan, c);
    EXPECT_TRUE(r.passed) << r.worst_violation;
    EXPECT_EQ(static_cast<double>(r.cycles_checked), wot::count_cycles(r.support_size, 4));
  }
}

TEST(CyclicalMonotonicity, SwapCounterexampleHasPredictedViolation) {
  const double x1 = 0.0, x2 = 1.0, y1 = 2.0, y2 = 5.0;
  const Matrix c = [&] {
    Matrix m(2, 2);
    m << (x1 - y1) * (x1 - y1), (x1 - y2) * (x1 - y2), (x2 - y1) * (x2 - y1), (x2 - y2) * (x2 - y2);
    return m;
  }();
  wot::TransportPlan swapped;
  swapped.mass = Matrix::Zero(2, 2);
  swapped.mass(0, 1) = 0.5;
  swapped.mass(1, 0) = 0.5;
  swapped.source_weights = {0.5, 0.5};
  swapped.target_weights = {0.5, 0.5};
  const auto r = wot::check_cyclical_monotonicity(swapped, c);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.worst_violation, 2.0 * (x2 - x1) * (y2 - y1), 1e-12);
  EXPECT_EQ(r.worst_cycle.size(), 2u);
}

TEST(CyclicalMonotonicity, CapAndSampling) {
  EXPECT_EQ(wot::count_cycles(3, 4), 3.0 + 2.0);
  EXPECT_EQ(wot::count_cycles(5, 3), 10.0 + 20.0);
  wot::TransportPlan plan;
  plan.mass = Matrix::Identity(30, 30) / 30.0;
  plan.source_weights.assign(30, 1.0 / 30);
  plan.target_weights.assign(30, 1.0 / 30);
  const Matrix c = Matrix::Ones(30, 30) - Matrix::Identity(30, 30);
  wot::CycleCheckOptions opts;
  opts.cycle_cap = 100;
  EXPECT_THROW(wot::check_cyclical_monotonicity(plan, c, opts), wot::CombinatorialCapExceeded);
  opts.allow_sampling = true;
  opts.samples = 500;
  const auto r = wot::check_cyclical_monotonicity(plan, c, opts);
  EXPECT_TRUE(r.sampled);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.cycles_checked, 500u);
}

TEST(MongeMap, PermutationPlansGiveMaps) {
  wot::GaussianSource rng(15);
  const auto mu0 = DiscreteMeasure<Vec>::uniform(random_points(6, 2, rng));
  const auto mu1 = DiscreteMeasure<Vec>::uniform(random_points(6, 2, rng));
  const auto sol = wot::solve_exact(mu0, mu1, wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2)));
  const auto out = wot::extract_monge_map(sol.plan);
  ASSERT_TRUE(std::holds_alternative<wot::MongeMap>(out));
  auto targets = std::get<wot::MongeMap>(out).target_of;
  std::sort(targets.begin(), targets.end());
  for (int j = 0; j < 6; ++j) EXPECT_EQ(targets[static_cast<std::size_t>(j)], j);
}

TEST(MongeMap, AtomSplittingIsReported) {
  const auto mu0 = DiscreteMeasure<Vec>::uniform({{0.0}});
  const auto mu1 = DiscreteMeasure<Vec>::uniform({{-1.0}, {1.0}});
  const auto sol = wot::solve_exact(mu0, mu1, wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2)));
  const auto out = wot::extract_monge_map(sol.plan);
  ASSERT_TRUE(std::holds_alternative<wot::SplitReport>(out));
  const auto& rows = std::get<wot::SplitReport>(out).rows;
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].masses.size(), 2u);
}

TEST(GradientInversion, RoundTrip) {
  wot::GaussianSource rng(16);
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    for (std::size_t d : {1u, 2u, 3u}) {
      for (int s = 0; s < 20; ++s) {
        const Vec x = random_points(1, d, rng)[0];
        const Vec y = random_points(1, d, rng)[0];
        const Vec back = wot::invert_cost_gradient(x, wot::cost_gradient(x, y, p), p);
        for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(back[i], y[i], 1e-10 * std::max(1.0, std::abs(y[i])));
      }
    }
  }
}

TEST(GradientInversion, GradientMatchesFiniteDifferences) {
  const Vec x{0.3, -1.2};
  const Vec y{1.0, 0.5};
  for (double p : {1.5, 3.0}) {
    const Vec g = wot::cost_gradient(x, y, p);
    for (std::size_t i = 0; i < 2; ++i) {
      const double fd = oracle::central_difference(
          [&](double e) {
            Vec z = x;
            z[i] += e;
            return std::pow(wot::lp_norm(Vec{z[0] - y[0], z[1] - y[1]}, 2.0), p);
          },
          1e-6);
      EXPECT_NEAR(g[i], fd, 1e-7);
    }
  }
}
