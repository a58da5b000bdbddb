#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "wot/entropy.hpp"

using wot::CostSpec;
using wot::GridSpec;
using wot::Histogram;

namespace {

const std::vector<double> kTimes{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

double w2_between(const Histogram& a, const Histogram& b) {
  const auto mu0 = a.to_measure();
  const auto mu1 = b.to_measure();
  return std::sqrt(wot::solve_exact(mu0, mu1, wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2))).value);
}

}  // namespace

TEST(GridSpec, ValidationAndGeometry) {
  EXPECT_THROW((GridSpec{4, 1.0, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{1, 1.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{1, 0.0, 10}.validate()), std::invalid_argument);
  const GridSpec g{2, 2.0, 4};
  EXPECT_EQ(g.cell_count(), 16u);
  EXPECT_EQ(g.cell_width(), 1.0);
  EXPECT_EQ(g.center(0), (wot::Vec{-1.5, -1.5}));
  EXPECT_EQ(g.center(7), (wot::Vec{-0.5, 1.5}));
  for (int k = 0; k <= 4; ++k) EXPECT_EQ(g.edge(4 - k), -g.edge(k));
}

TEST(GridSpec, HalfOpenBinningWithClosedLastCell) {
  const GridSpec g{1, 2.0, 4};
  EXPECT_EQ(g.locate_axis(-2.0), 0);
  EXPECT_EQ(g.locate_axis(-1.0), 1);
  EXPECT_EQ(g.locate_axis(-1.0 - 1e-6), 0);
  EXPECT_EQ(g.locate_axis(0.999999), 2);
  EXPECT_EQ(g.locate_axis(2.0), 3);
  EXPECT_THROW(g.locate_axis(2.001), std::out_of_range);
  EXPECT_THROW(g.locate_axis(-2.001), std::out_of_range);
  // an edge reached through rounding noise is still the edge
  EXPECT_EQ(g.locate_axis(std::nextafter(-1.0, -2.0)), 1);
}

TEST(Histogram, ValidatesMasses) {
  const GridSpec g{1, 1.0, 2};
  EXPECT_THROW(Histogram(g, {0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(Histogram(g, {1.0}), std::invalid_argument);
  EXPECT_THROW(Histogram(g, {-0.1, 1.1}), std::invalid_argument);
  EXPECT_NO_THROW(Histogram(g, {0.25, 0.75}));
}

TEST(GaussianReference, MirrorSymmetricBitForBit) {
  for (int m : {7, 100, 401}) {
    const auto ref = wot::gaussian_reference(GridSpec{1, 5.0, m});
    const auto& q = ref.histogram.masses;
    for (std::size_t k = 0; k < q.size(); ++k) EXPECT_EQ(q[k], q[q.size() - 1 - k]);
  }
}

TEST(GaussianReference, TruncationMassAtEightSigma) {
  const auto ref = wot::gaussian_reference(GridSpec{1, 8.0, 400});
  // 2 Phi(-8) = 1.2441921148543e-15
  EXPECT_NEAR(ref.truncation_mass / 1.2441921148543e-15, 1.0, 1e-9);
  const auto ref2 = wot::gaussian_reference(GridSpec{2, 2.0, 10});
  const double inside = std::erf(2.0 / std::sqrt(2.0));
  EXPECT_NEAR(ref2.truncation_mass, 1.0 - inside * inside, 1e-15);
}

TEST(GaussianReference, TwoDimensionalIsOuterProduct) {
  const auto q1 = wot::gaussian_reference(GridSpec{1, 3.0, 9}).histogram.masses;
  const auto q2 = wot::gaussian_reference(GridSpec{2, 3.0, 9}).histogram.masses;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(q2[i * 9 + j] / (q1[i] * q1[j]), 1.0, 1e-14);
  }
}

TEST(GaussianCdf, TailsAndCenter) {
  EXPECT_EQ(wot::gaussian_cdf(0.0), 0.5);
  EXPECT_NEAR(wot::gaussian_cdf(-8.0) / 6.220960574271785e-16, 1.0, 1e-12);
  EXPECT_NEAR(wot::gaussian_interval_mass(-1.0, 1.0), 0.6826894921370859, 1e-15);
  EXPECT_EQ(wot::gaussian_interval_mass(-3.0, -1.0), wot::gaussian_interval_mass(1.0, 3.0));
}

TEST(RelativeEntropy, BasicCases) {
  const GridSpec g{1, 8.0, 400};
  const auto q = wot::gaussian_reference(g).histogram;
  EXPECT_EQ(wot::relative_entropy(q, q), 0.0);
  std::vector<double> unit(400, 0.0);
  unit[200] = 1.0;
  EXPECT_NEAR(wot::relative_entropy(Histogram(g, unit), q), std::log(1.0 / q.masses[200]), 1e-14);
  EXPECT_THROW(wot::relative_entropy(q, wot::gaussian_reference(GridSpec{1, 8.0, 200}).histogram), std::invalid_argument);
  std::vector<double> half(400, 0.0);
  half[0] = 1.0;
  std::vector<double> other(400, 0.0);
  other[1] = 1.0;
  EXPECT_TRUE(std::isinf(wot::relative_entropy(Histogram(g, half), Histogram(g, other))));
}

TEST(RelativeEntropy, ShiftedGaussianKlIsHalfMeanSquared) {
  const GridSpec g{1, 8.0, 400};
  EXPECT_NEAR(wot::gaussian_entropy(wot::discretize_gaussian(g, {1.0})), 0.5, 0.01);
  EXPECT_NEAR(wot::gaussian_entropy(wot::discretize_gaussian(g, {1.0})), 0.5, 1e-3);
  const GridSpec g2{2, 6.0, 60};
  EXPECT_NEAR(wot::gaussian_entropy(wot::discretize_gaussian(g2, {1.0, -0.5})), 0.625, 1e-2);
}

TEST(RelativeEntropy, GibbsInequality) {
  const GridSpec g{2, 3.0, 6};
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto p = wot::random_histogram(g, s, 0.7);
    const auto q = wot::random_histogram(g, 1000 + s);
    EXPECT_GE(wot::relative_entropy(p, q), 0.0);
    EXPECT_NEAR(wot::relative_entropy(p, p), 0.0, 1e-15);
  }
}

TEST(EntropyDecomposition, ResidualShrinksWithRefinement) {
  double prev = INFINITY;
  for (int m : {100, 200, 400}) {
    const auto r = wot::entropy_decomposition_check(wot::discretize_gaussian(GridSpec{1, 8.0, m}, {0.5}));
    EXPECT_LT(std::abs(r.residual), prev);
    prev = std::abs(r.residual);
  }
  EXPECT_LE(prev, 1e-3);
}

TEST(EntropyDecomposition, ReferenceItselfGivesZeroBracket) {
  const GridSpec g{1, 8.0, 400};
  const auto r = wot::entropy_decomposition_check(wot::gaussian_reference(g).histogram);
  EXPECT_EQ(r.gaussian_entropy, 0.0);
  EXPECT_NEAR(r.lebesgue_entropy + r.second_moment_half + r.log_normalizer, 0.0, 1e-3);
}

TEST(EntropyDecomposition, TranslationInsensitive) {
  const GridSpec g{1, 8.0, 400};
  const double r0 = wot::entropy_decomposition_check(wot::discretize_gaussian(g, {0.0})).residual;
  for (double m : {0.5, 1.0}) {
    EXPECT_NEAR(wot::entropy_decomposition_check(wot::discretize_gaussian(g, {m})).residual, r0, 1e-3);
  }
}

TEST(EntropyRefinement, DiscretizedEntropyDoesNotDropBeyondSecondOrder) {
  double prev = -INFINITY;
  for (int m : {50, 100, 200, 400}) {
    const GridSpec g{1, 8.0, m};
    const double e = wot::gaussian_entropy(wot::discretize_gaussian(g, {0.7}, 0.8));
    const double h = g.cell_width();
    EXPECT_GE(e, prev - h * h);
    prev = e;
  }
}

TEST(DisplacementInterpolation, EndpointsAndMass) {
  const GridSpec g{2, 3.0, 8};
  const auto a = wot::random_histogram(g, 1, 0.5);
  const auto b = wot::random_histogram(g, 2, 0.5);
  const auto mu0 = a.to_measure();
  const auto mu1 = b.to_measure();
  const auto sol = wot::solve_exact(mu0, mu1, wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2)));
  const auto r0 = wot::displacement_interpolate(mu0.points(), mu1.points(), sol.plan, 0.0, g);
  const auto r1 = wot::displacement_interpolate(mu0.points(), mu1.points(), sol.plan, 1.0, g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    EXPECT_NEAR(r0.masses[c], a.masses[c], 1e-15);
    EXPECT_NEAR(r1.masses[c], b.masses[c], 1e-15);
  }
  for (double t : kTimes) {
    const auto rt = wot::displacement_interpolate(mu0.points(), mu1.points(), sol.plan, t, g);
    EXPECT_NEAR(std::accumulate(rt.masses.begin(), rt.masses.end(), 0.0), 1.0, 1e-13);
  }
}

TEST(DisplacementInterpolation, PointOutsideTheBoxIsAnError) {
  const GridSpec g{1, 1.0, 4};
  wot::TransportPlan plan;
  plan.mass = wot::Matrix::Ones(1, 1);
  plan.source_weights = {1.0};
  plan.target_weights = {1.0};
  EXPECT_THROW(wot::displacement_interpolate({{0.0}}, {{3.0}}, plan, 0.5, g), std::out_of_range);
  EXPECT_THROW(wot::displacement_interpolate({{0.0}}, {{0.5}}, plan, 1.5, g), std::invalid_argument);
}

TEST(DisplacementInterpolation, ConstantSpeed) {
  const std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
  for (auto [g, a, b] : {std::tuple{GridSpec{1, 8.0, 400}, wot::discretize_gaussian(GridSpec{1, 8.0, 400}, {-1.0}),
                                    wot::discretize_gaussian(GridSpec{1, 8.0, 400}, {1.0})},
                         std::tuple{GridSpec{2, 3.0, 8}, wot::random_histogram(GridSpec{2, 3.0, 8}, 5, 0.4),
                                    wot::random_histogram(GridSpec{2, 3.0, 8}, 6, 0.4)}}) {
    const auto mu0 = a.to_measure();
    const auto mu1 = b.to_measure();
    const auto sol = wot::solve_exact(mu0, mu1, wot::build_cost_matrix(mu0, mu1, CostSpec::lp_squared(2)));
    const double w = std::sqrt(sol.value);
    std::vector<Histogram> rho;
    for (double t : ts) rho.push_back(wot::displacement_interpolate(mu0.points(), mu1.points(), sol.plan, t, g));
    // binning moves every atom by at most half a cell diagonal at each end
    const double tol = std::sqrt(static_cast<double>(g.dim)) * g.cell_width();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = i + 1; j < ts.size(); ++j) {
        EXPECT_NEAR(w2_between(rho[i], rho[j]), (ts[j] - ts[i]) * w, tol) << ts[i] << " " << ts[j];
      }
    }
  }
}

TEST(KConvexity, GaussianEqualityCase) {
  const GridSpec g{1, 8.0, 400};
  const auto r = wot::kconvexity_deficit(wot::discretize_gaussian(g, {-1.0}), wot::discretize_gaussian(g, {1.0}),
                                         CostSpec::lp_squared(2), 1.0, kTimes);
  EXPECT_NEAR(r.w2, 4.0, 1e-9);
  EXPECT_NEAR(r.entropy0, 0.5, 1e-3);
  EXPECT_TRUE(r.equality_within_tolerance());
  EXPECT_LE(r.max_abs_deficit, 1e-3);
  EXPECT_EQ(r.tolerance, 5.0 * 0.04);
  EXPECT_EQ(r.rows.size(), kTimes.size());
}

TEST(KConvexity, DeficitShrinksUnderRefinement) {
  double prev = INFINITY;
  for (int m : {100, 200, 400}) {
    const GridSpec g{1, 8.0, m};
    const auto r = wot::kconvexity_deficit(wot::discretize_gaussian(g, {-1.0}), wot::discretize_gaussian(g, {1.0}),
                                           CostSpec::lp_squared(2), 1.0, kTimes);
    EXPECT_LE(r.max_abs_deficit, r.tolerance);
    EXPECT_LT(r.max_abs_deficit, prev);
    prev = r.max_abs_deficit;
  }
}

TEST(KConvexity, DeficitsDecreaseWithK) {
  const GridSpec g{2, 3.0, 8};
  const auto a = wot::random_histogram(g, 7);
  const auto b = wot::random_histogram(g, 8);
  const auto r0 = wot::kconvexity_deficit(a, b, CostSpec::linf_squared(), 0.0, kTimes);
  const auto r1 = wot::kconvexity_deficit(a, b, CostSpec::linf_squared(), 1.0, kTimes);
  for (std::size_t i = 0; i < kTimes.size(); ++i) EXPECT_GE(r0.rows[i].deficit, r1.rows[i].deficit);
}

TEST(KConvexity, RandomOneDimensionalPairSupNorm) {
  const GridSpec g{1, 4.0, 40};
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = wot::kconvexity_deficit(wot::random_histogram(g, 2 * s), wot::random_histogram(g, 2 * s + 1),
                                           CostSpec::linf_squared(), 1.0, kTimes);
    EXPECT_TRUE(r.convex_within_tolerance()) << r.min_deficit;
  }
}

TEST(KConvexity, InfiniteEntropyIsReportedNotThrown) {
  const GridSpec g{1, 100.0, 4};
  // far cells carry Gaussian mass that underflows to zero
  std::vector<double> m(4, 0.0);
  m[0] = 1.0;
  const Histogram far(g, m);
  const auto r = wot::kconvexity_deficit(far, far, CostSpec::lp_squared(2), 1.0, {0.5});
  EXPECT_TRUE(r.infinite_entropy);
  EXPECT_FALSE(r.convex_within_tolerance());
  EXPECT_THROW(wot::kconvexity_deficit(far, far, CostSpec::lp_metric(2), 1.0, {0.5}), std::invalid_argument);
}
