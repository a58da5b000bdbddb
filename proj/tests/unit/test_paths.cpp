#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wot/paths.hpp"
#include "wot/rng.hpp"

using wot::DyadicPath;

TEST(DyadicPath, RejectsWrongKnotCount) {
  EXPECT_THROW(DyadicPath(2, {0.0, 1.0, 2.0}), std::invalid_argument);
  EXPECT_NO_THROW(DyadicPath(1, {0.0, 1.0, 2.0}));
}

TEST(DyadicPath, RejectsNonzeroStartAndNonFinite) {
  EXPECT_THROW(DyadicPath(0, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(DyadicPath(0, {0.0, NAN}), std::invalid_argument);
  EXPECT_THROW(DyadicPath(-1), std::invalid_argument);
  EXPECT_THROW(DyadicPath(21), std::invalid_argument);
}

TEST(DyadicPath, EvaluatesExactlyAtKnotsAndLinearlyBetween) {
  const DyadicPath w(2, {0.0, 1.0, -1.0, 0.5, 2.0});
  EXPECT_EQ(w(0.25), 1.0);
  EXPECT_EQ(w(0.5), -1.0);
  EXPECT_EQ(w(1.0), 2.0);
  EXPECT_DOUBLE_EQ(w(0.125), 0.5);
  EXPECT_DOUBLE_EQ(w(0.875), 1.25);
  EXPECT_THROW(w(1.5), std::out_of_range);
  EXPECT_THROW(w(-0.1), std::out_of_range);
}

TEST(DyadicPath, ProjectionPicksCoarseKnots) {
  const DyadicPath w(2, {0.0, 1.0, -1.0, 0.5, 2.0});
  const DyadicPath p = wot::project(w, 1);
  EXPECT_EQ(p, DyadicPath(1, {0.0, -1.0, 2.0}));
  EXPECT_EQ(wot::project(w, 2), w);
}

TEST(DyadicPath, ProjectionIsIdempotentAndRefinementExact) {
  const DyadicPath w = wot::sample_brownian(6, 11);
  for (int m = 0; m <= 6; ++m) {
    const DyadicPath p = wot::project(w, m);
    EXPECT_EQ(wot::project(p, m), p);
    // refining and coming back is the identity
    EXPECT_EQ(wot::project(wot::project(p, 8), m), p);
    for (int n = 0; n <= m; ++n) EXPECT_EQ(wot::project(p, n), wot::project(w, n));
  }
}

TEST(DyadicPath, LinearPathIsFixedByProjection) {
  const DyadicPath w = DyadicPath::from_function(8, [](double t) { return 3.0 * t; });
  for (int m = 0; m <= 8; ++m) {
    const DyadicPath p = wot::project(w, m);
    for (std::size_t j = 0; j <= p.cells(); ++j) EXPECT_DOUBLE_EQ(p.knot(j), 3.0 * j / p.cells());
  }
}

TEST(DyadicPath, ArithmeticUsesCommonRefinement) {
  const DyadicPath a(1, {0.0, 1.0, 0.0});
  const DyadicPath b(2, {0.0, 1.0, 1.0, 1.0, 1.0});
  const DyadicPath s = a + b;
  EXPECT_EQ(s.level(), 2);
  EXPECT_EQ(s, DyadicPath(2, {0.0, 1.5, 2.0, 1.5, 1.0}));
  EXPECT_EQ(b - b, DyadicPath(2));
  EXPECT_EQ(2.0 * a, DyadicPath(1, {0.0, 2.0, 0.0}));
}

TEST(Brownian, SeedIsReproducible) {
  EXPECT_EQ(wot::sample_brownian(7, 42), wot::sample_brownian(7, 42));
  EXPECT_NE(wot::sample_brownian(7, 42), wot::sample_brownian(7, 43));
}

TEST(Brownian, EnsembleUsesConsecutiveSeeds) {
  const auto ens = wot::sample_brownian_ensemble(4, 3, 100);
  ASSERT_EQ(ens.size(), 3u);
  EXPECT_EQ(ens[2], wot::sample_brownian(4, 102));
}

TEST(Brownian, TerminalVarianceIsOne) {
  // Var W(1) = 1; 4000 samples put the estimate within about 0.07 (3 sigma).
  double s2 = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double x = wot::sample_brownian(5, 1000 + i).knot(32);
    s2 += x * x;
  }
  EXPECT_NEAR(s2 / n, 1.0, 0.07);
}

TEST(Brownian, IncrementsHaveCellVariance) {
  // E sum (dW)^2 = 1 for every level; the sum concentrates at level 10.
  const DyadicPath w = wot::sample_brownian(10, 5);
  double qv = 0.0;
  for (std::size_t c = 0; c < w.cells(); ++c) qv += std::pow(w.knot(c + 1) - w.knot(c), 2);
  EXPECT_NEAR(qv, 1.0, 0.15);
}

TEST(GaussianSource, PolarMethodMoments) {
  wot::GaussianSource g(3);
  double m1 = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = g.normal();
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  EXPECT_NEAR(m1 / n, 0.0, 0.01);
  EXPECT_NEAR(m2 / n, 1.0, 0.01);
  EXPECT_NEAR(m4 / n, 3.0, 0.05);
}

TEST(Norms, CameronMartinOfLinearPath) {
  const DyadicPath w = DyadicPath::from_function(5, [](double t) { return 2.0 * t; });
  EXPECT_NEAR(wot::cameron_martin_norm(w), 2.0, 1e-14);
}

TEST(Norms, SupNormIsKnotMaximum) {
  const DyadicPath w(2, {0.0, 1.0, -3.0, 0.5, 2.0});
  EXPECT_EQ(wot::sup_norm(w), 3.0);
}

TEST(PathCsv, WritesKnotTable) {
  std::ostringstream os;
  wot::write_path_csv(os, DyadicPath(1, {0.0, 1.0, 0.5}));
  EXPECT_EQ(os.str(), "t,value\n0,0\n0.5,1\n1,0.5\n");
}
