#include "flcs/deformation.hpp"
#include "flcs/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace flcs;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

}  // namespace

TEST(ReferenceAdvect, SaddleClosedForm) {
  const Vec end = oracle::reference_advect(v2(0.4, -0.3), 0.0, 1.0, make_field("saddle"), 0.01);
  EXPECT_NEAR(end[0], 0.4 * std::exp(1.0), 1e-10);
  EXPECT_NEAR(end[1], -0.3 * std::exp(-1.0), 1e-10);
}

TEST(ReferenceAdvect, ZeroFieldIsExact) {
  const Vec x = v2(0.123456789, -9.87654321);
  const Vec end = oracle::reference_advect(x, 0.0, 3.0, make_field("zero"), 0.01);
  EXPECT_EQ(end, x);
}

TEST(ReferenceAdvect, ProductionAdaptiveAgreesOnDoubleGyre) {
  const VectorFieldSpec f = make_field("double_gyre");
  const ChartDomain chart = make_manifold("rect_dg").chart;
  std::mt19937_64 rng(8);
  for (int k = 0; k < 6; ++k) {
    const Vec x = v2(std::uniform_real_distribution<double>(0.1, 1.9)(rng),
                     std::uniform_real_distribution<double>(0.1, 0.9)(rng));
    const Vec mine = advect_unwrapped(x, 0.0, 10.0, f, chart, IntegratorConfig{});
    const Vec ref = oracle::reference_advect(x, 0.0, 10.0, f, 0.01);
    EXPECT_LE((mine - ref).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ReferenceJacobian, SaddleDiagonal) {
  const Mat j = oracle::reference_jacobian_fd(v2(0.2, 0.1), 0.0, 1.0, make_field("saddle"), 0.01, 1e-4);
  EXPECT_NEAR(j(0, 0), std::exp(1.0), 1e-8);
  EXPECT_NEAR(j(1, 1), std::exp(-1.0), 1e-8);
}

TEST(Charpoly, DiagonalCasesExact) {
  Mat c = Mat::Zero(3, 3);
  c(0, 0) = 2.0;
  c(1, 1) = 7.0;
  c(2, 2) = 0.5;
  const std::vector<double> r = oracle::charpoly_eigs(c, Mat::Identity(3, 3));
  EXPECT_NEAR(r[0], 7.0, 1e-14);
  EXPECT_NEAR(r[1], 2.0, 1e-14);
  EXPECT_NEAR(r[2], 0.5, 1e-14);
  Mat c2 = Mat::Zero(2, 2);
  c2(0, 0) = 4.0;
  c2(1, 1) = 1.0;
  const std::vector<double> r2 = oracle::charpoly_eigs(c2, 2.0 * Mat::Identity(2, 2));
  EXPECT_EQ(r2[0], 2.0);
  EXPECT_EQ(r2[1], 0.5);
}

TEST(Charpoly, IdentityBaseIsStandardProblem) {
  Mat c(2, 2);
  c << 2.0, 1.0, 1.0, 2.0;
  const std::vector<double> r = oracle::charpoly_eigs(c, Mat::Identity(2, 2));
  EXPECT_NEAR(r[0], 3.0, 1e-15);
  EXPECT_NEAR(r[1], 1.0, 1e-15);
}

TEST(Charpoly, AgreesWithCholeskyReduction) {
  std::mt19937_64 rng(314);
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + k % 2;
    CauchyGreenTensor t;
    t.C = random_spd(rng, n);
    t.G0 = random_spd(rng, n);
    const EigenDecomposition e = generalized_eigendecomp(t);
    const std::vector<double> r = oracle::charpoly_eigs(t.C, t.G0);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(r[i], e.values[i], 1e-8 * e.values[0]);
  }
}

TEST(Charpoly, FourDimensionsUnsupported) {
  try {
    oracle::charpoly_eigs(Mat::Identity(4, 4), Mat::Identity(4, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_dimension);
  }
}

TEST(StretchRatio, EigenvectorGivesEigenvalue) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat F(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) F(i, j) = g(rng);
  }
  const Mat gs = random_spd(rng, 3), ge = random_spd(rng, 3);
  const EigenDecomposition e = generalized_eigendecomp(cauchy_green_riemannian(F, gs, ge));
  EXPECT_NEAR(oracle::stretch_ratio_sample(F, gs, ge, e.vectors.col(0)), e.values[0], 1e-10 * e.values[0]);
  for (int k = 0; k < 1000; ++k) {
    Vec v(3);
    for (int i = 0; i < 3; ++i) v[i] = g(rng);
    const double ratio = oracle::stretch_ratio_sample(F, gs, ge, v);
    EXPECT_GE(ratio, e.values[2] - 1e-10);
    EXPECT_LE(ratio, e.values[0] + 1e-10);
  }
}

TEST(StretchRatio, IdentityIsOne) {
  std::mt19937_64 rng(1);
  const Mat g = random_spd(rng, 2);
  EXPECT_NEAR(oracle::stretch_ratio_sample(Mat::Identity(2, 2), g, g, v2(0.3, -2.0)), 1.0, 1e-15);
}

TEST(StretchRatio, ZeroVectorIsDomainError) {
  try {
    oracle::stretch_ratio_sample(Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), v2(0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain);
  }
}

TEST(HypercomplexTermwise, MatchesProductionSum) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  const HypercomplexStructure h = standard_quaternionic();
  for (int k = 0; k < 100; ++k) {
    Mat F(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) F(i, j) = g(rng);
    }
    const Mat metric = random_spd(rng, 4);
    const Mat fast = hypercomplex_sum(F, metric, h);
    EXPECT_LE((fast - oracle::hypercomplex_termwise(F, metric, h)).cwiseAbs().maxCoeff(),
              1e-12 * fast.cwiseAbs().maxCoeff());
  }
}
