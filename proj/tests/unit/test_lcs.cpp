#include "flcs/lcs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace flcs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an flcs::Error";
  return ErrorCode::numerical;
}

using Scalar2 = std::function<double(double, double)>;

// A planar field filled from closed-form lambda1, xi1 direction angle and gap.
FieldGrid synthetic(const ChartDomain& window, int n0, int n1, const Scalar2& lambda, const Scalar2& xi_angle,
                    const Scalar2& gap) {
  FieldGrid f;
  f.window = window;
  f.resolution = {n0, n1};
  f.duration = 1.0;
  const std::size_t total = static_cast<std::size_t>(n0) * n1;
  f.lambda1.resize(total);
  f.ftle.resize(total);
  f.gap.resize(total);
  f.xi1.assign(2, std::vector<double>(total));
  f.valid.assign(total, 1);
  for (std::size_t i = 0; i < total; ++i) {
    const Vec x = f.node(i);
    f.lambda1[i] = lambda(x[0], x[1]);
    f.ftle[i] = std::log(f.lambda1[i]) / 2.0;
    f.gap[i] = gap(x[0], x[1]);
    const double a = xi_angle(x[0], x[1]);
    f.xi1[0][i] = std::cos(a);
    f.xi1[1][i] = std::sin(a);
  }
  return f;
}

const ChartDomain kSquare = make_chart({{-1.0, 1.0}, {-1.0, 1.0}}, {false, false});

AnalysisSetup saddle_setup(double kappa) {
  AnalysisSetup s;
  s.manifold = make_manifold("plane2");
  s.field = make_field("saddle", {{"a", 1.0}, {"kappa", kappa}});
  return s;
}

}  // namespace

TEST(Grid, CoordinatesIncludeEndpointsOnlyWhenNotPeriodic) {
  const ChartDomain torus = make_chart({{0.0, 1.0}, {0.0, 1.0}}, {true, false});
  EXPECT_DOUBLE_EQ(grid_coordinate(torus, 0, 4, 3), 0.75);
  EXPECT_DOUBLE_EQ(grid_coordinate(torus, 1, 4, 3), 1.0);
  EXPECT_DOUBLE_EQ(grid_coordinate(torus, 1, 5, 2), 0.5);
}

TEST(Grid, WindowPeriodicOnlyOnFullPeriod) {
  const ChartDomain chart = make_manifold("flat_torus2").chart;
  const double p = 2.0 * std::numbers::pi;
  const ChartDomain w = make_window(chart, {{0.0, p}, {0.0, 1.0}});
  EXPECT_TRUE(w.periodic[0]);
  EXPECT_FALSE(w.periodic[1]);
}

TEST(Grid, FlatIndexRoundTrip) {
  FieldGrid f = synthetic(kSquare, 9, 11, [](double, double) { return 2.0; }, [](double, double) { return 0.0; },
                          [](double, double) { return 1.0; });
  for (std::size_t i : {std::size_t{0}, std::size_t{17}, std::size_t{98}}) EXPECT_EQ(f.index(f.multi_index(i)), i);
  EXPECT_EQ(f.multi_index(12), (std::vector<int>{1, 1}));
  f.validate();
  f.ftle[3] += 1e-6;
  EXPECT_EQ(code_of([&] { f.validate(); }), ErrorCode::invalid_argument);
}

TEST(Field, LinearSaddleIsUniform) {
  const AnalysisSetup s = saddle_setup(0.0);
  const ChartDomain w = make_window(s.manifold.chart, {{-3.0, 3.0}, {-3.0, 3.0}});
  const FieldGrid f = compute_field(s, w, {16, 16}, 0.0, 1.0);
  EXPECT_EQ(f.invalid_count, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(f.lambda1[i] / std::exp(2.0), 1.0, 1e-6);
    EXPECT_NEAR(f.ftle[i], 1.0, 1e-6);
    EXPECT_NEAR(std::abs(f.xi1[0][i]), 1.0, 1e-9);
  }
}

TEST(Field, ThreadCountDoesNotChangeValues) {
  AnalysisSetup s;
  s.manifold = make_manifold("rect_dg");
  s.field = make_field("double_gyre");
  const ChartDomain w = s.manifold.chart;
  const FieldGrid a = compute_field(s, w, {16, 8}, 0.0, 5.0, 1);
  const FieldGrid b = compute_field(s, w, {16, 8}, 0.0, 5.0, 3);
  EXPECT_EQ(a.lambda1, b.lambda1);
  EXPECT_EQ(a.xi1, b.xi1);
  EXPECT_EQ(a.gap, b.gap);
}

TEST(Field, ExitsAreMaskedAndCounted) {
  AnalysisSetup s = saddle_setup(0.0);
  s.manifold = make_manifold("plane2", {{"half_width", 1.0}});
  const FieldGrid f = compute_field(s, s.manifold.chart, {16, 16}, 0.0, 1.0);
  EXPECT_GT(f.invalid_count, 0);
  EXPECT_TRUE(f.coverage_warning);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.valid[i]) EXPECT_TRUE(std::isnan(f.lambda1[i]));
  }
  // |x0| < e^-1 stays inside
  const std::size_t centre = f.index({7, 7});
  EXPECT_TRUE(f.valid[centre]);
}

TEST(Field, Errors) {
  const AnalysisSetup s = saddle_setup(0.0);
  const ChartDomain w = make_window(s.manifold.chart, {{-1.0, 1.0}, {-1.0, 1.0}});
  EXPECT_EQ(code_of([&] { compute_field(s, w, {4, 16}, 0.0, 1.0); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { compute_field(s, w, {16, 16}, 0.0, 0.0); }), ErrorCode::division);
  const ChartDomain outside = make_chart({{-20.0, 1.0}, {-1.0, 1.0}}, {false, false});
  EXPECT_EQ(code_of([&] { compute_field(s, outside, {16, 16}, 0.0, 1.0); }), ErrorCode::domain);
  AnalysisSetup tiny = s;
  tiny.manifold = make_manifold("plane2", {{"half_width", 1.0}});
  const ChartDomain edge = make_chart({{0.9, 1.0}, {-0.1, 0.1}}, {false, false});
  EXPECT_EQ(code_of([&] { compute_field(tiny, edge, {8, 8}, 0.0, 2.0); }), ErrorCode::empty_field);
}

TEST(Field, HypercomplexRegimeNeedsStructure) {
  AnalysisSetup s = saddle_setup(0.0);
  s.regime = Regime::hypercomplex;
  Vec x(2);
  x << 0.1, 0.1;
  EXPECT_EQ(code_of([&] { analyze_point(s, x, 0.0, 1.0); }), ErrorCode::invalid_argument);
}

TEST(Field, FinslerFallbackAtStagnationPoint) {
  AnalysisSetup s = saddle_setup(0.0);
  s.regime = Regime::finsler;
  Vec b(2);
  b << 0.1, 0.0;
  s.finsler = randers_norm(s.manifold.metric, b);
  Vec fallback(2);
  fallback << 1.0, 0.0;
  s.finsler_fallback = fallback;
  const NodeAnalysis n = analyze_point(s, Vec::Zero(2), 0.0, 1.0);
  EXPECT_TRUE(n.finsler_fallback);
  s.finsler_fallback = Vec();
  EXPECT_EQ(code_of([&] { analyze_point(s, Vec::Zero(2), 0.0, 1.0); }), ErrorCode::singularity);
}

TEST(Quantile, LinearInterpolationOfOrderStatistics) {
  FieldGrid f = synthetic(kSquare, 8, 8, [](double x, double) { return 2.0 + x; }, [](double, double) { return 0.0; },
                          [](double, double) { return 1.0; });
  EXPECT_DOUBLE_EQ(lambda1_quantile(f, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(lambda1_quantile(f, 1.0), 3.0);
  EXPECT_NEAR(lambda1_quantile(f, 0.5), 2.0, 1e-15);
}

TEST(LevelSet, CircleContour) {
  // lambda1 = 2 + r^2 with xi1 radial: the level set is a circle and its normals align with xi1.
  const FieldGrid f = synthetic(
      kSquare, 65, 65, [](double x, double y) { return 2.0 + x * x + y * y; },
      [](double x, double y) { return std::atan2(y, x); }, [](double, double) { return 1.0; });
  const RidgeSet r = extract_level_set(f, 0.3);
  ASSERT_EQ(r.polylines.size(), 1u);
  EXPECT_TRUE(r.polylines[0].closed);
  const double radius = std::sqrt(r.level - 2.0);
  for (const auto& p : r.polylines[0].points) {
    EXPECT_NEAR(std::hypot(p.x, p.y), radius, 2e-3);
    EXPECT_LT(p.angle, 1e-2);
  }
  const AlignmentReport a = verify_alignment(r);
  EXPECT_TRUE(a.passed);
  EXPECT_EQ(a.used_points, r.point_count());
}

TEST(LevelSet, AngleReportsMisalignment) {
  // Same circles but xi1 tangential: every angle is ~90 degrees.
  const FieldGrid f = synthetic(
      kSquare, 33, 33, [](double x, double y) { return 2.0 + x * x + y * y; },
      [](double x, double y) { return std::atan2(y, x) + std::numbers::pi / 2; }, [](double, double) { return 1.0; });
  const AlignmentReport a = verify_alignment(extract_level_set(f, 0.5));
  EXPECT_FALSE(a.passed);
  EXPECT_NEAR(a.median, std::numbers::pi / 2, 0.05);
}

TEST(LevelSet, SmallGapPointsAreExcludedFromAlignment) {
  const FieldGrid f = synthetic(
      kSquare, 33, 33, [](double x, double y) { return 2.0 + x * x + y * y; },
      [](double x, double y) { return std::atan2(y, x); }, [](double, double) { return 0.0; });
  const AlignmentReport a = verify_alignment(extract_level_set(f, 0.5), 1e-3);
  EXPECT_EQ(a.used_points, 0u);
  EXPECT_FALSE(a.passed);
}

TEST(LevelSet, Errors) {
  const FieldGrid f = synthetic(kSquare, 8, 8, [](double x, double) { return 2.0 + x; },
                                [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  try {
    extract_level_set(f, 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "quantile out of (0,1)");
  }
  EXPECT_EQ(code_of([&] { extract_level_set(f, 0.0); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { verify_alignment(RidgeSet{}); }), ErrorCode::empty_input);
}

TEST(LevelSet, ConstantFieldHasNoContour) {
  const FieldGrid f = synthetic(kSquare, 8, 8, [](double, double) { return 5.0; }, [](double, double) { return 0.0; },
                                [](double, double) { return 1.0; });
  EXPECT_TRUE(extract_level_set(f, 0.5).empty());
}

TEST(Ridge, GaussianRidgeLine) {
  // Ridge along x = 0.3 with negative transverse curvature.
  const FieldGrid f = synthetic(
      kSquare, 64, 64, [](double x, double y) { return 2.0 + std::exp(-(x - 0.3) * (x - 0.3) / 0.08) + 0.1 * y; },
      [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  const RidgeSet r = extract_ridges(f, 0.0, 0.0);
  ASSERT_FALSE(r.empty());
  const RidgeSet main = dominant_polylines(r, 0.9);
  for (const auto& line : main.polylines) {
    for (const auto& p : line.points) {
      EXPECT_NEAR(p.x, 0.3, 2e-3);
      EXPECT_LT(p.angle, 1e-2);
    }
  }
}

TEST(Ridge, ValleysAreRejected) {
  const FieldGrid f = synthetic(
      kSquare, 32, 32, [](double x, double) { return 2.0 + x * x; }, [](double, double) { return 0.0; },
      [](double, double) { return 1.0; });
  EXPECT_TRUE(extract_ridges(f, 0.0, 0.0).empty());
}

TEST(Ridge, FiltersOnValueAndGap) {
  const FieldGrid f = synthetic(
      kSquare, 32, 32, [](double x, double) { return 2.0 + std::exp(-x * x / 0.05); },
      [](double, double) { return 0.0; }, [](double, double) { return 0.5; });
  EXPECT_FALSE(extract_ridges(f, 0.0, 0.0).empty());
  EXPECT_TRUE(extract_ridges(f, 0.6, 0.0).empty());
  EXPECT_TRUE(extract_ridges(f, 0.0, 10.0).empty());
  ExtractionSettings s;
  s.min_value_quantile = 0.99;
  EXPECT_LE(extract_ridges(f, s).point_count(), extract_ridges(f, 0.0, 0.0).point_count());
}

TEST(Ridge, CoarseGridRejected) {
  const FieldGrid f = synthetic(kSquare, 8, 8, [](double x, double) { return 2.0 - x * x; },
                                [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  EXPECT_EQ(code_of([&] { extract_ridges(f, 0.0, 0.0); }), ErrorCode::invalid_argument);
}

TEST(Distance, HausdorffOfShiftedLines) {
  RidgeSet a, b;
  Polyline la, lb;
  for (int k = 0; k <= 10; ++k) {
    RidgePoint p;
    p.x = 0.0;
    p.y = -1.0 + 0.2 * k;
    la.points.push_back(p);
    p.x = 0.25;
    lb.points.push_back(p);
  }
  a.polylines.push_back(la);
  b.polylines.push_back(lb);
  EXPECT_EQ(hausdorff(a, a, kSquare), 0.0);
  EXPECT_NEAR(hausdorff(a, b, kSquare), 0.25, 1e-15);
  EXPECT_NEAR(distance_to_ridges(0.1, 0.05, a, kSquare), 0.1, 1e-15);
}

TEST(Distance, PeriodicWrap) {
  const ChartDomain ring = make_chart({{0.0, 1.0}, {0.0, 1.0}}, {true, true});
  RidgeSet a;
  Polyline l;
  RidgePoint p;
  p.x = 0.95;
  p.y = 0.2;
  l.points.push_back(p);
  p.y = 0.8;
  l.points.push_back(p);
  a.polylines.push_back(l);
  EXPECT_NEAR(distance_to_ridges(0.05, 0.5, a, ring), 0.1, 1e-12);
}

TEST(Distance, DominantPolylinesKeepsLongest) {
  RidgeSet r;
  for (int len : {3, 10, 2}) {
    Polyline l;
    l.points.resize(len);
    r.polylines.push_back(l);
  }
  const RidgeSet d = dominant_polylines(r, 0.6);
  ASSERT_EQ(d.polylines.size(), 1u);
  EXPECT_EQ(d.polylines[0].points.size(), 10u);
}

TEST(Invariance, SaddleRidgeStaysOnStableManifold) {
  const AnalysisSetup s = saddle_setup(0.5);
  const ChartDomain w = make_window(s.manifold.chart, {{-3.0, 3.0}, {-3.0, 3.0}});
  const FieldGrid f = compute_field(s, w, {32, 32}, 0.0, 2.0);
  ExtractionSettings settings;
  const RidgeSet r = extract_ridges(f, settings);
  ASSERT_FALSE(r.empty());
  for (const auto& line : r.polylines) {
    for (const auto& p : line.points) EXPECT_NEAR(p.x, 0.0, 1e-9);
  }
  const InvarianceReport inv = verify_invariance(r, s, w, {32, 32}, 0.0, 2.0, 0.5, settings);
  EXPECT_FALSE(inv.degenerate_empty);
  EXPECT_LE(inv.max_distance, 1e-6);
}

TEST(Invariance, EmptySetIsDegenerate) {
  const AnalysisSetup s = saddle_setup(0.0);
  const ChartDomain w = make_window(s.manifold.chart, {{-1.0, 1.0}, {-1.0, 1.0}});
  EXPECT_TRUE(verify_invariance(RidgeSet{}, s, w, {16, 16}, 0.0, 1.0, 0.1, ExtractionSettings{}).degenerate_empty);
}
