#pragma once

#include "flcs/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flcs {

using Params = std::map<std::string, double, std::less<>>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Interval&) const = default;
};

/// A single global chart with optional periodic identification per axis.
struct ChartDomain {
  int dim = 2;
  std::vector<Interval> bounds;
  std::vector<bool> periodic;

  /// Throws invalid_argument if the chart is malformed.
  void validate() const;
  double extent(int axis) const { return bounds[axis].hi - bounds[axis].lo; }
  /// Maps periodic coordinates into [lo, hi); non-periodic ones are untouched.
  Vec wrap(const Vec& x) const;
  /// True when every non-periodic coordinate lies in [lo, hi] up to `slack` chart extents.
  bool contains(const Vec& x, double slack = 0.0) const;

  bool operator==(const ChartDomain&) const = default;
};

ChartDomain make_chart(std::vector<Interval> bounds, std::vector<bool> periodic);

struct RiemannianMetric {
  std::string name;
  int dim = 2;
  std::function<Mat(const Vec&)> eval;
};

/// Metric matrix at a chart point; periodic axes are wrapped first.
Mat metric_at(const RiemannianMetric& metric, const ChartDomain& chart, const Vec& x);

bool is_symmetric_positive_definite(const Mat& m, double symmetry_tol = 1e-12);
/// Throws ErrorCode::metric if `m` is not SPD.
void require_spd(const Mat& m, std::string_view what);

struct FinslerNorm {
  std::string name;
  int dim = 2;
  std::function<double(const Vec& x, const Vec& y)> eval;
  /// Analytic fundamental tensor; empty means finite differences are used.
  std::function<Mat(const Vec& x, const Vec& y)> fundamental;
};

/// Randers norm F(x, y) = sqrt(y^T a(x) y) + b . y over the metric `a`.
FinslerNorm randers_norm(RiemannianMetric a, Vec b);
/// Euclidean norm |y|, without an analytic fundamental tensor.
FinslerNorm euclidean_norm(int dim);

/// g_ij(x, y) = 1/2 d^2 F^2 / dy^i dy^j. Uses the analytic form when available.
Mat fundamental_tensor(const FinslerNorm& finsler, const Vec& x, const Vec& y);
/// Central second differences of F^2 in y with step 1e-4 |y|.
Mat fundamental_tensor_fd(const FinslerNorm& finsler, const Vec& x, const Vec& y);

inline constexpr double kFundamentalRelStep = 1e-4;

struct HypercomplexStructure {
  Mat I;
  Mat J;
  Mat K;
};

/// Left multiplication by i, j, k on quaternions (1, i, j, k) ~ R^4.
HypercomplexStructure standard_quaternionic();

struct HypercomplexReport {
  double i_squared = 0.0;  // |I^2 + Id|
  double j_squared = 0.0;
  double k_squared = 0.0;
  double ij_minus_k = 0.0;
  double jk_minus_i = 0.0;
  double ki_minus_j = 0.0;
  double max_deviation = 0.0;
  bool passed = false;
};

inline constexpr double kQuaternionTol = 1e-12;

HypercomplexReport hypercomplex_check(const HypercomplexStructure& h);
/// max over Q in {I, J, K} of max|Q^T G Q - G|.
double orthogonality_defect(const HypercomplexStructure& h, const Mat& g);

/// A catalog manifold: chart, metric, and whatever extra structure it carries.
struct Manifold {
  std::string id;
  ChartDomain chart;
  RiemannianMetric metric;
  Regime default_regime = Regime::riemannian;
  std::optional<Vec> default_randers_b;
  std::optional<HypercomplexStructure> structure;
};

/// Catalog ids: flat_torus2, bump_torus2, rect_dg, randers_torus2, quat_torus4, plane2.
Manifold make_manifold(std::string_view id, const Params& params = {});
const std::vector<std::string>& manifold_ids();
/// Parameter names (with defaults) accepted by a catalog manifold.
Params manifold_defaults(std::string_view id);

inline constexpr double kBumpAmplitude = 0.3;

}  // namespace flcs
