#pragma once

#include "flcs/deformation.hpp"
#include "flcs/flow.hpp"
#include "flcs/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flcs {

enum class MetricEval { two_point, base_only };

std::string_view to_string(MetricEval mode);
MetricEval metric_eval_from_string(std::string_view name);

/// Everything a grid sweep needs besides the window: manifold, flow, regime and integrator.
struct AnalysisSetup {
  Manifold manifold;
  VectorFieldSpec field;
  Regime regime = Regime::riemannian;
  MetricEval metric_eval = MetricEval::two_point;
  /// Present iff regime == finsler.
  std::optional<FinslerNorm> finsler;
  /// Reference direction used when |X| < 1e-12; empty disables the fallback.
  Vec finsler_fallback;
  IntegratorConfig integrator;
};

inline constexpr double kZeroFlowSpeed = 1e-12;

/// Per-node outcome of the deformation pipeline at one chart point.
struct NodeAnalysis {
  FlowMapResult flow;
  CauchyGreenTensor tensor;
  EigenDecomposition eigen;
  bool finsler_fallback = false;
  double commutation_defect = 0.0;
};

NodeAnalysis analyze_point(const AnalysisSetup& setup, const Vec& x, double t0, double duration);

struct FieldGrid {
  /// Sampling window. Periodic axes exclude the upper endpoint; others include both ends.
  ChartDomain window;
  std::vector<int> resolution;
  double t0 = 0.0;
  double duration = 0.0;
  Regime regime = Regime::riemannian;

  std::vector<double> lambda1;
  std::vector<double> ftle;
  std::vector<double> gap;
  std::vector<std::vector<double>> xi1;  // [component][node]
  std::vector<std::uint8_t> valid;

  long invalid_count = 0;
  bool coverage_warning = false;
  long finsler_fallbacks = 0;
  double max_commutation_defect = 0.0;
  double max_asymmetry = 0.0;
  std::string config_hash;

  std::size_t size() const { return lambda1.size(); }
  int dim() const { return window.dim; }
  /// Flat node index; the last axis varies fastest.
  std::size_t index(const std::vector<int>& multi) const;
  std::vector<int> multi_index(std::size_t flat) const;
  Vec node(std::size_t flat) const;
  double spacing(int axis) const;

  /// Throws invalid_argument when array sizes or FTLE consistency are violated.
  void validate() const;
};

/// Coordinate of sample `i` along `axis` of a window sampled with `n` points.
double grid_coordinate(const ChartDomain& window, int axis, int n, int i);

/// Window whose periodic flags are set only on axes spanning a full chart period.
ChartDomain make_window(const ChartDomain& chart, std::vector<Interval> bounds);

inline constexpr double kCoverageWarningFraction = 0.10;

/// Parallel sweep over the window. `threads` = 0 picks the hardware concurrency.
FieldGrid compute_field(const AnalysisSetup& setup, const ChartDomain& window, const std::vector<int>& resolution,
                        double t0, double duration, int threads = 1);

enum class ExtractionMode { level_set, ridge };

std::string_view to_string(ExtractionMode mode);
ExtractionMode extraction_mode_from_string(std::string_view name);

struct RidgePoint {
  double x = 0.0;
  double y = 0.0;
  double lambda1 = 0.0;
  double nx = 0.0;  // unit normal estimate
  double ny = 0.0;
  double xi_x = 0.0;  // dominant eigenvector (unit, chart coordinates)
  double xi_y = 0.0;
  double angle = 0.0;  // angle between the lines spanned by normal and xi1, in [0, pi/2]
  double gap = 0.0;
};

struct Polyline {
  std::vector<RidgePoint> points;
  bool closed = false;
};

struct RidgeSet {
  ExtractionMode mode = ExtractionMode::level_set;
  double level = 0.0;  // iso-level for level_set extraction
  std::vector<Polyline> polylines;

  std::size_t point_count() const;
  bool empty() const { return point_count() == 0; }
};

/// Angle between two lines through the origin, in [0, pi/2].
double line_angle(double ax, double ay, double bx, double by);

/// q-quantile (linear interpolation between order statistics) of the valid lambda1 samples.
double lambda1_quantile(const FieldGrid& field, double q);

/// Iso-contours of lambda1 at its q-quantile; normals from the lambda1 gradient.
RidgeSet extract_level_set(const FieldGrid& field, double quantile);

/// Second-derivative ridges of lambda1 with negative transverse curvature.
RidgeSet extract_ridges(const FieldGrid& field, double min_gap, double min_value);

struct ExtractionSettings {
  double quantile = 0.95;
  double min_gap = 0.0;
  double min_value = 0.0;
  /// When > 0, ridge points additionally need lambda1 >= this quantile of the field.
  double min_value_quantile = 0.0;

  bool operator==(const ExtractionSettings&) const = default;
};

/// Ridge extraction honouring both absolute and quantile-based lambda1 floors.
RidgeSet extract_ridges(const FieldGrid& field, const ExtractionSettings& settings);

struct AlignmentReport {
  std::size_t total_points = 0;
  std::size_t used_points = 0;
  double mean = 0.0;  // radians
  double median = 0.0;
  double p95 = 0.0;
  double max_median = 0.0;
  bool passed = false;
};

inline constexpr double kAlignmentMinRelGap = 1e-8;
inline constexpr double kAlignmentMaxMedianDeg = 10.0;

/// Statistics of the normal/xi1 angle over points with gap >= min_rel_gap * lambda1.
AlignmentReport verify_alignment(const RidgeSet& ridges, double min_rel_gap = kAlignmentMinRelGap,
                                 double max_median_deg = kAlignmentMaxMedianDeg);

struct InvarianceReport {
  bool degenerate_empty = false;
  std::size_t advected_points = 0;
  std::size_t exited_points = 0;
  std::size_t new_ridge_points = 0;
  double cell_size = 0.0;  // chart units per grid cell
  double mean_distance = 0.0;
  double median_distance = 0.0;
  double max_distance = 0.0;
  double mean_cells = 0.0;
  double max_cells = 0.0;
  RidgeSet new_ridges;
};

/// Advects ridge points by `offset`, re-extracts on the window (t0 + offset, T) and measures the
/// distance from the advected points to the new set.
InvarianceReport verify_invariance(const RidgeSet& ridges, const AnalysisSetup& setup, const ChartDomain& window,
                                   const std::vector<int>& resolution, double t0, double duration, double offset,
                                   const ExtractionSettings& settings, int threads = 1);

/// Same check against a field already computed on the shifted window (t0 + offset, T).
InvarianceReport verify_invariance(const RidgeSet& ridges, const AnalysisSetup& setup, const FieldGrid& shifted,
                                   double offset, const ExtractionSettings& settings);

/// Distance from a point to the nearest segment of a ridge set (periodic axes of `window` wrap).
double distance_to_ridges(double x, double y, const RidgeSet& ridges, const ChartDomain& window);
/// max over points of `from` of their distance to `to`.
double directed_hausdorff(const RidgeSet& from, const RidgeSet& to, const ChartDomain& window);
double hausdorff(const RidgeSet& a, const RidgeSet& b, const ChartDomain& window);

/// Longest polylines holding at least `fraction` of all points.
RidgeSet dominant_polylines(const RidgeSet& ridges, double fraction);

}  // namespace flcs
