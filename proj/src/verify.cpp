#include "flcs/lcs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace flcs {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

AlignmentReport verify_alignment(const RidgeSet& ridges, double min_rel_gap, double max_median_deg) {
  if (ridges.empty()) throw Error(ErrorCode::empty_input, "alignment check needs a non-empty ridge set");
  AlignmentReport r;
  r.max_median = max_median_deg * std::numbers::pi / 180.0;
  std::vector<double> angles;
  for (const auto& line : ridges.polylines) {
    for (const auto& p : line.points) {
      ++r.total_points;
      if (!std::isfinite(p.angle)) continue;
      if (!(p.gap >= min_rel_gap * p.lambda1)) continue;
      angles.push_back(p.angle);
    }
  }
  r.used_points = angles.size();
  if (angles.empty()) return r;
  std::sort(angles.begin(), angles.end());
  r.mean = mean_of(angles);
  r.median = sorted_quantile(angles, 0.5);
  r.p95 = sorted_quantile(angles, 0.95);
  r.passed = r.median <= r.max_median;
  return r;
}

InvarianceReport verify_invariance(const RidgeSet& ridges, const AnalysisSetup& setup, const FieldGrid& shifted,
                                   double offset, const ExtractionSettings& settings) {
  if (shifted.dim() != 2) {
    throw Error(ErrorCode::unsupported_dimension, "invariance check is implemented for 2-dimensional fields only");
  }
  InvarianceReport r;
  if (ridges.empty()) {
    r.degenerate_empty = true;
    return r;
  }
  const ChartDomain& chart = setup.manifold.chart;
  const double t0 = shifted.t0 - offset;
  std::vector<Vec> advected;
  for (const auto& line : ridges.polylines) {
    for (const auto& p : line.points) {
      Vec x(2);
      x << p.x, p.y;
      try {
        advected.push_back(advect(x, t0, offset, setup.field, chart, setup.integrator));
      } catch (const DomainExitError&) {
        ++r.exited_points;
      }
    }
  }
  r.advected_points = advected.size();

  r.new_ridges = ridges.mode == ExtractionMode::level_set ? extract_level_set(shifted, settings.quantile)
                                                          : extract_ridges(shifted, settings);
  r.new_ridge_points = r.new_ridges.point_count();
  r.cell_size = std::min(shifted.spacing(0), shifted.spacing(1));
  if (r.new_ridges.empty() || advected.empty()) {
    r.degenerate_empty = true;
    return r;
  }
  std::vector<double> dist;
  dist.reserve(advected.size());
  for (const Vec& x : advected) dist.push_back(distance_to_ridges(x[0], x[1], r.new_ridges, shifted.window));
  std::sort(dist.begin(), dist.end());
  r.mean_distance = mean_of(dist);
  r.median_distance = sorted_quantile(dist, 0.5);
  r.max_distance = dist.back();
  r.mean_cells = r.mean_distance / r.cell_size;
  r.max_cells = r.max_distance / r.cell_size;
  return r;
}

InvarianceReport verify_invariance(const RidgeSet& ridges, const AnalysisSetup& setup, const ChartDomain& window,
                                   const std::vector<int>& resolution, double t0, double duration, double offset,
                                   const ExtractionSettings& settings, int threads) {
  if (window.dim != 2) {
    throw Error(ErrorCode::unsupported_dimension, "invariance check is implemented for 2-dimensional fields only");
  }
  if (ridges.empty()) {
    InvarianceReport r;
    r.degenerate_empty = true;
    return r;
  }
  const FieldGrid shifted = compute_field(setup, window, resolution, t0 + offset, duration, threads);
  return verify_invariance(ridges, setup, shifted, offset, settings);
}

}  // namespace flcs
