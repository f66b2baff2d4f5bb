#include "flcs/lcs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace flcs {

std::string_view to_string(MetricEval mode) { return mode == MetricEval::two_point ? "two_point" : "base_only"; }

MetricEval metric_eval_from_string(std::string_view name) {
  if (name == "two_point") return MetricEval::two_point;
  if (name == "base_only") return MetricEval::base_only;
  throw Error(ErrorCode::invalid_argument, "unknown metric_eval '" + std::string(name) + "'");
}

namespace {

Vec finsler_direction(const AnalysisSetup& setup, const Vec& x, double t, bool& used_fallback) {
  Vec y = setup.field.eval(x, t);
  if (y.norm() < kZeroFlowSpeed && setup.finsler_fallback.size() == y.size()) {
    used_fallback = true;
    return setup.finsler_fallback;
  }
  return y;
}

}  // namespace

NodeAnalysis analyze_point(const AnalysisSetup& setup, const Vec& x, double t0, double duration) {
  const ChartDomain& chart = setup.manifold.chart;
  NodeAnalysis out;
  out.flow = flow_jacobian_variational(x, t0, duration, setup.field, chart, setup.integrator);
  const Mat& F = out.flow.jacobian;
  const Vec& end = out.flow.endpoint;
  const bool two_point = setup.metric_eval == MetricEval::two_point;

  switch (setup.regime) {
    case Regime::riemannian: {
      const Mat g_start = metric_at(setup.manifold.metric, chart, x);
      const Mat g_end = two_point ? metric_at(setup.manifold.metric, chart, end) : g_start;
      out.tensor = cauchy_green_riemannian(F, g_start, g_end);
      break;
    }
    case Regime::finsler: {
      if (!setup.finsler) throw Error(ErrorCode::invalid_argument, "finsler regime without a Finsler norm");
      bool fb_start = false, fb_end = false;
      const Vec y_start = finsler_direction(setup, x, t0, fb_start);
      const Mat g_start = fundamental_tensor(*setup.finsler, chart.wrap(x), y_start);
      Mat g_end = g_start;
      if (two_point) {
        const Vec y_end = finsler_direction(setup, end, t0 + duration, fb_end);
        g_end = fundamental_tensor(*setup.finsler, end, y_end);
      }
      out.finsler_fallback = fb_start || fb_end;
      out.tensor = cauchy_green_finsler(F, g_start, g_end);
      break;
    }
    case Regime::hypercomplex: {
      if (!setup.manifold.structure) {
        throw Error(ErrorCode::invalid_argument, "manifold '" + setup.manifold.id + "' has no hypercomplex structure");
      }
      const HypercomplexStructure& h = *setup.manifold.structure;
      const Mat g_start = metric_at(setup.manifold.metric, chart, x);
      const Mat g_end = two_point ? metric_at(setup.manifold.metric, chart, end) : g_start;
      out.tensor = cauchy_green_hypercomplex(F, g_end, h, g_start);
      out.commutation_defect = commutation_defect(field_jacobian(setup.field, chart, x, t0), h);
      break;
    }
  }
  out.eigen = generalized_eigendecomp(out.tensor);
  return out;
}

std::size_t FieldGrid::index(const std::vector<int>& multi) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim(); ++a) flat = flat * static_cast<std::size_t>(resolution[a]) + multi[a];
  return flat;
}

std::vector<int> FieldGrid::multi_index(std::size_t flat) const {
  std::vector<int> multi(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    multi[a] = static_cast<int>(flat % resolution[a]);
    flat /= resolution[a];
  }
  return multi;
}

Vec FieldGrid::node(std::size_t flat) const {
  const std::vector<int> multi = multi_index(flat);
  Vec x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = grid_coordinate(window, a, resolution[a], multi[a]);
  return x;
}

double FieldGrid::spacing(int axis) const {
  const int n = resolution[axis];
  return window.periodic[axis] ? window.extent(axis) / n : window.extent(axis) / (n - 1);
}

void FieldGrid::validate() const {
  window.validate();
  if (static_cast<int>(resolution.size()) != dim()) {
    throw Error(ErrorCode::invalid_argument, "resolution does not match window dimension");
  }
  std::size_t total = 1;
  for (int n : resolution) {
    if (n < 2) throw Error(ErrorCode::invalid_argument, "resolution must be >= 2 per axis");
    total *= static_cast<std::size_t>(n);
  }
  if (lambda1.size() != total || ftle.size() != total || gap.size() != total || valid.size() != total ||
      static_cast<int>(xi1.size()) != dim()) {
    throw Error(ErrorCode::invalid_argument, "field arrays do not match the resolution");
  }
  for (const auto& comp : xi1) {
    if (comp.size() != total) throw Error(ErrorCode::invalid_argument, "xi1 array does not match the resolution");
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (!valid[i]) continue;
    if (!(lambda1[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda1 must be positive at valid nodes");
    const double expected = std::log(lambda1[i]) / (2.0 * std::abs(duration));
    if (std::abs(ftle[i] - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
      throw Error(ErrorCode::invalid_argument, "ftle inconsistent with lambda1");
    }
  }
}

double grid_coordinate(const ChartDomain& window, int axis, int n, int i) {
  const double lo = window.bounds[axis].lo;
  const double ext = window.extent(axis);
  if (window.periodic[axis]) return lo + ext * static_cast<double>(i) / static_cast<double>(n);
  if (i == n - 1) return window.bounds[axis].hi;
  return lo + ext * static_cast<double>(i) / static_cast<double>(n - 1);
}

ChartDomain make_window(const ChartDomain& chart, std::vector<Interval> bounds) {
  if (static_cast<int>(bounds.size()) != chart.dim) {
    throw Error(ErrorCode::invalid_argument, "window dimension does not match chart");
  }
  std::vector<bool> periodic(chart.dim, false);
  for (int a = 0; a < chart.dim; ++a) {
    const double ext = bounds[a].hi - bounds[a].lo;
    periodic[a] = chart.periodic[a] && std::abs(ext - chart.extent(a)) <= 1e-12 * chart.extent(a);
  }
  return make_chart(std::move(bounds), std::move(periodic));
}

namespace {

void check_window(const ChartDomain& chart, const ChartDomain& window, const std::vector<int>& resolution) {
  window.validate();
  if (window.dim != chart.dim) throw Error(ErrorCode::invalid_argument, "window dimension does not match chart");
  if (static_cast<int>(resolution.size()) != window.dim) {
    throw Error(ErrorCode::invalid_argument, "resolution does not match window dimension");
  }
  for (int a = 0; a < window.dim; ++a) {
    if (resolution[a] < 8) throw Error(ErrorCode::invalid_argument, "resolution must be >= 8 per axis");
    if (chart.periodic[a]) continue;
    const double slack = 1e-12 * chart.extent(a);
    if (window.bounds[a].lo < chart.bounds[a].lo - slack || window.bounds[a].hi > chart.bounds[a].hi + slack) {
      throw Error(ErrorCode::domain, "grid window extends outside the chart on axis " + std::to_string(a));
    }
  }
}

}  // namespace

FieldGrid compute_field(const AnalysisSetup& setup, const ChartDomain& window, const std::vector<int>& resolution,
                        double t0, double duration, int threads) {
  check_window(setup.manifold.chart, window, resolution);
  if (duration == 0.0) throw Error(ErrorCode::division, "FTLE undefined for a zero-length window");
  if (setup.field.dim != window.dim) throw Error(ErrorCode::invalid_argument, "flow dimension does not match chart");

  FieldGrid grid;
  grid.window = window;
  grid.resolution = resolution;
  grid.t0 = t0;
  grid.duration = duration;
  grid.regime = setup.regime;
  std::size_t total = 1;
  for (int n : resolution) total *= static_cast<std::size_t>(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  grid.lambda1.assign(total, nan);
  grid.ftle.assign(total, nan);
  grid.gap.assign(total, nan);
  grid.xi1.assign(window.dim, std::vector<double>(total, nan));
  grid.valid.assign(total, 0);

  std::vector<std::uint8_t> fallback(total, 0);
  std::vector<double> commutation(total, 0.0);
  std::vector<double> asymmetry(total, 0.0);

  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), total));

  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_node = total;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= total) return;
      const std::size_t end = std::min(total, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          const NodeAnalysis node = analyze_point(setup, grid.node(i), t0, duration);
          grid.lambda1[i] = node.eigen.values[0];
          grid.ftle[i] = ftle(node.eigen.values[0], duration);
          grid.gap[i] = node.eigen.gap;
          for (int c = 0; c < window.dim; ++c) grid.xi1[c][i] = node.eigen.vectors(c, 0);
          grid.valid[i] = 1;
          fallback[i] = node.finsler_fallback ? 1 : 0;
          commutation[i] = node.commutation_defect;
          asymmetry[i] = node.tensor.asymmetry;
        } catch (const DomainExitError&) {
          grid.valid[i] = 0;
        } catch (...) {
          // Keep the lowest failing node so the reported error does not depend on scheduling.
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (i < error_node) {
            error_node = i;
            error = std::current_exception();
          }
        }
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t i = 0; i < total; ++i) {
    if (!grid.valid[i]) ++grid.invalid_count;
    grid.finsler_fallbacks += fallback[i];
    grid.max_commutation_defect = std::max(grid.max_commutation_defect, commutation[i]);
    grid.max_asymmetry = std::max(grid.max_asymmetry, asymmetry[i]);
  }
  if (static_cast<std::size_t>(grid.invalid_count) == total) {
    throw Error(ErrorCode::empty_field, "every trajectory left the chart; no valid field samples");
  }
  grid.coverage_warning = static_cast<double>(grid.invalid_count) > kCoverageWarningFraction * static_cast<double>(total);
  return grid;
}

}  // namespace flcs
