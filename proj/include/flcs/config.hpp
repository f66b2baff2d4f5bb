#pragma once

#include "flcs/flow.hpp"
#include "flcs/geometry.hpp"
#include "flcs/lcs.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flcs {

/// A fully validated analysis description with every default filled in.
///
/// Text form is sectioned key-value:
///
///     [manifold]    id, plus catalog parameters (amplitude, half_width)
///     [metric]      regime, randers_b, structure, metric_eval, finsler_fallback
///     [flow]        id, plus catalog parameters
///     [time]        t0, T, delta
///     [grid]        lo, hi, resolution
///     [integrator]  method, step, abs_tol, rel_tol, max_steps
///     [extraction]  quantile, min_gap, min_value, min_value_quantile,
///                   alignment_min_rel_gap, alignment_max_median_deg
///     [output]      dir
///
/// Vectors are comma-separated; `#` and `;` start comments.
struct AnalysisConfig {
  std::string manifold;
  Params manifold_params;

  Regime regime = Regime::riemannian;
  std::vector<double> randers_b;
  std::string structure = "standard";
  MetricEval metric_eval = MetricEval::two_point;
  std::vector<double> finsler_fallback;

  std::string flow;
  Params flow_params;

  double t0 = 0.0;
  double duration = 0.0;
  double offset = 0.0;

  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> resolution;

  IntegratorConfig integrator;

  ExtractionSettings extraction;
  double alignment_min_rel_gap = kAlignmentMinRelGap;
  double alignment_max_median_deg = kAlignmentMaxMedianDeg;

  /// Empty means $FLCS_OUTPUT_DIR, then "flcs_out".
  std::string output_dir;

  bool operator==(const AnalysisConfig&) const = default;
};

/// Throws ParseError naming the line and key of the first problem.
AnalysisConfig parse_config(std::string_view text);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const AnalysisConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);
/// Hex FNV-1a of the canonical text.
std::string config_hash(const AnalysisConfig& config);

AnalysisSetup build_setup(const AnalysisConfig& config);
ChartDomain config_window(const AnalysisConfig& config, const ChartDomain& chart);

/// Output directory after applying the environment default.
std::string resolve_output_dir(const AnalysisConfig& config);

inline constexpr const char* kOutputDirEnv = "FLCS_OUTPUT_DIR";

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

}  // namespace flcs
