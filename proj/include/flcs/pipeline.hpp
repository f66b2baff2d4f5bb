#pragma once

#include "flcs/config.hpp"
#include "flcs/lcs.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flcs {

/// Field over the configured window with the config hash stamped in.
FieldGrid run_field(const AnalysisConfig& config, int threads);

struct ExtractionOutcome {
  RidgeSet ridges;
  std::optional<AlignmentReport> alignment;  // absent when the set is empty
  InvarianceReport invariance;
};

struct LcsOutcome {
  FieldGrid field;
  ExtractionOutcome level_set;
  ExtractionOutcome ridge;
};

/// Field, both extractions, and their alignment and invariance reports.
LcsOutcome run_lcs(const AnalysisConfig& config, int threads);

/// Writes field files, level_set.{json,csv}, ridges.{json,csv}, report.json and config.ini.
void write_lcs(const LcsOutcome& outcome, const AnalysisConfig& config, const std::filesystem::path& dir);

std::string report_json(const LcsOutcome& outcome);

/// Single-point flow map, Jacobian and deformation spectrum as JSON.
std::string flowmap_json(const AnalysisConfig& config, const Vec& x);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  /// Reported but not counted: properties that hold only for some flows.
  bool informational = false;
};

/// Invariant suites applicable to the configured manifold, regime and flow.
std::vector<CheckResult> run_validation(const AnalysisConfig& config, int threads);

}  // namespace flcs
