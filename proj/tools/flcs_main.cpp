// flcs: FTLE fields, LCS extraction and invariant checks from a config file.
//
// Exit status: 0 success, 1 validation or runtime failure, 2 config or usage error.

#include "flcs/config.hpp"
#include "flcs/io.hpp"
#include "flcs/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

flcs::AnalysisConfig load(const std::string& path) {
  return flcs::parse_config(flcs::read_text(path));
}

std::filesystem::path out_dir(const flcs::AnalysisConfig& config, const std::string& override_dir) {
  return override_dir.empty() ? flcs::resolve_output_dir(config) : override_dir;
}

flcs::Vec parse_point(const std::string& text) {
  std::vector<double> coords;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size()) {
      throw flcs::Error(flcs::ErrorCode::invalid_argument, "--at: bad coordinate '" + part + "'");
    }
    coords.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  flcs::Vec x(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) x[static_cast<Eigen::Index>(i)] = coords[i];
  return x;
}

bool is_config_error(flcs::ErrorCode code) {
  using flcs::ErrorCode;
  return code == ErrorCode::parse || code == ErrorCode::invalid_argument || code == ErrorCode::unsupported_dimension;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-time Lyapunov exponents and Lagrangian coherent structures on manifolds"};
  app.require_subcommand(1);
  int threads = 1;
  std::string out_override;
  app.add_option("--threads", threads, "worker threads for the grid sweep (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("-o,--out", out_override, "output directory (overrides [output] dir and $FLCS_OUTPUT_DIR)");

  std::string config_path;
  std::string at;
  auto* ftle_cmd = app.add_subcommand("ftle", "compute the FTLE field and write it");
  ftle_cmd->add_option("config", config_path, "analysis config")->required()->check(CLI::ExistingFile);
  auto* lcs_cmd = app.add_subcommand("lcs", "field, level-set and ridge extraction, alignment and invariance reports");
  lcs_cmd->add_option("config", config_path, "analysis config")->required()->check(CLI::ExistingFile);
  auto* flow_cmd = app.add_subcommand("flowmap", "flow map, Jacobian and spectrum at one point");
  flow_cmd->add_option("config", config_path, "analysis config")->required()->check(CLI::ExistingFile);
  flow_cmd->add_option("--at", at, "chart point, comma-separated")->required();
  auto* val_cmd = app.add_subcommand("validate", "run the invariant checks for the configured scenario");
  val_cmd->add_option("config", config_path, "analysis config")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  flcs::AnalysisConfig config;
  try {
    config = load(config_path);
  } catch (const flcs::Error& e) {
    std::cerr << "flcs: " << config_path << ": " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*ftle_cmd) {
      const flcs::FieldGrid field = flcs::run_field(config, threads);
      const auto dir = out_dir(config, out_override);
      flcs::write_field(field, dir);
      flcs::write_text(dir, "config.ini", flcs::serialize_config(config));
      std::cout << "wrote " << field.size() << " nodes (" << field.invalid_count << " invalid) to " << dir.string()
                << "\n";
      if (field.coverage_warning) std::cerr << "flcs: warning: more than 10% of trajectories left the chart\n";
    } else if (*lcs_cmd) {
      const flcs::LcsOutcome outcome = flcs::run_lcs(config, threads);
      const auto dir = out_dir(config, out_override);
      flcs::write_lcs(outcome, config, dir);
      std::cout << "level set: " << outcome.level_set.ridges.point_count() << " points, ridges: "
                << outcome.ridge.ridges.point_count() << " points; wrote " << dir.string() << "\n";
      if (outcome.field.coverage_warning) std::cerr << "flcs: warning: more than 10% of trajectories left the chart\n";
    } else if (*flow_cmd) {
      std::cout << flcs::flowmap_json(config, parse_point(at));
    } else if (*val_cmd) {
      const auto results = flcs::run_validation(config, threads);
      bool all = true;
      for (const auto& r : results) {
        const char* tag = r.informational ? "INFO " : (r.passed ? "PASS " : "FAIL ");
        std::cout << tag << r.name << "  " << r.detail << (r.informational && !r.passed ? " (not aligned)" : "") << "\n";
        all = all && (r.passed || r.informational);
      }
      std::cout << (all ? "all checks passed" : "some checks failed") << "\n";
      return all ? 0 : kExitFailure;
    }
  } catch (const flcs::Error& e) {
    std::cerr << "flcs: " << flcs::to_string(e.code()) << ": " << e.what() << "\n";
    return is_config_error(e.code()) ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "flcs: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
