#include "flcs/pipeline.hpp"

#include "flcs/io.hpp"
#include "flcs/oracle.hpp"

#include <Eigen/LU>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace flcs {

namespace fs = std::filesystem;
using nlohmann::json;

FieldGrid run_field(const AnalysisConfig& config, int threads) {
  const AnalysisSetup setup = build_setup(config);
  const ChartDomain window = config_window(config, setup.manifold.chart);
  FieldGrid field = compute_field(setup, window, config.resolution, config.t0, config.duration, threads);
  field.config_hash = config_hash(config);
  return field;
}

namespace {

ExtractionOutcome finish_extraction(RidgeSet ridges, const AnalysisConfig& config, const AnalysisSetup& setup,
                                    const FieldGrid& shifted) {
  ExtractionOutcome out;
  out.ridges = std::move(ridges);
  if (!out.ridges.empty()) {
    out.alignment = verify_alignment(out.ridges, config.alignment_min_rel_gap, config.alignment_max_median_deg);
  }
  out.invariance = verify_invariance(out.ridges, setup, shifted, config.offset, config.extraction);
  return out;
}

}  // namespace

LcsOutcome run_lcs(const AnalysisConfig& config, int threads) {
  const AnalysisSetup setup = build_setup(config);
  if (setup.manifold.chart.dim != 2) {
    throw Error(ErrorCode::unsupported_dimension, "lcs extraction needs a 2-dimensional manifold");
  }
  const ChartDomain window = config_window(config, setup.manifold.chart);
  LcsOutcome out;
  out.field = compute_field(setup, window, config.resolution, config.t0, config.duration, threads);
  out.field.config_hash = config_hash(config);
  const FieldGrid shifted =
      compute_field(setup, window, config.resolution, config.t0 + config.offset, config.duration, threads);
  out.level_set =
      finish_extraction(extract_level_set(out.field, config.extraction.quantile), config, setup, shifted);
  out.ridge = finish_extraction(extract_ridges(out.field, config.extraction), config, setup, shifted);
  return out;
}

namespace {

json alignment_json(const std::optional<AlignmentReport>& a) {
  if (!a) return nullptr;
  return {{"total_points", a->total_points}, {"used_points", a->used_points},   {"mean_rad", a->mean},
          {"median_rad", a->median},         {"p95_rad", a->p95},               {"max_median_rad", a->max_median},
          {"passed", a->passed}};
}

json invariance_json(const InvarianceReport& r) {
  return {{"degenerate_empty", r.degenerate_empty}, {"advected_points", r.advected_points},
          {"exited_points", r.exited_points},       {"new_ridge_points", r.new_ridge_points},
          {"cell_size", r.cell_size},               {"mean_distance", r.mean_distance},
          {"median_distance", r.median_distance},   {"max_distance", r.max_distance},
          {"mean_cells", r.mean_cells},             {"max_cells", r.max_cells}};
}

json extraction_json(const ExtractionOutcome& e) {
  json j = {{"points", e.ridges.point_count()},
            {"polylines", e.ridges.polylines.size()},
            {"alignment", alignment_json(e.alignment)},
            {"invariance", invariance_json(e.invariance)}};
  if (e.ridges.mode == ExtractionMode::level_set) j["level"] = e.ridges.level;
  return j;
}

}  // namespace

std::string report_json(const LcsOutcome& outcome) {
  const FieldGrid& f = outcome.field;
  json j;
  j["config_hash"] = f.config_hash;
  j["nodes"] = f.size();
  j["invalid_count"] = f.invalid_count;
  j["coverage_warning"] = f.coverage_warning;
  j["level_set"] = extraction_json(outcome.level_set);
  j["ridge"] = extraction_json(outcome.ridge);
  return j.dump(2) + "\n";
}

void write_lcs(const LcsOutcome& outcome, const AnalysisConfig& config, const fs::path& dir) {
  write_field(outcome.field, dir);
  write_ridges(outcome.level_set.ridges, dir, "level_set");
  write_ridges(outcome.ridge.ridges, dir, "ridges");
  write_text(dir, "report.json", report_json(outcome));
  write_text(dir, "config.ini", serialize_config(config));
}

namespace {

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string flowmap_json(const AnalysisConfig& config, const Vec& x) {
  const AnalysisSetup setup = build_setup(config);
  if (x.size() != setup.manifold.chart.dim) {
    throw Error(ErrorCode::invalid_argument, "--at needs " + std::to_string(setup.manifold.chart.dim) + " coordinates");
  }
  const NodeAnalysis node = analyze_point(setup, x, config.t0, config.duration);
  json j;
  j["x"] = vector_json(x);
  j["t0"] = config.t0;
  j["T"] = config.duration;
  j["endpoint"] = vector_json(node.flow.endpoint);
  j["jacobian"] = matrix_json(node.flow.jacobian);
  j["steps_taken"] = node.flow.steps_taken;
  j["method"] = node.flow.method_tag;
  j["regime"] = std::string(to_string(setup.regime));
  j["cauchy_green"] = matrix_json(node.tensor.C);
  j["base_metric"] = matrix_json(node.tensor.G0);
  j["eigenvalues"] = vector_json(node.eigen.values);
  j["eigenvectors"] = matrix_json(node.eigen.vectors);
  j["degenerate"] = node.eigen.degenerate;
  j["ftle"] = ftle(node.eigen.values[0], config.duration);
  return j.dump(2) + "\n";
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

class Validator {
 public:
  Validator(const AnalysisConfig& config) : config_(config), setup_(build_setup(config)), rng_(20240611) {
    const int dim = setup_.manifold.chart.dim;
    // Samples stay a little inside the window so finite-difference stencils fit.
    for (int k = 0; k < 16; ++k) {
      Vec x(dim);
      for (int a = 0; a < dim; ++a) {
        const double lo = config.lo[a], hi = config.hi[a];
        x[a] = lo + (hi - lo) * std::uniform_real_distribution<double>(0.05, 0.95)(rng_);
      }
      samples_.push_back(x);
    }
  }

  std::vector<CheckResult> run(int threads) {
    check_metric();
    if (setup_.regime == Regime::finsler) check_finsler();
    if (setup_.manifold.structure) check_structure();
    check_flow();
    check_deformation();
    if (setup_.manifold.chart.dim == 2) check_lcs(threads);
    return std::move(results_);
  }

 private:
  void add(std::string name, bool passed, std::string detail) {
    results_.push_back({std::move(name), passed, std::move(detail), false});
  }
  void info(std::string name, bool passed, std::string detail) {
    results_.push_back({std::move(name), passed, std::move(detail), true});
  }

  Mat metric(const Vec& x) const { return metric_at(setup_.manifold.metric, setup_.manifold.chart, x); }

  Vec random_vector(int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec v(dim);
    for (int a = 0; a < dim; ++a) v[a] = n(rng_);
    return v;
  }

  void check_metric() {
    bool ok = true;
    for (const Vec& x : samples_) ok = ok && is_symmetric_positive_definite(metric(x));
    add("geometry.metric_spd", ok, std::to_string(samples_.size()) + " sample points");
  }

  void check_finsler() {
    const FinslerNorm& norm = *setup_.finsler;
    const int dim = setup_.manifold.chart.dim;
    double homog = 0.0, fd = 0.0;
    bool spd = true;
    for (int k = 0; k < 100; ++k) {
      const Vec& x = samples_[k % samples_.size()];
      const Vec y = random_vector(dim);
      const Mat g = fundamental_tensor(norm, x, y);
      spd = spd && is_symmetric_positive_definite(g, 1e-10);
      for (double s : {0.5, 2.0, 10.0}) {
        homog = std::max(homog, (fundamental_tensor(norm, x, s * y) - g).norm() / g.norm());
      }
      fd = std::max(fd, (fundamental_tensor_fd(norm, x, y) - g).norm() / g.norm());
    }
    add("geometry.finsler_homogeneity", homog <= 1e-8, "max relative deviation " + fmt(homog));
    add("geometry.fundamental_tensor_fd", fd <= 1e-6, "analytic vs differenced, max relative " + fmt(fd));
    add("geometry.fundamental_tensor_spd", spd, "100 random directions");
  }

  void check_structure() {
    const HypercomplexStructure& h = *setup_.manifold.structure;
    const HypercomplexReport rep = hypercomplex_check(h);
    add("geometry.quaternion_relations", rep.passed, "max deviation " + fmt(rep.max_deviation));
    double orth = 0.0;
    for (const Vec& x : samples_) orth = std::max(orth, orthogonality_defect(h, metric(x)));
    add("geometry.structure_orthogonal", orth <= 1e-12, "max defect " + fmt(orth));

    double term = 0.0;
    for (int k = 0; k < 100; ++k) {
      Mat F(4, 4);
      for (int c = 0; c < 4; ++c) F.col(c) = random_vector(4);
      const Mat g = metric(samples_[k % samples_.size()]);
      const Mat fast = hypercomplex_sum(F, g, h);
      term = std::max(term, (fast - oracle::hypercomplex_termwise(F, g, h)).cwiseAbs().maxCoeff() /
                                fast.cwiseAbs().maxCoeff());
    }
    add("deformation.hypercomplex_termwise", term <= 1e-12, "max relative deviation " + fmt(term));

    double ident = 0.0;
    for (const Vec& x : samples_) {
      const Mat g = metric(x);
      const EigenDecomposition e = generalized_eigendecomp(cauchy_green_hypercomplex(Mat::Identity(4, 4), g, h));
      ident = std::max(ident, (e.values.array() - 3.0).abs().maxCoeff());
    }
    add("deformation.hypercomplex_identity", ident <= 1e-9, "max |lambda - 3| " + fmt(ident));
  }

  void check_flow() {
    const ChartDomain& chart = setup_.manifold.chart;
    const double delta = default_fd_offset(chart);
    double jac = 0.0, ref = 0.0, vol = 0.0;
    std::size_t used = 0, exited = 0;
    const bool constant_metric = metric_is_constant();
    double iso = 0.0;
    for (const Vec& x : samples_) {
      try {
        const FlowMapResult r =
            flow_jacobian_variational(x, config_.t0, config_.duration, setup_.field, chart, setup_.integrator);
        const Mat fd = flow_jacobian_fd(x, config_.t0, config_.duration, setup_.field, chart, setup_.integrator, delta);
        jac = std::max(jac, (r.jacobian - fd).norm() / r.jacobian.norm());
        const Vec mine = advect_unwrapped(x, config_.t0, config_.duration, setup_.field, chart, setup_.integrator);
        const Vec theirs = oracle::reference_advect(x, config_.t0, config_.duration, setup_.field, setup_.integrator.step);
        ref = std::max(ref, (mine - theirs).cwiseAbs().maxCoeff());
        vol = std::max(vol, std::abs(r.jacobian.determinant() - 1.0));
        if (setup_.field.isometric && constant_metric) {
          const Mat g = metric(x);
          const EigenDecomposition e = generalized_eigendecomp(cauchy_green_riemannian(r.jacobian, g, g));
          iso = std::max({iso, std::abs(e.values[0] - 1.0), std::abs(ftle(e.values[0], config_.duration))});
        }
        ++used;
      } catch (const DomainExitError&) {
        ++exited;
      }
    }
    const std::string where = std::to_string(used) + " points, " + std::to_string(exited) + " exited";
    add("flow.jacobian_fd_agreement", used > 0 && jac <= 1e-4, "max relative Frobenius " + fmt(jac) + ", " + where);
    add("flow.reference_integrator", used > 0 && ref <= 1e-6, "max endpoint deviation " + fmt(ref));
    if (setup_.field.divergence_free) add("flow.volume_preservation", vol <= 1e-6, "max |det F - 1| " + fmt(vol));
    if (setup_.field.isometric && constant_metric) {
      add("flow.isometry", iso <= 1e-8, "max |lambda1 - 1|, |ftle| " + fmt(iso));
    }
  }

  bool metric_is_constant() const {
    const Mat g0 = metric(samples_.front());
    for (const Vec& x : samples_) {
      if ((metric(x) - g0).cwiseAbs().maxCoeff() > 1e-14) return false;
    }
    return true;
  }

  void check_deformation() {
    const int dim = setup_.manifold.chart.dim;
    double residual = 0.0, orth = 0.0, charpoly = 0.0, rayleigh = 0.0;
    std::size_t used = 0;
    for (const Vec& x : samples_) {
      NodeAnalysis node;
      try {
        node = analyze_point(setup_, x, config_.t0, config_.duration);
      } catch (const DomainExitError&) {
        continue;
      }
      ++used;
      const Mat& C = node.tensor.C;
      const Mat& G0 = node.tensor.G0;
      const EigenDecomposition& e = node.eigen;
      for (int k = 0; k < dim; ++k) {
        const Vec xi = e.vectors.col(k);
        residual = std::max(residual, (C * xi - e.values[k] * G0 * xi).norm() / C.norm());
      }
      orth = std::max(orth, (e.vectors.transpose() * G0 * e.vectors - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff());
      if (dim <= 3) {
        const std::vector<double> roots = oracle::charpoly_eigs(C, G0);
        for (int k = 0; k < dim; ++k) {
          charpoly = std::max(charpoly, std::abs(roots[k] - e.values[k]) / e.values[0]);
        }
      }
      if (setup_.regime != Regime::hypercomplex) {
        const Mat g_end = end_metric(node);
        const double lo = e.values[dim - 1], hi = e.values[0];
        for (int s = 0; s < 200; ++s) {
          const double ratio = oracle::stretch_ratio_sample(node.flow.jacobian, G0, g_end, random_vector(dim));
          const double slack = 1e-10 * std::max(1.0, hi);
          rayleigh = std::max({rayleigh, lo - slack - ratio, ratio - hi - slack});
        }
      }
    }
    add("deformation.eigen_residual", used > 0 && residual <= 1e-9, "max relative residual " + fmt(residual));
    add("deformation.base_orthonormality", used > 0 && orth <= 1e-9, "max deviation " + fmt(orth));
    if (dim <= 3) {
      add("deformation.charpoly_agreement", used > 0 && charpoly <= 1e-8, "max relative deviation " + fmt(charpoly));
    }
    if (setup_.regime != Regime::hypercomplex) {
      add("deformation.rayleigh_bound", used > 0 && rayleigh <= 0.0, "worst excursion " + fmt(std::max(0.0, rayleigh)));
    }
  }

  // End-point tensor consistent with how analyze_point assembled C = F^T G_end F.
  Mat end_metric(const NodeAnalysis& node) const {
    const Mat& F = node.flow.jacobian;
    const Mat finv = F.inverse();
    const Mat g = finv.transpose() * node.tensor.C * finv;
    return 0.5 * (g + g.transpose());
  }

  void check_lcs(int threads) {
    const ChartDomain window = config_window(config_, setup_.manifold.chart);
    FieldGrid field;
    try {
      field = compute_field(setup_, window, config_.resolution, config_.t0, config_.duration, threads);
      field.validate();
      add("lcs.field_consistency", true,
          std::to_string(field.size()) + " nodes, " + std::to_string(field.invalid_count) + " invalid");
    } catch (const Error& e) {
      add("lcs.field_consistency", false, e.what());
      return;
    }
    const RidgeSet level = extract_level_set(field, config_.extraction.quantile);
    bool inside = true;
    for (const auto& line : level.polylines) {
      for (const auto& p : line.points) {
        inside = inside && p.x >= window.bounds[0].lo && p.x <= window.bounds[0].hi && p.y >= window.bounds[1].lo &&
                 p.y <= window.bounds[1].hi;
      }
    }
    add("lcs.level_set_in_window", inside, std::to_string(level.point_count()) + " points");
    if (level.empty()) {
      info("lcs.level_set_alignment", true, "skipped: level set is empty");
      return;
    }
    const AlignmentReport a = verify_alignment(level, config_.alignment_min_rel_gap, config_.alignment_max_median_deg);
    if (a.used_points == 0) {
      info("lcs.level_set_alignment", true, "skipped: no points with a resolved gap");
      return;
    }
    info("lcs.level_set_alignment", a.passed,
        "median " + fmt(a.median * 180.0 / std::numbers::pi) + " deg over " + std::to_string(a.used_points) + " points");
  }

  const AnalysisConfig& config_;
  AnalysisSetup setup_;
  std::mt19937_64 rng_;
  std::vector<Vec> samples_;
  std::vector<CheckResult> results_;
};

}  // namespace

std::vector<CheckResult> run_validation(const AnalysisConfig& config, int threads) {
  return Validator(config).run(threads);
}

}  // namespace flcs
