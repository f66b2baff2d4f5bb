// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "flcs/config.hpp"
#include "flcs/io.hpp"
#include "flcs/oracle.hpp"
#include "flcs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace flcs;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kSaddleRelTol = 1e-6;
constexpr double kSaddleSeconds = 5.0;
constexpr double kRotationTol = 1e-8;
constexpr double kJacobianRelTol = 1e-4;
constexpr int kJacobianSeeds = 256;
constexpr double kEigenResidualTol = 1e-9;
constexpr double kCharpolyTol = 1e-8;
constexpr int kEigenPairs = 1000;
constexpr int kRayleighTensors = 100;
constexpr int kRayleighSamples = 1000;
constexpr double kRayleighSlack = 1e-10;
constexpr double kFinslerReductionTol = 1e-12;
constexpr double kHomogeneityTol = 1e-8;
constexpr double kHypercomplexEigTol = 1e-9;
constexpr double kTermwiseTol = 1e-12;
constexpr double kSaddleAlignTol = 1e-6;        // radians
constexpr double kGyreAlignDeg = 10.0;
constexpr double kGyreAlignMinRelGap = 1e-3;
constexpr double kSaddleInvarianceTol = 1e-6;   // chart units
constexpr double kGyreInvarianceCells = 2.0;
constexpr double kConvergenceTol = 1e-3;
constexpr double kConvergenceFraction = 0.95;

const fs::path kData = FLCS_TEST_DATA;
const fs::path kGolden = fs::path(FLCS_GOLDEN) / "double_gyre";

int failures = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", passed ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!passed) ++failures;
}

void guarded(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw: ") + e.what());
  }
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

AnalysisConfig load(const fs::path& p) { return parse_config(read_text(p)); }

Mat random_matrix(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return m;
}

Mat random_spd(std::mt19937_64& rng, int n) {
  const Mat a = random_matrix(rng, n);
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

Vec random_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

void saddle_closed_form() {
  const AnalysisConfig c = load(kData / "saddle.ini");
  const auto start = std::chrono::steady_clock::now();
  const FieldGrid f = run_field(c, 1);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double expected = std::exp(2.0);
  double lam = 0.0, sig = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    lam = std::max(lam, f.valid[i] ? std::abs(f.lambda1[i] / expected - 1.0) : INFINITY);
    sig = std::max(sig, f.valid[i] ? std::abs(f.ftle[i] - 1.0) : INFINITY);
  }
  const bool ok = f.size() == 64 * 64 && lam <= kSaddleRelTol && sig <= kSaddleRelTol && seconds <= kSaddleSeconds;
  report(1, "linear saddle closed form", ok,
         "64x64 nodes, max rel err lambda1 " + sci(lam) + ", max |sigma-1| " + sci(sig) + ", " + sci(seconds) +
             " s single-threaded");
}

void rotation_isometry() {
  const FieldGrid f = run_field(load(kData / "rotation.ini"), 1);
  double lam = 0.0, sig = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    lam = std::max(lam, f.valid[i] ? std::abs(f.lambda1[i] - 1.0) : INFINITY);
    sig = std::max(sig, f.valid[i] ? std::abs(f.ftle[i]) : INFINITY);
  }
  report(2, "rigid rotation isometry", lam <= kRotationTol && sig <= kRotationTol,
         "T = pi, max |lambda1-1| " + sci(lam) + ", max |sigma| " + sci(sig));
}

void jacobian_cross_validation() {
  struct Case {
    const char* manifold;
    const char* field;
    Params params;
    double duration;
    double box;  // half-width of the seed box on plane2, ignored elsewhere
  };
  const Case cases[] = {
      {"plane2", "saddle", {}, 1.0, 3.0},
      {"plane2", "saddle", {{"kappa", 0.5}}, 2.0, 3.0},
      {"plane2", "rotation", {}, 2.0, 3.0},
      {"rect_dg", "double_gyre", {}, 5.0, 0.0},
      {"flat_torus2", "torus_shear", {}, 3.0, 0.0},
      {"quat_torus4", "quat_torus_flow", {{"epsilon", 0.3}}, 2.0, 0.0},
      {"flat_torus2", "zero", {}, 1.0, 0.0},
  };
  std::mt19937_64 rng(2718);
  std::ostringstream detail;
  bool ok = true;
  for (const Case& c : cases) {
    const Manifold m = make_manifold(c.manifold);
    const VectorFieldSpec f = make_field(c.field, c.params);
    const IntegratorConfig cfg;
    const double delta = default_fd_offset(m.chart);
    double worst = 0.0;
    for (int k = 0; k < kJacobianSeeds; ++k) {
      Vec x(m.chart.dim);
      for (int a = 0; a < m.chart.dim; ++a) {
        double lo = m.chart.bounds[a].lo, hi = m.chart.bounds[a].hi;
        if (c.box > 0.0) lo = -c.box, hi = c.box;
        x[a] = std::uniform_real_distribution<double>(lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo))(rng);
      }
      const Mat var = flow_jacobian_variational(x, 0.0, c.duration, f, m.chart, cfg).jacobian;
      const Mat fd = flow_jacobian_fd(x, 0.0, c.duration, f, m.chart, cfg, delta);
      worst = std::max(worst, (var - fd).norm() / var.norm());
    }
    ok = ok && worst <= kJacobianRelTol;
    detail << c.field << (c.params.empty() ? "" : "*") << " " << sci(worst) << "; ";
  }
  report(3, "variational vs finite-difference Jacobians", ok,
         std::to_string(kJacobianSeeds) + " seeds per field, max rel Frobenius: " + detail.str());
}

void eigensolver() {
  std::mt19937_64 rng(1618);
  double orth = 0.0, resid = 0.0, charpoly = 0.0;
  for (int k = 0; k < kEigenPairs; ++k) {
    const int n = 2 + k % 3;
    CauchyGreenTensor t;
    t.C = random_spd(rng, n);
    t.G0 = random_spd(rng, n);
    const EigenDecomposition e = generalized_eigendecomp(t);
    orth = std::max(orth, (e.vectors.transpose() * t.G0 * e.vectors - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
    for (int c = 0; c < n; ++c) {
      const Vec xi = e.vectors.col(c);
      resid = std::max(resid, (t.C * xi - e.values[c] * t.G0 * xi).norm() / t.C.norm());
    }
    if (n <= 3) {
      const std::vector<double> r = oracle::charpoly_eigs(t.C, t.G0);
      for (int c = 0; c < n; ++c) charpoly = std::max(charpoly, std::abs(r[c] - e.values[c]) / e.values[0]);
    }
  }
  report(4, "generalized eigensolver", orth <= kEigenResidualTol && resid <= kEigenResidualTol && charpoly <= kCharpolyTol,
         std::to_string(kEigenPairs) + " SPD pairs dims 2-4: orthonormality " + sci(orth) + ", residual/|C| " +
             sci(resid) + ", charpoly rel (dims 2-3) " + sci(charpoly));
}

void rayleigh_bound() {
  std::mt19937_64 rng(5772);
  double worst = -INFINITY;
  for (int k = 0; k < kRayleighTensors; ++k) {
    const int n = 2 + k % 3;
    const Mat F = random_matrix(rng, n), gs = random_spd(rng, n), ge = random_spd(rng, n);
    const EigenDecomposition e = generalized_eigendecomp(cauchy_green_riemannian(F, gs, ge));
    const double hi = e.values[0], lo = e.values[n - 1];
    for (int s = 0; s < kRayleighSamples; ++s) {
      const double r = oracle::stretch_ratio_sample(F, gs, ge, random_vec(rng, n));
      worst = std::max({worst, lo - r, r - hi});
    }
  }
  report(5, "Rayleigh bound on stretch ratios", worst <= kRayleighSlack,
         std::to_string(kRayleighTensors) + " tensors x " + std::to_string(kRayleighSamples) +
             " samples, largest excursion outside [lambda_min, lambda_max] " + sci(std::max(worst, 0.0)));
}

void finsler_reduction() {
  AnalysisConfig riem = load(kData / "bump_shear.ini");
  AnalysisConfig fins = riem;
  fins.regime = Regime::finsler;
  fins.randers_b = {0.0, 0.0};
  const FieldGrid a = run_field(riem, 1);
  const FieldGrid b = run_field(fins, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.lambda1[i] - b.lambda1[i]));
  report(6, "Randers b = 0 reduces to Riemannian", worst <= kFinslerReductionTol && a.invalid_count == 0,
         "bump torus shear 32x32, max |delta lambda1| " + sci(worst));
}

void finsler_homogeneity() {
  const Manifold m = make_manifold("bump_torus2");
  Vec b(2);
  b << 0.3, -0.2;
  const FinslerNorm norm = randers_norm(m.metric, b);
  std::mt19937_64 rng(1414);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec x(2);
    x << u(rng), u(rng);
    const Vec y = random_vec(rng, 2);
    const Mat g = fundamental_tensor(norm, x, y);
    for (double s : {0.5, 2.0, 10.0}) worst = std::max(worst, (fundamental_tensor(norm, x, s * y) - g).norm() / g.norm());
  }
  report(7, "Finsler fundamental tensor 0-homogeneity", worst <= kHomogeneityTol,
         "100 random (x, y), scales {0.5, 2, 10}, max rel deviation " + sci(worst));
}

void hypercomplex_baseline() {
  const AnalysisConfig c = load(kData / "quat_identity.ini");
  const AnalysisSetup setup = build_setup(c);
  const FieldGrid f = run_field(c, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const NodeAnalysis n = analyze_point(setup, f.node(i), c.t0, c.duration);
    worst = std::max(worst, (n.eigen.values.array() - 3.0).abs().maxCoeff());
  }
  std::mt19937_64 rng(1732);
  const HypercomplexStructure h = standard_quaternionic();
  double term = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Mat F = random_matrix(rng, 4);
    const Mat fast = hypercomplex_sum(F, Mat::Identity(4, 4), h);
    term = std::max(term, (fast - oracle::hypercomplex_termwise(F, Mat::Identity(4, 4), h)).cwiseAbs().maxCoeff() /
                              fast.cwiseAbs().maxCoeff());
  }
  report(8, "hypercomplex identity baseline", worst <= kHypercomplexEigTol && term <= kTermwiseTol,
         std::to_string(f.size()) + " nodes of quat_torus4, max |lambda - 3| " + sci(worst) +
             "; termwise oracle max rel " + sci(term));
}

struct GyreRun {
  AnalysisConfig config;
  LcsOutcome outcome;
};

const GyreRun& gyre() {
  static const GyreRun run = [] {
    GyreRun r;
    r.config = load(kGolden / "production.ini");
    r.outcome = run_lcs(r.config, 0);
    return r;
  }();
  return run;
}

const LcsOutcome& saddle_ridge() {
  static const LcsOutcome run = run_lcs(load(kData / "saddle_ridge.ini"), 1);
  return run;
}

void alignment() {
  const LcsOutcome& s = saddle_ridge();
  const AlignmentReport a = verify_alignment(s.level_set.ridges, kAlignmentMinRelGap, kAlignmentMaxMedianDeg);
  const GyreRun& g = gyre();
  const AlignmentReport b = verify_alignment(g.outcome.level_set.ridges, kGyreAlignMinRelGap, kGyreAlignDeg);
  const double deg = b.median * 180.0 / std::numbers::pi;
  report(9, "level-set normals align with xi1", a.used_points > 0 && a.median <= kSaddleAlignTol && b.passed,
         "saddle median " + sci(a.median) + " rad over " + std::to_string(a.used_points) + " points; double gyre median " +
             sci(deg) + " deg over " + std::to_string(b.used_points) + " points (gap >= 1e-3 lambda1)");
}

void invariance() {
  const InvarianceReport& a = saddle_ridge().ridge.invariance;
  const InvarianceReport& b = gyre().outcome.level_set.invariance;
  const bool ok = !a.degenerate_empty && a.max_distance <= kSaddleInvarianceTol && !b.degenerate_empty &&
                  b.mean_cells <= kGyreInvarianceCells;
  report(10, "advected ridges stay on re-extracted ridges", ok,
         "saddle ridge max distance " + sci(a.max_distance) + " over " + std::to_string(a.advected_points) +
             " points; double gyre (delta 1.5) mean " + sci(b.mean_cells) + " cells over " +
             std::to_string(b.advected_points) + " points");
}

void self_convergence() {
  const FieldGrid& f = gyre().outcome.field;
  std::ifstream in(kGolden / "ftle_reference.csv");
  if (!in) throw Error(ErrorCode::io, "missing golden/double_gyre/ftle_reference.csv");
  std::vector<double> ref;
  std::string line;
  while (std::getline(in, line)) ref.push_back(std::strtod(line.substr(line.rfind(',') + 1).c_str(), nullptr));
  if (ref.size() != f.size()) throw Error(ErrorCode::parse, "reference size does not match the production grid");
  std::size_t within = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double err = std::abs(f.ftle[i] - ref[i]);
    if (err <= kConvergenceTol) ++within;
    worst = std::max(worst, err);
  }
  const double fraction = static_cast<double>(within) / static_cast<double>(f.size());
  report(11, "self-convergence against 4x golden field", fraction >= kConvergenceFraction,
         sci(100.0 * fraction) + "% of nodes within 1e-3 (max error " + sci(worst) + ")");
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  if (names.size() != count_b) {
    why = "file sets differ";
    return false;
  }
  for (const auto& n : names) {
    if (read_text(a / n) != read_text(b / n)) {
      why = n + " differs";
      return false;
    }
  }
  return true;
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "flcs_acceptance_determinism";
  fs::remove_all(root);
  const std::string cfg = (kGolden / "fixed.ini").string();
  auto run = [&](const std::string& name, int threads) {
    const std::string cmd = std::string("\"") + FLCS_CLI + "\" --threads " + std::to_string(threads) + " --out \"" +
                            (root / name).string() + "\" lcs \"" + cfg + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) throw Error(ErrorCode::io, "flcs lcs failed: " + cmd);
  };
  run("first", 1);
  run("second", 1);
  run("eight", 8);
  std::string why_a, why_b;
  const bool repeat = same_tree(root / "first", root / "second", why_a);
  const bool threads = same_tree(root / "first", root / "eight", why_b);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "first")) ++files;
  report(12, "byte-identical lcs output", repeat && threads,
         std::to_string(files) + " files; repeat run " + (repeat ? "identical" : why_a) + ", --threads 1 vs 8 " +
             (threads ? "identical" : why_b));
  fs::remove_all(root);
}

}  // namespace

int main() {
  guarded(1, "linear saddle closed form", saddle_closed_form);
  guarded(2, "rigid rotation isometry", rotation_isometry);
  guarded(3, "variational vs finite-difference Jacobians", jacobian_cross_validation);
  guarded(4, "generalized eigensolver", eigensolver);
  guarded(5, "Rayleigh bound on stretch ratios", rayleigh_bound);
  guarded(6, "Randers b = 0 reduces to Riemannian", finsler_reduction);
  guarded(7, "Finsler fundamental tensor 0-homogeneity", finsler_homogeneity);
  guarded(8, "hypercomplex identity baseline", hypercomplex_baseline);
  guarded(9, "level-set normals align with xi1", alignment);
  guarded(10, "advected ridges stay on re-extracted ridges", invariance);
  guarded(11, "self-convergence against 4x golden field", self_convergence);
  guarded(12, "byte-identical lcs output", determinism);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
