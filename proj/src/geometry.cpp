#include "flcs/geometry.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flcs {

void ChartDomain::validate() const {
  if (dim < 2 || dim > kMaxDim) {
    throw Error(ErrorCode::unsupported_dimension, "chart dimension must be in [2, 4], got " + std::to_string(dim));
  }
  if (static_cast<int>(bounds.size()) != dim || static_cast<int>(periodic.size()) != dim) {
    throw Error(ErrorCode::invalid_argument, "chart bounds/periodic flags do not match dimension");
  }
  for (int i = 0; i < dim; ++i) {
    if (!(bounds[i].lo < bounds[i].hi)) {
      throw Error(ErrorCode::invalid_argument, "chart axis " + std::to_string(i) + " needs lo < hi");
    }
  }
}

Vec ChartDomain::wrap(const Vec& x) const {
  Vec out = x;
  for (int i = 0; i < dim; ++i) {
    if (!periodic[i]) continue;
    const double lo = bounds[i].lo;
    const double ext = extent(i);
    double r = std::fmod(x[i] - lo, ext);
    if (r < 0.0) r += ext;
    if (r >= ext) r = 0.0;
    out[i] = lo + r;
  }
  return out;
}

bool ChartDomain::contains(const Vec& x, double slack) const {
  if (x.size() != dim) return false;
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(x[i])) return false;
    if (periodic[i]) continue;
    const double pad = slack * extent(i);
    if (x[i] < bounds[i].lo - pad || x[i] > bounds[i].hi + pad) return false;
  }
  return true;
}

ChartDomain make_chart(std::vector<Interval> bounds, std::vector<bool> periodic) {
  ChartDomain chart;
  chart.dim = static_cast<int>(bounds.size());
  chart.bounds = std::move(bounds);
  chart.periodic = std::move(periodic);
  chart.validate();
  return chart;
}

Mat metric_at(const RiemannianMetric& metric, const ChartDomain& chart, const Vec& x) {
  if (x.size() != chart.dim) {
    throw Error(ErrorCode::domain, "point dimension does not match chart");
  }
  if (!chart.contains(x)) {
    throw Error(ErrorCode::domain, "point outside chart for metric '" + metric.name + "'");
  }
  return metric.eval(chart.wrap(x));
}

bool is_symmetric_positive_definite(const Mat& m, double symmetry_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

void require_spd(const Mat& m, std::string_view what) {
  if (!is_symmetric_positive_definite(m, 1e-10)) {
    throw Error(ErrorCode::metric, std::string(what) + " is not symmetric positive definite");
  }
}

namespace {

void require_nonzero_direction(const Vec& y) {
  if (!(y.norm() > 0.0)) {
    throw Error(ErrorCode::singularity, "Finsler norm is not smooth at the zero section (y = 0)");
  }
}

void require_weak_wind(const Mat& a, const Vec& b) {
  const Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::metric, "Randers base metric is not SPD");
  if (!(b.dot(llt.solve(b)) < 1.0)) {
    throw Error(ErrorCode::metric, "Randers one-form violates |b|_a < 1");
  }
}

Mat randers_fundamental(const Mat& a, const Vec& b, const Vec& y) {
  require_weak_wind(a, b);
  const Vec ay = a * y;
  const double alpha = std::sqrt(y.dot(ay));
  const double norm = alpha + b.dot(y);
  const Vec ell = ay / alpha;
  const Vec shifted = ell + b;
  Mat g = (norm / alpha) * (a - ell * ell.transpose()) + shifted * shifted.transpose();
  return 0.5 * (g + g.transpose());
}

}  // namespace

FinslerNorm randers_norm(RiemannianMetric a, Vec b) {
  if (b.size() != a.dim) throw Error(ErrorCode::invalid_argument, "Randers b has wrong dimension");
  FinslerNorm f;
  f.name = "randers(" + a.name + ")";
  f.dim = a.dim;
  f.eval = [a, b](const Vec& x, const Vec& y) {
    const Mat ax = a.eval(x);
    require_weak_wind(ax, b);
    return std::sqrt(y.dot(ax * y)) + b.dot(y);
  };
  f.fundamental = [a, b](const Vec& x, const Vec& y) { return randers_fundamental(a.eval(x), b, y); };
  return f;
}

FinslerNorm euclidean_norm(int dim) {
  FinslerNorm f;
  f.name = "euclidean";
  f.dim = dim;
  f.eval = [](const Vec&, const Vec& y) { return y.norm(); };
  return f;
}

Mat fundamental_tensor(const FinslerNorm& finsler, const Vec& x, const Vec& y) {
  require_nonzero_direction(y);
  if (finsler.fundamental) return finsler.fundamental(x, y);
  return fundamental_tensor_fd(finsler, x, y);
}

Mat fundamental_tensor_fd(const FinslerNorm& finsler, const Vec& x, const Vec& y) {
  require_nonzero_direction(y);
  const int n = static_cast<int>(y.size());
  const double h = kFundamentalRelStep * y.norm();
  auto sq = [&](const Vec& v) {
    const double f = finsler.eval(x, v);
    return f * f;
  };
  Mat g(n, n);
  const double center = sq(y);
  for (int i = 0; i < n; ++i) {
    Vec yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    g(i, i) = 0.5 * (sq(yp) - 2.0 * center + sq(ym)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Vec pp = y, pm = y, mp = y, mm = y;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      g(i, j) = g(j, i) = 0.5 * (sq(pp) - sq(pm) - sq(mp) + sq(mm)) / (4.0 * h * h);
    }
  }
  return g;
}

HypercomplexStructure standard_quaternionic() {
  HypercomplexStructure h;
  h.I = Mat::Zero(4, 4);
  h.J = Mat::Zero(4, 4);
  h.K = Mat::Zero(4, 4);
  // i*(a + b i + c j + d k) = -b + a i - d j + c k
  h.I(0, 1) = -1; h.I(1, 0) = 1; h.I(2, 3) = -1; h.I(3, 2) = 1;
  // j*(a + b i + c j + d k) = -c + d i + a j - b k
  h.J(0, 2) = -1; h.J(1, 3) = 1; h.J(2, 0) = 1; h.J(3, 1) = -1;
  // k*(a + b i + c j + d k) = -d - c i + b j + a k
  h.K(0, 3) = -1; h.K(1, 2) = -1; h.K(2, 1) = 1; h.K(3, 0) = 1;
  return h;
}

HypercomplexReport hypercomplex_check(const HypercomplexStructure& h) {
  for (const Mat* q : {&h.I, &h.J, &h.K}) {
    if (q->rows() != 4 || q->cols() != 4) {
      throw Error(ErrorCode::unsupported_dimension, "hypercomplex structures require dim = 4");
    }
  }
  const Mat id = Mat::Identity(4, 4);
  auto dev = [](const Mat& m) { return m.cwiseAbs().maxCoeff(); };
  HypercomplexReport r;
  r.i_squared = dev(h.I * h.I + id);
  r.j_squared = dev(h.J * h.J + id);
  r.k_squared = dev(h.K * h.K + id);
  r.ij_minus_k = dev(h.I * h.J - h.K);
  r.jk_minus_i = dev(h.J * h.K - h.I);
  r.ki_minus_j = dev(h.K * h.I - h.J);
  r.max_deviation = std::max({r.i_squared, r.j_squared, r.k_squared, r.ij_minus_k, r.jk_minus_i, r.ki_minus_j});
  r.passed = r.max_deviation <= kQuaternionTol;
  return r;
}

double orthogonality_defect(const HypercomplexStructure& h, const Mat& g) {
  double worst = 0.0;
  for (const Mat* q : {&h.I, &h.J, &h.K}) {
    worst = std::max(worst, (q->transpose() * g * *q - g).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

RiemannianMetric flat_metric(int dim, std::string name) {
  return {std::move(name), dim, [dim](const Vec&) -> Mat { return Mat::Identity(dim, dim); }};
}

ChartDomain torus(int dim) {
  return make_chart(std::vector<Interval>(dim, Interval{0.0, kTwoPi}), std::vector<bool>(dim, true));
}

double param_or(const Params& params, std::string_view key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(std::string_view id, const Params& params, const Params& defaults) {
  for (const auto& [key, value] : params) {
    if (!defaults.contains(key)) {
      throw Error(ErrorCode::invalid_argument,
                  "manifold '" + std::string(id) + "' has no parameter '" + key + "'");
    }
  }
}

}  // namespace

const std::vector<std::string>& manifold_ids() {
  static const std::vector<std::string> ids = {"flat_torus2", "bump_torus2", "rect_dg",
                                               "randers_torus2", "quat_torus4", "plane2"};
  return ids;
}

Params manifold_defaults(std::string_view id) {
  if (id == "bump_torus2") return {{"amplitude", kBumpAmplitude}};
  if (id == "plane2") return {{"half_width", 10.0}};
  if (std::find(manifold_ids().begin(), manifold_ids().end(), id) == manifold_ids().end()) {
    throw Error(ErrorCode::invalid_argument, "unknown manifold '" + std::string(id) + "'");
  }
  return {};
}

Manifold make_manifold(std::string_view id, const Params& params) {
  reject_unknown(id, params, manifold_defaults(id));
  Manifold m;
  m.id = std::string(id);
  if (id == "flat_torus2") {
    m.chart = torus(2);
    m.metric = flat_metric(2, "flat");
  } else if (id == "bump_torus2") {
    const double amp = param_or(params, "amplitude", kBumpAmplitude);
    m.chart = torus(2);
    // G(x) = exp(2 f(x)) Id with f = amp sin x1 cos x2
    m.metric = {"conformal_bump", 2, [amp](const Vec& x) -> Mat {
                  const double f = amp * std::sin(x[0]) * std::cos(x[1]);
                  return std::exp(2.0 * f) * Mat::Identity(2, 2);
                }};
  } else if (id == "rect_dg") {
    m.chart = make_chart({{0.0, 2.0}, {0.0, 1.0}}, {false, false});
    m.metric = flat_metric(2, "flat");
  } else if (id == "randers_torus2") {
    m.chart = torus(2);
    m.metric = flat_metric(2, "flat");
    m.default_regime = Regime::finsler;
    Vec b(2);
    b << 0.2, 0.0;
    m.default_randers_b = b;
  } else if (id == "quat_torus4") {
    m.chart = torus(4);
    m.metric = flat_metric(4, "flat");
    m.default_regime = Regime::hypercomplex;
    m.structure = standard_quaternionic();
  } else if (id == "plane2") {
    const double w = param_or(params, "half_width", 10.0);
    if (!(w > 0.0)) throw Error(ErrorCode::invalid_argument, "plane2 half_width must be > 0");
    m.chart = make_chart({{-w, w}, {-w, w}}, {false, false});
    m.metric = flat_metric(2, "flat");
  }
  return m;
}

}  // namespace flcs
