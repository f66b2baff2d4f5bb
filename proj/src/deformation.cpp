#include "flcs/deformation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace flcs {

namespace {

void require_square(const Mat& m, Eigen::Index n, std::string_view what) {
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " has the wrong shape");
  }
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

CauchyGreenTensor pullback(const Mat& F, const Mat& g_start, const Mat& g_end, Regime regime) {
  const Eigen::Index n = F.rows();
  require_square(F, n, "deformation gradient");
  require_square(g_start, n, "start metric");
  require_square(g_end, n, "end metric");
  require_spd(g_start, "start metric");
  require_spd(g_end, "end metric");
  if (!F.allFinite()) throw Error(ErrorCode::numerical, "deformation gradient is not finite");
  CauchyGreenTensor t;
  t.C = symmetrized(F.transpose() * g_end * F);
  t.G0 = g_start;
  t.regime = regime;
  return t;
}

}  // namespace

CauchyGreenTensor cauchy_green_riemannian(const Mat& F, const Mat& g_start, const Mat& g_end) {
  return pullback(F, g_start, g_end, Regime::riemannian);
}

CauchyGreenTensor cauchy_green_finsler(const Mat& F, const Mat& g_start, const Mat& g_end) {
  return pullback(F, g_start, g_end, Regime::finsler);
}

Mat hypercomplex_sum(const Mat& F, const Mat& g, const HypercomplexStructure& h) {
  if (F.rows() != 4 || F.cols() != 4) {
    throw Error(ErrorCode::unsupported_dimension, "hypercomplex deformation tensor requires dim = 4");
  }
  require_square(g, 4, "metric");
  Mat sum = Mat::Zero(4, 4);
  for (const Mat* q : {&h.I, &h.J, &h.K}) {
    require_square(*q, 4, "hypercomplex structure");
    sum += q->transpose() * F.transpose() * g * (*q * F);
  }
  return sum;
}

CauchyGreenTensor cauchy_green_hypercomplex(const Mat& F, const Mat& g, const HypercomplexStructure& h,
                                            const Mat& g_base) {
  const Mat sum = hypercomplex_sum(F, g, h);
  require_spd(g, "metric");
  require_spd(g_base, "base metric");
  CauchyGreenTensor t;
  t.asymmetry = (sum - sum.transpose()).cwiseAbs().maxCoeff();
  t.C = symmetrized(sum);
  t.G0 = g_base;
  t.regime = Regime::hypercomplex;
  return t;
}

EigenDecomposition generalized_eigendecomp(const CauchyGreenTensor& t) {
  const Eigen::Index n = t.C.rows();
  require_square(t.C, n, "deformation tensor");
  require_square(t.G0, n, "base metric");
  const Eigen::LLT<Mat> llt(t.G0);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::metric, "base metric factorization failed");
  }
  // A = L^{-1} C L^{-T}
  const Mat lower = llt.matrixL();
  Mat a = lower.triangularView<Eigen::Lower>().solve(t.C);
  a = lower.triangularView<Eigen::Lower>().solve(a.transpose().eval()).eval();
  a = symmetrized(a);

  const Eigen::SelfAdjointEigenSolver<Mat> solver(a);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "symmetric eigensolver did not converge (|A| = " << a.norm() << ")";
    throw Error(ErrorCode::numerical, msg.str());
  }
  // xi = L^{-T} w
  const Mat xi = lower.transpose().triangularView<Eigen::Upper>().solve(solver.eigenvectors());

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;  // solver sorts ascending
    out.values[k] = solver.eigenvalues()[src];
    Vec v = xi.col(src);
    const double tiny = 1e-12 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v[i]) > tiny) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    out.vectors.col(k) = v;
  }
  // The smallest eigenvalue of a strongly stretching map sits below roundoff of |C| and may come out
  // slightly negative; only non-finite output is an error.
  if (!out.values.allFinite() || !out.vectors.allFinite()) {
    std::ostringstream msg;
    msg << "eigensolver produced non-finite output (|C| = " << t.C.norm() << ")";
    throw Error(ErrorCode::numerical, msg.str());
  }
  out.gap = out.values[0] - out.values[1];
  out.degenerate = out.gap <= kDegenerateGap * out.values[0];
  return out;
}

double ftle(double lambda1, double duration) {
  if (duration == 0.0) throw Error(ErrorCode::division, "FTLE undefined for a zero-length window");
  if (!(lambda1 > 0.0)) throw Error(ErrorCode::domain, "FTLE needs a positive dominant eigenvalue");
  return std::log(lambda1) / (2.0 * std::abs(duration));
}

Mat metric_adjoint(const Mat& F, const Mat& g_start, const Mat& g_end) {
  return g_start.llt().solve(F.transpose() * g_end);
}

double commutation_defect(const Mat& dx, const HypercomplexStructure& h) {
  double worst = 0.0;
  for (const Mat* q : {&h.I, &h.J, &h.K}) {
    worst = std::max(worst, (dx * *q - *q * dx).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace flcs
