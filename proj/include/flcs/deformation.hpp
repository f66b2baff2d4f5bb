#pragma once

#include "flcs/geometry.hpp"
#include "flcs/types.hpp"

namespace flcs {

/// Coordinate matrix of the pulled-back metric form and the base-point metric of its eigenproblem.
struct CauchyGreenTensor {
  Mat C;
  Mat G0;
  Regime regime = Regime::riemannian;
  /// max|C - C^T| of the assembled sum before symmetrization (hypercomplex only).
  double asymmetry = 0.0;
};

struct EigenDecomposition {
  Vec values;   // descending
  Mat vectors;  // columns, G0-orthonormal, first nonzero component positive
  double gap = 0.0;
  bool degenerate = false;
};

/// Relative gap below which lambda_1 is treated as degenerate.
inline constexpr double kDegenerateGap = 1e-10;

/// C = F^T G_end F with the eigenproblem posed against G_start.
CauchyGreenTensor cauchy_green_riemannian(const Mat& F, const Mat& g_start, const Mat& g_end);

/// Same algebra with fundamental tensors at (x, y_start) and (phi(x), y_end).
CauchyGreenTensor cauchy_green_finsler(const Mat& F, const Mat& g_start, const Mat& g_end);

/// Unsymmetrized sum over Q in {I, J, K} of Q^T F^T G Q F.
Mat hypercomplex_sum(const Mat& F, const Mat& g, const HypercomplexStructure& h);

/// Symmetric part of hypercomplex_sum, posed against G0 = g_base. The sum is symmetric whenever F
/// commutes with the structure; `asymmetry` records how far it is from that.
CauchyGreenTensor cauchy_green_hypercomplex(const Mat& F, const Mat& g, const HypercomplexStructure& h,
                                            const Mat& g_base);
inline CauchyGreenTensor cauchy_green_hypercomplex(const Mat& F, const Mat& g, const HypercomplexStructure& h) {
  return cauchy_green_hypercomplex(F, g, h, g);
}

/// Solves C xi = lambda G0 xi by Cholesky reduction of G0.
EigenDecomposition generalized_eigendecomp(const CauchyGreenTensor& t);

/// sigma = ln(lambda1) / (2 |T|).
double ftle(double lambda1, double duration);

/// G_start^{-1} F^T G_end: the metric adjoint of F between the two tangent spaces.
Mat metric_adjoint(const Mat& F, const Mat& g_start, const Mat& g_end);

/// max|DX Q - Q DX| over the structure; zero when the flow preserves it infinitesimally.
double commutation_defect(const Mat& dx, const HypercomplexStructure& h);

}  // namespace flcs
