#pragma once

// Brute-force reference implementations for tests and the `validate` command. None of these share
// numerical kernels with the production path; they are slow and dimension-capped on purpose.

#include "flcs/flow.hpp"
#include "flcs/geometry.hpp"

#include <vector>

namespace flcs::oracle {

/// Fixed-step classical RK4 at 1/100 of `production_step`, without chart wrapping.
Vec reference_advect(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                     double production_step);

/// Centered differences of reference_advect.
Mat reference_jacobian_fd(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                          double production_step, double delta);

/// Roots of det(C - lambda G0) = 0 from the characteristic polynomial of G0^{-1} C, descending. dim <= 3.
std::vector<double> charpoly_eigs(const Mat& C, const Mat& G0);

/// |F v|^2_{G_end} / |v|^2_{G_start}.
double stretch_ratio_sample(const Mat& F, const Mat& g_start, const Mat& g_end, const Vec& v);

/// sum over Q of Q^T F^T G Q F, each product formed by explicit index loops.
Mat hypercomplex_termwise(const Mat& F, const Mat& g, const HypercomplexStructure& h);

}  // namespace flcs::oracle
