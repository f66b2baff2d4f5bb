#include "flcs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace flcs::oracle {

namespace {

using Raw = std::vector<double>;

Raw to_raw(const Vec& v) { return Raw(v.data(), v.data() + v.size()); }

Vec from_raw(const Raw& r) {
  Vec v(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) v[static_cast<Eigen::Index>(i)] = r[i];
  return v;
}

Raw axpy(const Raw& y, double a, const Raw& k) {
  Raw out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * k[i];
  return out;
}

// Plain row-major product of two n x n matrices.
using Square = std::vector<std::vector<double>>;

Square to_square(const Mat& m) {
  Square s(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) s[i][j] = m(i, j);
  }
  return s;
}

Square multiply(const Square& a, const Square& b) {
  const std::size_t n = a.size();
  Square c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

Square transpose(const Square& a) {
  const std::size_t n = a.size();
  Square t(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[j][i] = a[i][j];
  }
  return t;
}

double det3(const Square& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Square inverse(const Square& m) {
  const std::size_t n = m.size();
  Square inv(n, std::vector<double>(n));
  if (n == 2) {
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    inv[0][0] = m[1][1] / det;
    inv[0][1] = -m[0][1] / det;
    inv[1][0] = -m[1][0] / det;
    inv[1][1] = m[0][0] / det;
    return inv;
  }
  const double det = det3(m);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      // cofactor of (j, i)
      const std::size_t r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
    }
  }
  return inv;
}

}  // namespace

Vec reference_advect(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                     double production_step) {
  if (duration == 0.0) return x;
  const double h_target = production_step / 100.0;
  const long n = std::max<long>(1, static_cast<long>(std::ceil(std::abs(duration) / h_target)));
  const double h = duration / static_cast<double>(n);
  auto f = [&](double t, const Raw& y) { return to_raw(field.eval(from_raw(y), t)); };
  Raw y = to_raw(x);
  for (long i = 0; i < n; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    const Raw k1 = f(t, y);
    const Raw k2 = f(t + h / 2, axpy(y, h / 2, k1));
    const Raw k3 = f(t + h / 2, axpy(y, h / 2, k2));
    const Raw k4 = f(t + h, axpy(y, h, k3));
    for (std::size_t c = 0; c < y.size(); ++c) y[c] += h * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]) / 6.0;
  }
  return from_raw(y);
}

Mat reference_jacobian_fd(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                          double production_step, double delta) {
  const Eigen::Index n = x.size();
  Mat jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec xp = x, xm = x;
    xp[j] += delta;
    xm[j] -= delta;
    const Vec fp = reference_advect(xp, t0, duration, field, production_step);
    const Vec fm = reference_advect(xm, t0, duration, field, production_step);
    for (Eigen::Index i = 0; i < n; ++i) jac(i, j) = (fp[i] - fm[i]) / (2 * delta);
  }
  return jac;
}

std::vector<double> charpoly_eigs(const Mat& C, const Mat& G0) {
  const std::size_t n = static_cast<std::size_t>(C.rows());
  if (n > 3 || n < 2) {
    throw Error(ErrorCode::unsupported_dimension, "characteristic-polynomial oracle supports dim 2 and 3 only");
  }
  const Square a = multiply(inverse(to_square(G0)), to_square(C));
  std::vector<double> roots;
  if (n == 2) {
    const double tr = a[0][0] + a[1][1];
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const double disc = std::max(0.0, 0.25 * tr * tr - det);
    const double big = 0.5 * tr + std::sqrt(disc);
    roots = {big, det / big};
  } else {
    // lambda^3 + c2 lambda^2 + c1 lambda + c0
    const double c2 = -(a[0][0] + a[1][1] + a[2][2]);
    const double c1 = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) + (a[0][0] * a[2][2] - a[0][2] * a[2][0]) +
                      (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
    const double c0 = -det3(a);
    const double shift = -c2 / 3.0;
    const double p = c1 - c2 * c2 / 3.0;
    const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    if (p >= 0.0) {
      const double s = std::cbrt(-q);
      roots = {s + shift, s + shift, s + shift};
    } else {
      const double m = 2.0 * std::sqrt(-p / 3.0);
      const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k) {
        roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
      }
    }
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

double stretch_ratio_sample(const Mat& F, const Mat& g_start, const Mat& g_end, const Vec& v) {
  const Eigen::Index n = v.size();
  double base = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) base += v[i] * g_start(i, j) * v[j];
  }
  if (!(base > 0.0)) throw Error(ErrorCode::domain, "stretch ratio needs a nonzero vector");
  std::vector<double> fv(n, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) fv[i] += F(i, j) * v[j];
  }
  double stretched = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) stretched += fv[i] * g_end(i, j) * fv[j];
  }
  return stretched / base;
}

Mat hypercomplex_termwise(const Mat& F, const Mat& g, const HypercomplexStructure& h) {
  const Square f = to_square(F);
  const Square ft = transpose(f);
  const Square gs = to_square(g);
  Square total(4, std::vector<double>(4, 0.0));
  for (const Mat* q : {&h.I, &h.J, &h.K}) {
    const Square qs = to_square(*q);
    const Square term = multiply(multiply(multiply(multiply(transpose(qs), ft), gs), qs), f);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) total[i][j] += term[i][j];
    }
  }
  Mat out(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out(i, j) = total[i][j];
  }
  return out;
}

}  // namespace flcs::oracle
