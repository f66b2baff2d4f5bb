#include "flcs/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace flcs {

std::string_view to_string(IntegratorMethod method) {
  return method == IntegratorMethod::rk4 ? "rk4" : "rk45";
}

IntegratorMethod integrator_method_from_string(std::string_view name) {
  if (name == "rk4") return IntegratorMethod::rk4;
  if (name == "rk45") return IntegratorMethod::rk45;
  throw Error(ErrorCode::invalid_argument, "unknown integrator method '" + std::string(name) + "'");
}

void IntegratorConfig::validate() const {
  if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "integrator step must be > 0");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerances must be > 0");
  if (max_steps <= 0) throw Error(ErrorCode::invalid_argument, "max_steps must be > 0");
}

namespace {

using Rhs = std::function<State(double, const State&)>;

struct Integration {
  State y;
  long steps = 0;
};

// Position components of the state are y.head(dim).
void check_inside(const ChartDomain& chart, const State& y, double t) {
  const Vec x = y.head(chart.dim);
  if (!chart.contains(x, kExitSlack)) {
    std::ostringstream msg;
    msg << "trajectory left the chart at t = " << t;
    throw DomainExitError(t, msg.str());
  }
}

Integration integrate_rk4(const Rhs& f, State y, double t0, double duration, const ChartDomain& chart,
                          const IntegratorConfig& cfg) {
  const long n = std::max<long>(1, static_cast<long>(std::ceil(std::abs(duration) / cfg.step - 1e-9)));
  if (n > cfg.max_steps) {
    throw Error(ErrorCode::integration_budget,
                "fixed-step integration needs " + std::to_string(n) + " steps, budget is " +
                    std::to_string(cfg.max_steps));
  }
  const double h = duration / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const State k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const State k4 = f(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_inside(chart, y, t0 + static_cast<double>(i + 1) * h);
  }
  return {y, n};
}

// Dormand-Prince 5(4) with the 5th-order solution propagated.
Integration integrate_rk45(const Rhs& f, State y, double t0, double duration, const ChartDomain& chart,
                           const IntegratorConfig& cfg) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b* (error weights)
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double dir = duration < 0.0 ? -1.0 : 1.0;
  const double t_end = t0 + duration;
  double t = t0;
  double h = dir * std::min(cfg.step, std::abs(duration));
  long accepted = 0;
  long attempts = 0;
  State k1 = f(t, y);
  while (dir * (t_end - t) > 0.0) {
    if (++attempts > cfg.max_steps) {
      std::ostringstream msg;
      msg << "adaptive integration exceeded " << cfg.max_steps << " steps at t = " << t;
      throw Error(ErrorCode::integration_budget, msg.str());
    }
    bool last = false;
    if (dir * (t + h - t_end) >= 0.0) {
      h = t_end - t;
      last = true;
    }
    const State k2 = f(t + c2 * h, y + h * (a21 * k1));
    const State k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const State k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const State k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const State k7 = f(t + h, y_new);
    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err_norm = std::max(err_norm, std::abs(err[i]) / scale);
    }
    if (!std::isfinite(err_norm)) {
      throw Error(ErrorCode::numerical, "non-finite state during integration");
    }
    if (err_norm <= 1.0) {
      t = last ? t_end : t + h;
      y = y_new;
      k1 = k7;
      ++accepted;
      check_inside(chart, y, t);
      const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      h *= factor;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
      throw Error(ErrorCode::numerical, "adaptive step size underflow");
    }
  }
  return {y, accepted};
}

Integration integrate(const Rhs& f, const State& y0, double t0, double duration, const ChartDomain& chart,
                      const IntegratorConfig& cfg) {
  cfg.validate();
  if (cfg.method == IntegratorMethod::rk4) return integrate_rk4(f, y0, t0, duration, chart, cfg);
  return integrate_rk45(f, y0, t0, duration, chart, cfg);
}

void check_start(const Vec& x, const VectorFieldSpec& field, const ChartDomain& chart) {
  if (x.size() != chart.dim || field.dim != chart.dim) {
    throw Error(ErrorCode::domain, "point/field dimension does not match chart dimension");
  }
  if (!chart.contains(x)) throw Error(ErrorCode::domain, "initial point outside chart");
}

}  // namespace

Vec advect_unwrapped(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                     const ChartDomain& chart, const IntegratorConfig& cfg, long* steps) {
  check_start(x, field, chart);
  if (duration == 0.0) {
    if (steps) *steps = 0;
    return x;
  }
  const Rhs rhs = [&](double t, const State& y) -> State { return field.eval(Vec(y), t); };
  const Integration out = integrate(rhs, State(x), t0, duration, chart, cfg);
  if (steps) *steps = out.steps;
  return Vec(out.y);
}

Vec advect(const Vec& x, double t0, double duration, const VectorFieldSpec& field, const ChartDomain& chart,
           const IntegratorConfig& cfg) {
  return chart.wrap(advect_unwrapped(x, t0, duration, field, chart, cfg));
}

Mat field_jacobian(const VectorFieldSpec& field, const ChartDomain& chart, const Vec& x, double t) {
  if (field.jacobian) return field.jacobian(x, t);
  const int n = field.dim;
  Mat dx(n, n);
  for (int j = 0; j < n; ++j) {
    const double h = kFieldJacobianRelStep * chart.extent(j);
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    dx.col(j) = (field.eval(xp, t) - field.eval(xm, t)) / (2.0 * h);
  }
  return dx;
}

FlowMapResult flow_jacobian_variational(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                                        const ChartDomain& chart, const IntegratorConfig& cfg) {
  check_start(x, field, chart);
  const int n = field.dim;
  FlowMapResult result;
  result.method_tag = "variational-" + std::string(to_string(cfg.method));
  if (duration == 0.0) {
    result.endpoint = chart.wrap(x);
    result.jacobian = Mat::Identity(n, n);
    return result;
  }
  // State layout: position (n), then F column-major (n*n).
  const Rhs rhs = [&](double t, const State& y) -> State {
    const Vec pos = y.head(n);
    State dy(n + n * n);
    dy.head(n) = field.eval(pos, t);
    const Mat dxf = field_jacobian(field, chart, pos, t);
    const Eigen::Map<const Eigen::MatrixXd> jac(y.data() + n, n, n);
    Eigen::Map<Eigen::MatrixXd>(dy.data() + n, n, n).noalias() = dxf * jac;
    return dy;
  };
  State y0(n + n * n);
  y0.head(n) = x;
  Eigen::Map<Eigen::MatrixXd>(y0.data() + n, n, n).setIdentity();
  const Integration out = integrate(rhs, y0, t0, duration, chart, cfg);
  result.endpoint = chart.wrap(Vec(out.y.head(n)));
  result.jacobian = Eigen::Map<const Eigen::MatrixXd>(out.y.data() + n, n, n);
  result.steps_taken = out.steps;
  return result;
}

double default_fd_offset(const ChartDomain& chart) {
  double ext = chart.extent(0);
  for (int i = 1; i < chart.dim; ++i) ext = std::min(ext, chart.extent(i));
  return 1e-4 * ext;
}

Mat flow_jacobian_fd(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                     const ChartDomain& chart, const IntegratorConfig& cfg, double delta) {
  check_start(x, field, chart);
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "finite-difference offset must be > 0");
  const int n = field.dim;
  Mat jac(n, n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += delta;
    xm[i] -= delta;
    if (!chart.contains(xp) || !chart.contains(xm)) {
      throw Error(ErrorCode::domain, "finite-difference stencil leaves the chart");
    }
    const Vec fp = advect_unwrapped(xp, t0, duration, field, chart, cfg);
    const Vec fm = advect_unwrapped(xm, t0, duration, field, chart, cfg);
    jac.col(i) = (fp - fm) / (2.0 * delta);
  }
  return jac;
}

Mat right_quaternion_multiplication(const Vec& q) {
  Mat r(4, 4);
  r << q[0], -q[1], -q[2], -q[3],
       q[1], q[0], q[3], -q[2],
       q[2], -q[3], q[0], q[1],
       q[3], q[2], -q[1], q[0];
  return r;
}

namespace {

constexpr double kPi = std::numbers::pi;

double param_or(const Params& params, std::string_view key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

VectorFieldSpec saddle(const Params& p) {
  const double a = param_or(p, "a", 1.0);
  const double kappa = param_or(p, "kappa", 0.0);
  if (kappa < 0.0) throw Error(ErrorCode::invalid_argument, "saddle kappa must be >= 0");
  // s(u) = sin(kappa u) / kappa, which is u for kappa = 0.
  auto s = [kappa](double u) { return kappa == 0.0 ? u : std::sin(kappa * u) / kappa; };
  auto ds = [kappa](double u) { return kappa == 0.0 ? 1.0 : std::cos(kappa * u); };
  VectorFieldSpec f;
  f.name = "saddle";
  f.dim = 2;
  f.eval = [=](const Vec& x, double) -> Vec {
    Vec v(2);
    v << a * s(x[0]), -a * s(x[1]);
    return v;
  };
  f.jacobian = [=](const Vec& x, double) -> Mat {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a * ds(x[0]);
    m(1, 1) = -a * ds(x[1]);
    return m;
  };
  return f;
}

VectorFieldSpec rotation(const Params& p) {
  const double w = param_or(p, "omega", 1.0);
  VectorFieldSpec f;
  f.name = "rotation";
  f.dim = 2;
  f.divergence_free = true;
  f.isometric = true;
  f.eval = [w](const Vec& x, double) -> Vec {
    Vec v(2);
    v << -w * x[1], w * x[0];
    return v;
  };
  f.jacobian = [w](const Vec&, double) -> Mat {
    Mat m(2, 2);
    m << 0.0, -w, w, 0.0;
    return m;
  };
  return f;
}

VectorFieldSpec double_gyre(const Params& p) {
  const double amp = param_or(p, "A", 0.1);
  const double eps = param_or(p, "epsilon", 0.1);
  const double omega = param_or(p, "omega", kPi / 5.0);
  VectorFieldSpec f;
  f.name = "double_gyre";
  f.dim = 2;
  f.divergence_free = true;
  // f(x, t) = a(t) x^2 + b(t) x with a = eps sin(omega t), b = 1 - 2 eps sin(omega t).
  f.eval = [=](const Vec& x, double t) -> Vec {
    const double a = eps * std::sin(omega * t);
    const double b = 1.0 - 2.0 * a;
    const double g = a * x[0] * x[0] + b * x[0];
    const double dg = 2.0 * a * x[0] + b;
    Vec v(2);
    v << -kPi * amp * std::sin(kPi * g) * std::cos(kPi * x[1]),
        kPi * amp * std::cos(kPi * g) * std::sin(kPi * x[1]) * dg;
    return v;
  };
  f.jacobian = [=](const Vec& x, double t) -> Mat {
    const double a = eps * std::sin(omega * t);
    const double b = 1.0 - 2.0 * a;
    const double g = a * x[0] * x[0] + b * x[0];
    const double dg = 2.0 * a * x[0] + b;
    const double sg = std::sin(kPi * g), cg = std::cos(kPi * g);
    const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
    Mat m(2, 2);
    m(0, 0) = -kPi * kPi * amp * cg * dg * cy;
    m(0, 1) = kPi * kPi * amp * sg * sy;
    m(1, 0) = kPi * amp * (-kPi * sg * dg * dg + cg * 2.0 * a) * sy;
    m(1, 1) = kPi * kPi * amp * cg * cy * dg;
    return m;
  };
  return f;
}

VectorFieldSpec torus_shear(const Params& p) {
  const double c = param_or(p, "amplitude", 0.5);
  VectorFieldSpec f;
  f.name = "torus_shear";
  f.dim = 2;
  f.divergence_free = true;
  f.eval = [c](const Vec& x, double) -> Vec {
    Vec v(2);
    v << 1.0 + c * std::cos(x[1]), 0.0;
    return v;
  };
  f.jacobian = [c](const Vec& x, double) -> Mat {
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = -c * std::sin(x[1]);
    return m;
  };
  return f;
}

VectorFieldSpec quat_torus_flow(const Params& p) {
  const double eps = param_or(p, "epsilon", 0.0);
  Vec drift(4);
  drift << 1.0, 0.5, 0.25, 0.125;
  Vec q(4);
  q << 0.3, 0.2, -0.1, 0.4;
  const Mat rq = right_quaternion_multiplication(q);
  VectorFieldSpec f;
  f.name = "quat_torus_flow";
  f.dim = 4;
  // Constant drift plus eps * R_q (sin x_i); eps = 0 commutes with the left-multiplication structure.
  f.divergence_free = eps == 0.0;
  f.isometric = eps == 0.0;
  f.eval = [=](const Vec& x, double) -> Vec {
    Vec s(4);
    for (int i = 0; i < 4; ++i) s[i] = std::sin(x[i]);
    return drift + eps * (rq * s);
  };
  f.jacobian = [=](const Vec& x, double) -> Mat {
    Mat d = Mat::Zero(4, 4);
    for (int i = 0; i < 4; ++i) d(i, i) = std::cos(x[i]);
    return eps * (rq * d);
  };
  return f;
}

VectorFieldSpec zero_field(const Params& p) {
  const int dim = static_cast<int>(param_or(p, "dim", 2.0));
  if (dim < 2 || dim > kMaxDim) throw Error(ErrorCode::unsupported_dimension, "zero field dim must be 2..4");
  VectorFieldSpec f;
  f.name = "zero";
  f.dim = dim;
  f.divergence_free = true;
  f.isometric = true;
  f.eval = [dim](const Vec&, double) -> Vec { return Vec::Zero(dim); };
  f.jacobian = [dim](const Vec&, double) -> Mat { return Mat::Zero(dim, dim); };
  return f;
}

}  // namespace

const std::vector<std::string>& field_ids() {
  static const std::vector<std::string> ids = {"saddle", "rotation", "double_gyre", "torus_shear",
                                               "quat_torus_flow", "zero"};
  return ids;
}

Params field_defaults(std::string_view id) {
  if (id == "saddle") return {{"a", 1.0}, {"kappa", 0.0}};
  if (id == "rotation") return {{"omega", 1.0}};
  if (id == "double_gyre") return {{"A", 0.1}, {"epsilon", 0.1}, {"omega", kPi / 5.0}};
  if (id == "torus_shear") return {{"amplitude", 0.5}};
  if (id == "quat_torus_flow") return {{"epsilon", 0.0}};
  if (id == "zero") return {{"dim", 2.0}};
  throw Error(ErrorCode::invalid_argument, "unknown flow '" + std::string(id) + "'");
}

VectorFieldSpec make_field(std::string_view id, const Params& params) {
  const Params defaults = field_defaults(id);
  for (const auto& [key, value] : params) {
    if (!defaults.contains(key)) {
      throw Error(ErrorCode::invalid_argument, "flow '" + std::string(id) + "' has no parameter '" + key + "'");
    }
  }
  if (id == "saddle") return saddle(params);
  if (id == "rotation") return rotation(params);
  if (id == "double_gyre") return double_gyre(params);
  if (id == "torus_shear") return torus_shear(params);
  if (id == "quat_torus_flow") return quat_torus_flow(params);
  return zero_field(params);
}

}  // namespace flcs
