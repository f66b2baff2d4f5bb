#pragma once

#include "flcs/geometry.hpp"
#include "flcs/types.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace flcs {

struct VectorFieldSpec {
  std::string name;
  int dim = 2;
  std::function<Vec(const Vec& x, double t)> eval;
  /// Analytic DX(x, t); empty means central differences.
  std::function<Mat(const Vec& x, double t)> jacobian;
  bool divergence_free = false;
  /// Generates Euclidean isometries (used by the isometry checks in `validate`).
  bool isometric = false;
};

enum class IntegratorMethod { rk4, rk45 };

std::string_view to_string(IntegratorMethod method);
IntegratorMethod integrator_method_from_string(std::string_view name);

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::rk45;
  double step = 0.01;  // fixed step (rk4) or initial step (rk45)
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  long max_steps = 1'000'000;

  void validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

struct FlowMapResult {
  Vec endpoint;
  Mat jacobian;
  long steps_taken = 0;
  std::string method_tag;
};

/// Endpoint of the flow from t0 to t0 + T, wrapped into periodic axes.
Vec advect(const Vec& x, double t0, double duration, const VectorFieldSpec& field, const ChartDomain& chart,
           const IntegratorConfig& cfg);

/// Same trajectory without periodic wrapping (universal-cover coordinates).
Vec advect_unwrapped(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                     const ChartDomain& chart, const IntegratorConfig& cfg, long* steps = nullptr);

/// Flow map and its Jacobian from the variational equation dF/dt = DX F, F(t0) = Id.
FlowMapResult flow_jacobian_variational(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                                        const ChartDomain& chart, const IntegratorConfig& cfg);

/// Centered differences of the (unwrapped) flow map with absolute offset `delta`.
Mat flow_jacobian_fd(const Vec& x, double t0, double duration, const VectorFieldSpec& field,
                     const ChartDomain& chart, const IntegratorConfig& cfg, double delta);

/// Default finite-difference offset: 1e-4 of the smallest chart extent.
double default_fd_offset(const ChartDomain& chart);

/// DX(x, t), analytic when available, else central differences with step 1e-5 * extent.
Mat field_jacobian(const VectorFieldSpec& field, const ChartDomain& chart, const Vec& x, double t);

inline constexpr double kFieldJacobianRelStep = 1e-5;
/// Non-periodic charts tolerate this fraction of the extent before a trajectory counts as exiting.
inline constexpr double kExitSlack = 1e-9;

// Catalog: saddle, rotation, double_gyre, torus_shear, quat_torus_flow, zero.
VectorFieldSpec make_field(std::string_view id, const Params& params = {});
const std::vector<std::string>& field_ids();
Params field_defaults(std::string_view id);

/// Matrix of right multiplication p -> p q on quaternions ~ R^4.
Mat right_quaternion_multiplication(const Vec& q);

}  // namespace flcs
