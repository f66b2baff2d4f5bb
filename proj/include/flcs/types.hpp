#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace flcs {

// Chart dimensions are 2..4, so everything fits in small bounded storage.
inline constexpr int kMaxDim = 4;
inline constexpr int kMaxState = kMaxDim + kMaxDim * kMaxDim;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxState, 1>;

enum class ErrorCode {
  domain,
  domain_exit,
  singularity,
  unsupported_dimension,
  integration_budget,
  metric,
  numerical,
  division,
  empty_input,
  empty_field,
  parse,
  io,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a trajectory leaves a non-periodic chart.
class DomainExitError : public Error {
 public:
  DomainExitError(double exit_time, const std::string& what)
      : Error(ErrorCode::domain_exit, what), exit_time_(exit_time) {}
  double exit_time() const noexcept { return exit_time_; }

 private:
  double exit_time_;
};

class ParseError : public Error {
 public:
  ParseError(int line, std::string key, const std::string& message);
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

enum class Regime { riemannian, finsler, hypercomplex };

std::string_view to_string(Regime regime);
Regime regime_from_string(std::string_view name);

}  // namespace flcs
