#include "flcs/types.hpp"

namespace flcs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::domain_exit: return "domain_exit";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::unsupported_dimension: return "unsupported_dimension";
    case ErrorCode::integration_budget: return "integration_budget";
    case ErrorCode::metric: return "metric";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::division: return "division";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::empty_field: return "empty_field";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

ParseError::ParseError(int line, std::string key, const std::string& message)
    : Error(ErrorCode::parse,
            "line " + std::to_string(line) + (key.empty() ? "" : ", key '" + key + "'") + ": " + message),
      line_(line),
      key_(std::move(key)) {}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::riemannian: return "riemannian";
    case Regime::finsler: return "finsler";
    case Regime::hypercomplex: return "hypercomplex";
  }
  return "unknown";
}

Regime regime_from_string(std::string_view name) {
  if (name == "riemannian") return Regime::riemannian;
  if (name == "finsler") return Regime::finsler;
  if (name == "hypercomplex") return Regime::hypercomplex;
  throw Error(ErrorCode::invalid_argument, "unknown metric regime '" + std::string(name) + "'");
}

}  // namespace flcs
