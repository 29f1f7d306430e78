#include "ocd/config.hpp"

#include "ocd/error.hpp"

#include <cmath>

namespace ocd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DegenerateEnsemble: return "DegenerateEnsemble";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidGradient: return "InvalidGradient";
    case ErrorCode::SizeGuardExceeded: return "SizeGuardExceeded";
    case ErrorCode::NoFeasibleEpsilon: return "NoFeasibleEpsilon";
    case ErrorCode::CurveTooShort: return "CurveTooShort";
    case ErrorCode::AllZeroImage: return "AllZeroImage";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Estimator e) noexcept {
  return e == Estimator::PiecewiseConstant ? "piecewise-constant" : "piecewise-linear";
}

std::string_view to_string(Stepper s) noexcept { return s == Stepper::Euler ? "euler" : "rk4"; }

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (!(epsilon_hat >= 0.0) || !std::isfinite(epsilon_hat)) fail("epsilon_hat must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be > 0");
  if (max_steps < 0) fail("max_steps must be >= 0");
  if (!(gamma_abs >= 0.0)) fail("gamma_abs must be >= 0");
  if (!(gamma_rel >= 0.0)) fail("gamma_rel must be >= 0");
  if (stagnation_window < 1) fail("stagnation_window must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (leaf_size < 1) fail("leaf_size must be >= 1");
  if (cluster_count_every < 0) fail("cluster_count_every must be >= 0");
}

}  // namespace ocd
