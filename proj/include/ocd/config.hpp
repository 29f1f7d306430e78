#pragma once

#include "ocd/types.hpp"

#include <cstdint>
#include <string_view>

namespace ocd {

enum class Estimator { PiecewiseConstant, PiecewiseLinear };
enum class Stepper { Euler, RK4 };

std::string_view to_string(Estimator e) noexcept;
std::string_view to_string(Stepper s) noexcept;

/// Hyper-parameters of a solve. Defaults follow the reference algorithm
/// (dt = 0.1, absolute threshold 0.01, ridge 0 with automatic fallback).
struct SolverConfig {
  double epsilon = 0.1;      // neighbor radius (closed ball)
  double epsilon_hat = 0.0;  // ridge added to the predictor covariance
  double dt = 0.1;
  std::int64_t max_steps = 10000;
  double gamma_abs = 0.01;  // stop once mean cost <= gamma_abs
  double gamma_rel = 1e-4;  // stop once cost changed by <= gamma_rel * cost over the window
  int stagnation_window = 50;
  Estimator estimator = Estimator::PiecewiseLinear;
  Stepper stepper = Stepper::RK4;
  std::uint64_t seed = 0;
  bool record_diagnostics = true;

  // Reuse the neighbor sets of the step start for all RK stages.
  bool frozen_clusters = false;
  // Worker threads for per-particle work. Results do not depend on it.
  int threads = 1;
  // Ball-tree leaf size.
  int leaf_size = 16;
  // Cluster counts in the diagnostics cost one extra neighbor pass; computed
  // every this many steps (0 disables, leaving -1 in the record).
  int cluster_count_every = 1;

  /// Throws InvalidConfig on out-of-range values.
  void validate() const;
};

/// Observables recorded after each step (and for the initial state).
struct StepDiagnostics {
  std::int64_t step_index = 0;
  double time = 0.0;
  double transport_cost = 0.0;
  SquareMatrix cross_correlation;
  double min_sym_eig = 0.0;
  double marginal_drift_x = 0.0;
  double marginal_drift_y = 0.0;
  std::int64_t n_clusters_x = -1;
  std::int64_t n_clusters_y = -1;
};

}  // namespace ocd
