#pragma once

#include "ocd/config.hpp"
#include "ocd/cost.hpp"
#include "ocd/diagnostics.hpp"
#include "ocd/ensemble.hpp"
#include "ocd/error.hpp"

#include <functional>
#include <vector>

namespace ocd {

/// Per-particle drift: v_x = -grad_x c + E[grad_x c | X], and the mirror for y.
struct VelocityBatch {
  Matrix v_x;
  Matrix v_y;
};

enum class Termination { CostBelowGamma, Stagnated, MaxSteps };

std::string_view to_string(Termination t) noexcept;

struct RunResult {
  ParticleEnsemble final_ensemble;
  std::vector<StepDiagnostics> diagnostics;
  Termination termination = Termination::MaxSteps;
  double final_cost = 0.0;
};

/// Raised when a run diverges; carries the diagnostics recorded so far.
class RunAborted : public Error {
 public:
  RunAborted(const Error& cause, std::vector<StepDiagnostics> partial)
      : Error(cause.code(), cause.what()), partial_(std::move(partial)) {}
  const std::vector<StepDiagnostics>& partial_diagnostics() const noexcept { return partial_; }

 private:
  std::vector<StepDiagnostics> partial_;
};

/// Drift at the current positions, with neighbor indexes rebuilt on them.
VelocityBatch ocd_velocity(const ParticleEnsemble& ensemble, const CostModel& cost,
                           const SolverConfig& config);

/// One explicit Euler step. Throws InvalidConfig for dt <= 0 and
/// NonFiniteState if a particle diverges.
ParticleEnsemble step_euler(const ParticleEnsemble& ensemble, const CostModel& cost,
                            const SolverConfig& config);

/// One classical Runge-Kutta step. Every stage rebuilds the neighbor indexes
/// on the stage positions and re-estimates the conditional expectations,
/// unless config.frozen_clusters keeps the step-start neighbor sets.
ParticleEnsemble step_rk4(const ParticleEnsemble& ensemble, const CostModel& cost,
                          const SolverConfig& config);

/// Builds the diagnostics record for `ensemble` relative to the initial
/// marginal moments.
StepDiagnostics observe(const ParticleEnsemble& ensemble, const CostModel& cost,
                        const MomentSummary& x_reference,
                        const MomentSummary& y_reference, double epsilon,
                        bool count_clusters);

using StepObserver = std::function<void(const StepDiagnostics&)>;

/// Steps until the mean cost drops to gamma_abs, the cost stagnates over
/// stagnation_window steps, or max_steps is reached. When diagnostics are
/// recorded the first entry describes the initial state. Divergence throws
/// RunAborted with the partial diagnostics.
RunResult run(ParticleEnsemble ensemble, const CostModel& cost, const SolverConfig& config,
              const StepObserver& on_step = {});

}  // namespace ocd
