#include "ocd/dynamics.hpp"

#include "ocd/conditional_expectation.hpp"
#include "ocd/diagnostics.hpp"
#include "ocd/epsilon_tuning.hpp"
#include "ocd/parallel.hpp"
#include "ocd/spatial_index.hpp"

#include <cmath>
#include <string>

namespace ocd {

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::CostBelowGamma: return "cost-below-gamma";
    case Termination::Stagnated: return "stagnated";
    case Termination::MaxSteps: return "max-steps";
  }
  return "unknown";
}

namespace {

struct IndexPair {
  SpatialIndex x;
  SpatialIndex y;
};

IndexPair build_indexes(const ParticleEnsemble& e, const SolverConfig& config) {
  return {SpatialIndex(e.x(), config.leaf_size), SpatialIndex(e.y(), config.leaf_size)};
}

VelocityBatch velocity_with(const ParticleEnsemble& e, const CostModel& cost,
                            const SolverConfig& config, const IndexPair& indexes) {
  EstimateBatch k = config.estimator == Estimator::PiecewiseConstant
                        ? estimate_piecewise_constant(e, cost, indexes.x, indexes.y,
                                                      config.epsilon, config.threads)
                        : estimate_piecewise_linear(e, cost, indexes.x, indexes.y, config.epsilon,
                                                    config.epsilon_hat, config.threads);
  VelocityBatch v{std::move(k.k_x), std::move(k.k_y)};
  const Index n = e.dim();
  parallel_for(e.size(), config.threads, [&](Index begin, Index end) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (Index i = begin; i < end; ++i) {
      cost.grad_x(row(e.x(), i), row(e.y(), i), g);
      auto vx = row(v.v_x, i);
      for (Index a = 0; a < n; ++a) vx[a] -= g[a];
      cost.grad_y(row(e.x(), i), row(e.y(), i), g);
      auto vy = row(v.v_y, i);
      for (Index a = 0; a < n; ++a) vy[a] -= g[a];
    }
  });
  return v;
}

// Positions x + h * v for a stage; divergence surfaces as NonFiniteState.
ParticleEnsemble shifted(const ParticleEnsemble& base, const VelocityBatch& v, double h) {
  Matrix x = base.x() + h * v.v_x;
  Matrix y = base.y() + h * v.v_y;
  if (!all_finite(x) || !all_finite(y)) {
    throw Error(ErrorCode::NonFiniteState,
                "stage state diverged at step " + std::to_string(base.step_index() + 1));
  }
  return ParticleEnsemble(std::move(x), std::move(y));
}

}  // namespace

VelocityBatch ocd_velocity(const ParticleEnsemble& ensemble, const CostModel& cost,
                           const SolverConfig& config) {
  config.validate();
  return velocity_with(ensemble, cost, config, build_indexes(ensemble, config));
}

ParticleEnsemble step_euler(const ParticleEnsemble& ensemble, const CostModel& cost,
                            const SolverConfig& config) {
  config.validate();
  const VelocityBatch v = ocd_velocity(ensemble, cost, config);
  ParticleEnsemble next = ensemble;
  next.advance(ensemble.x() + config.dt * v.v_x, ensemble.y() + config.dt * v.v_y, config.dt);
  return next;
}

ParticleEnsemble step_rk4(const ParticleEnsemble& ensemble, const CostModel& cost,
                          const SolverConfig& config) {
  config.validate();
  const double dt = config.dt;
  const IndexPair start = build_indexes(ensemble, config);

  auto slope = [&](const ParticleEnsemble& stage) {
    if (config.frozen_clusters) return velocity_with(stage, cost, config, start);
    return velocity_with(stage, cost, config, build_indexes(stage, config));
  };

  const VelocityBatch k1 = velocity_with(ensemble, cost, config, start);
  const VelocityBatch k2 = slope(shifted(ensemble, k1, 0.5 * dt));
  const VelocityBatch k3 = slope(shifted(ensemble, k2, 0.5 * dt));
  const VelocityBatch k4 = slope(shifted(ensemble, k3, dt));

  const double w = dt / 6.0;
  Matrix x = ensemble.x() + w * (k1.v_x + 2.0 * k2.v_x + 2.0 * k3.v_x + k4.v_x);
  Matrix y = ensemble.y() + w * (k1.v_y + 2.0 * k2.v_y + 2.0 * k3.v_y + k4.v_y);
  ParticleEnsemble next = ensemble;
  next.advance(std::move(x), std::move(y), dt);
  return next;
}

StepDiagnostics observe(const ParticleEnsemble& ensemble, const CostModel& cost,
                        const MomentSummary& x_reference, const MomentSummary& y_reference,
                        double epsilon, bool with_clusters) {
  StepDiagnostics d;
  d.step_index = ensemble.step_index();
  d.time = ensemble.time();
  d.transport_cost = transport_cost(ensemble, cost);
  if (ensemble.size() >= 2) {
    d.cross_correlation = cross_correlation(ensemble);
    d.min_sym_eig = spd_margin(d.cross_correlation);
  } else {
    d.cross_correlation = SquareMatrix::Zero(ensemble.dim(), ensemble.dim());
  }
  d.marginal_drift_x = marginal_drift(moments(ensemble.x()), x_reference);
  d.marginal_drift_y = marginal_drift(moments(ensemble.y()), y_reference);
  if (with_clusters) {
    d.n_clusters_x = count_cluster_number(ensemble.x(), epsilon);
    d.n_clusters_y = count_cluster_number(ensemble.y(), epsilon);
  }
  return d;
}

RunResult run(ParticleEnsemble ensemble, const CostModel& cost, const SolverConfig& config,
              const StepObserver& on_step) {
  config.validate();
  const MomentSummary x_ref = moments(ensemble.x());
  const MomentSummary y_ref = moments(ensemble.y());

  RunResult result{ensemble, {}, Termination::MaxSteps, 0.0};
  std::vector<double> cost_history;

  auto record = [&](const ParticleEnsemble& e) {
    if (!config.record_diagnostics && !on_step) {
      cost_history.push_back(transport_cost(e, cost));
      return;
    }
    const bool clusters = config.cluster_count_every > 0 &&
                          e.step_index() % config.cluster_count_every == 0;
    StepDiagnostics d = observe(e, cost, x_ref, y_ref, config.epsilon, clusters);
    cost_history.push_back(d.transport_cost);
    if (on_step) on_step(d);
    if (config.record_diagnostics) result.diagnostics.push_back(std::move(d));
  };

  record(ensemble);
  const auto window = static_cast<std::size_t>(config.stagnation_window);
  while (true) {
    const double current = cost_history.back();
    if (current <= config.gamma_abs) {
      result.termination = Termination::CostBelowGamma;
      break;
    }
    const std::size_t steps = cost_history.size() - 1;
    if (steps >= window) {
      const double past = cost_history[steps - window];
      if (std::abs(current - past) <= config.gamma_rel * std::max(current, 1e-12)) {
        result.termination = Termination::Stagnated;
        break;
      }
    }
    if (static_cast<std::int64_t>(steps) >= config.max_steps) {
      result.termination = Termination::MaxSteps;
      break;
    }
    try {
      ensemble = config.stepper == Stepper::Euler ? step_euler(ensemble, cost, config)
                                                  : step_rk4(ensemble, cost, config);
    } catch (const Error& e) {
      throw RunAborted(e, std::move(result.diagnostics));
    }
    record(ensemble);
    // Finite positions can still overflow the cost.
    if (!std::isfinite(cost_history.back())) {
      throw RunAborted(Error(ErrorCode::NonFiniteState, "transport cost overflowed at step " +
                                                            std::to_string(ensemble.step_index())),
                       std::move(result.diagnostics));
    }
  }
  result.final_cost = cost_history.back();
  result.final_ensemble = std::move(ensemble);
  return result;
}

}  // namespace ocd
