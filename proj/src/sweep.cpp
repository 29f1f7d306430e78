#include "ocd/dynamics.hpp"
#include "ocd/epsilon_tuning.hpp"
#include "ocd/exact_ot.hpp"
#include "ocd/parallel.hpp"

#include <chrono>
#include <limits>

namespace ocd {

std::vector<SweepRow> epsilon_sweep(const Matrix& x0, const Matrix& y0, const CostModel& cost,
                                    const SolverConfig& config_template,
                                    const std::vector<double>& grid) {
  config_template.validate();
  const DiscreteCoupling exact = emd(x0, y0, cost);
  const Matrix exact_pairs = concat_pairs(x0, y0, &exact.assignment);
  const ParticleEnsemble start(x0, y0);

  std::vector<SweepRow> rows(grid.size());
  parallel_for(static_cast<Index>(grid.size()), config_template.threads, [&](Index begin, Index end) {
    for (Index g = begin; g < end; ++g) {
      SweepRow& row = rows[static_cast<std::size_t>(g)];
      row.epsilon = grid[static_cast<std::size_t>(g)];
      row.emd_cost = exact.total_cost;
      SolverConfig config = config_template;
      config.epsilon = row.epsilon;
      config.threads = 1;
      config.record_diagnostics = false;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const RunResult result = run(start, cost, config);
        const ParticleEnsemble& e = result.final_ensemble;
        row.final_cost = result.final_cost;
        row.steps = e.step_index();
        row.joint_distance = joint_distance(concat_pairs(e.x(), e.y()), exact_pairs);
        row.n_clusters_x = count_cluster_number(e.x(), row.epsilon, config.leaf_size);
        row.n_clusters_y = count_cluster_number(e.y(), row.epsilon, config.leaf_size);
      } catch (const Error& err) {
        row.failed = true;
        row.error = err.what();
        row.final_cost = std::numeric_limits<double>::quiet_NaN();
        row.joint_distance = std::numeric_limits<double>::quiet_NaN();
      }
      row.wall_time_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  });
  return rows;
}

double best_sweep_epsilon(const std::vector<SweepRow>& rows) {
  const SweepRow* best = nullptr;
  for (const SweepRow& r : rows) {
    if (r.failed) continue;
    if (!best || r.joint_distance < best->joint_distance) best = &r;
  }
  if (!best) throw Error(ErrorCode::NoFeasibleEpsilon, "every sweep row failed");
  return best->epsilon;
}

}  // namespace ocd
