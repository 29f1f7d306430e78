#pragma once

#include "ocd/config.hpp"
#include "ocd/cost.hpp"
#include "ocd/types.hpp"

#include <string>
#include <vector>

namespace ocd {

/// Connected components of the closed eps-ball graph (DBSCAN with
/// min_points = 1, so there is no noise label). Labels are numbered in order
/// of each component's smallest member index.
struct ClusterReport {
  double epsilon = 0.0;
  Index n_clusters = 0;
  std::vector<Index> cluster_labels;
};

ClusterReport count_clusters(const Matrix& points, double epsilon, int leaf_size = 16);

/// Number of components only; stops early once everything is connected.
Index count_cluster_number(const Matrix& points, double epsilon, int leaf_size = 16);

/// Largest grid value whose cluster ratio n_clusters / N exceeds beta.
/// Throws NoFeasibleEpsilon when no grid value qualifies and InvalidConfig for
/// beta outside (0, 1) or an unsorted grid.
double epsilon_max(const Matrix& points, double beta, const std::vector<double>& grid);

/// 0.75 * dim * n_particles^(-1/4).
double epsilon_rule_of_thumb(Index dim, Index n_particles);

/// Log-spaced candidate radii spanning the sample's pairwise-distance scale:
/// from 1e-6 times to 1x the largest bounding-box extent. Used by the
/// automatic radius selection.
std::vector<double> default_epsilon_grid(const Matrix& points, int n_grid = 61);

/// Radius chosen by the beta rule (beta = 0.9 by default): epsilon_max of the
/// joint cloud of (x_i, y_i) rows in R^{2n} over default_epsilon_grid. Throws
/// ShapeMismatch for unpaired inputs.
double epsilon_auto(const Matrix& x_samples, const Matrix& y_samples, double beta = 0.9);

/// How a solve picks its radius: a fixed value, the beta rule, the rule of
/// thumb, or the knee of the joint cluster curve.
enum class EpsilonMode { Fixed, Auto, RuleOfThumb, Crit };

/// Radius for the pair (x, y) under `mode`; `fixed` is returned for
/// EpsilonMode::Fixed.
double resolve_epsilon(EpsilonMode mode, double fixed, const Matrix& x_samples,
                       const Matrix& y_samples);

struct CurvePoint {
  double epsilon = 0.0;
  Index n_clusters = 0;
};

struct KneeResult {
  double epsilon = 0.0;
  bool low_confidence = false;
};

/// Knee of the log(n_clusters) versus log(eps) curve: the interior grid point
/// with the largest |second divided difference|. Stencils whose right point
/// has two or fewer clusters are skipped (saturated tail). A curve without
/// curvature returns the middle grid point flagged low_confidence. Needs >= 5
/// points (CurveTooShort) with ascending positive eps and positive counts.
KneeResult epsilon_crit(const std::vector<CurvePoint>& curve);

/// Cluster-count curve of `points` over `grid`.
std::vector<CurvePoint> cluster_curve(const Matrix& points, const std::vector<double>& grid);

struct SweepRow {
  double epsilon = 0.0;
  double final_cost = 0.0;
  double emd_cost = 0.0;
  double joint_distance = 0.0;
  Index n_clusters_x = 0;
  Index n_clusters_y = 0;
  std::int64_t steps = 0;
  double wall_time_ms = 0.0;
  bool failed = false;
  std::string error;
};

/// One solver run per grid radius, all from the same initial pairing
/// (x0 row i with y0 row i), compared against the exact coupling of the same
/// samples. A failing row is marked and the sweep continues.
std::vector<SweepRow> epsilon_sweep(const Matrix& x0, const Matrix& y0, const CostModel& cost,
                                    const SolverConfig& config_template,
                                    const std::vector<double>& grid);

/// Grid value with the smallest joint distance among successful rows.
double best_sweep_epsilon(const std::vector<SweepRow>& rows);

}  // namespace ocd
