#include "ocd/epsilon_tuning.hpp"
#include "ocd/error.hpp"
#include "ocd/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ocd {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)), sets_(n) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index a) {
    while (parent_[static_cast<std::size_t>(a)] != a) {
      auto& p = parent_[static_cast<std::size_t>(a)];
      p = parent_[static_cast<std::size_t>(p)];
      a = p;
    }
    return a;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;  // root is the smallest member
    --sets_;
  }
  Index sets() const { return sets_; }

 private:
  std::vector<Index> parent_;
  Index sets_;
};

DisjointSets components(const Matrix& points, double epsilon, int leaf_size, bool stop_when_one) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "cluster radius must be > 0");
  const SpatialIndex index(points, leaf_size);
  DisjointSets sets(points.rows());
  std::vector<Index> neighbors;
  for (Index i = 0; i < points.rows(); ++i) {
    index.radius_neighbors(i, epsilon, neighbors);
    for (Index j : neighbors) {
      if (j > i) sets.unite(i, j);
    }
    if (stop_when_one && sets.sets() == 1) break;
  }
  return sets;
}

}  // namespace

ClusterReport count_clusters(const Matrix& points, double epsilon, int leaf_size) {
  DisjointSets sets = components(points, epsilon, leaf_size, false);
  ClusterReport report;
  report.epsilon = epsilon;
  report.cluster_labels.assign(static_cast<std::size_t>(points.rows()), -1);
  std::vector<Index> label_of_root(static_cast<std::size_t>(points.rows()), -1);
  for (Index i = 0; i < points.rows(); ++i) {
    const Index root = sets.find(i);
    auto& label = label_of_root[static_cast<std::size_t>(root)];
    if (label < 0) label = report.n_clusters++;
    report.cluster_labels[static_cast<std::size_t>(i)] = label;
  }
  return report;
}

Index count_cluster_number(const Matrix& points, double epsilon, int leaf_size) {
  return components(points, epsilon, leaf_size, true).sets();
}

double epsilon_max(const Matrix& points, double beta, const std::vector<double>& grid) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::InvalidConfig, "beta must lie in (0, 1)");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) {
    throw Error(ErrorCode::InvalidConfig, "epsilon grid must be non-empty and ascending");
  }
  const double n = static_cast<double>(points.rows());
  double best = -1.0;
  // The cluster count is non-increasing in epsilon, so the scan can stop at
  // the first value that fails.
  for (double eps : grid) {
    const double ratio = static_cast<double>(count_cluster_number(points, eps)) / n;
    if (!(ratio > beta)) break;
    best = eps;
  }
  if (best < 0.0) {
    throw Error(ErrorCode::NoFeasibleEpsilon, "no grid radius keeps the cluster ratio above beta");
  }
  return best;
}

double epsilon_rule_of_thumb(Index dim, Index n_particles) {
  if (dim < 1 || n_particles < 1) {
    throw Error(ErrorCode::InvalidConfig, "rule of thumb needs dim >= 1 and n_particles >= 1");
  }
  return 0.75 * static_cast<double>(dim) * std::pow(static_cast<double>(n_particles), -0.25);
}

std::vector<double> default_epsilon_grid(const Matrix& points, int n_grid) {
  const double extent = (points.colwise().maxCoeff() - points.colwise().minCoeff()).maxCoeff();
  const double top = extent > 0.0 ? extent : 1.0;
  std::vector<double> grid(static_cast<std::size_t>(std::max(2, n_grid)));
  const double decades = 6.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(grid.size() - 1);
    grid[k] = top * std::pow(10.0, -decades * (1.0 - frac));
  }
  return grid;
}

double epsilon_auto(const Matrix& x_samples, const Matrix& y_samples, double beta) {
  if (x_samples.rows() != y_samples.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "automatic radius needs paired samples");
  }
  Matrix joint(x_samples.rows(), x_samples.cols() + y_samples.cols());
  joint << x_samples, y_samples;
  return epsilon_max(joint, beta, default_epsilon_grid(joint));
}

double resolve_epsilon(EpsilonMode mode, double fixed, const Matrix& x_samples,
                       const Matrix& y_samples) {
  switch (mode) {
    case EpsilonMode::Fixed:
      return fixed;
    case EpsilonMode::Auto:
      return epsilon_auto(x_samples, y_samples);
    case EpsilonMode::RuleOfThumb:
      return epsilon_rule_of_thumb(x_samples.cols(), x_samples.rows());
    case EpsilonMode::Crit: {
      if (x_samples.rows() != y_samples.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "knee radius needs paired samples");
      }
      Matrix joint(x_samples.rows(), x_samples.cols() + y_samples.cols());
      joint << x_samples, y_samples;
      return epsilon_crit(cluster_curve(joint, default_epsilon_grid(joint))).epsilon;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown radius mode");
}

std::vector<CurvePoint> cluster_curve(const Matrix& points, const std::vector<double>& grid) {
  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  for (double eps : grid) curve.push_back({eps, count_cluster_number(points, eps)});
  return curve;
}

KneeResult epsilon_crit(const std::vector<CurvePoint>& curve) {
  if (curve.size() < 5) throw Error(ErrorCode::CurveTooShort, "knee detection needs >= 5 points");
  std::vector<double> u(curve.size()), f(curve.size());
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (!(curve[k].epsilon > 0.0) || curve[k].n_clusters < 1) {
      throw Error(ErrorCode::InvalidConfig, "curve needs positive radii and cluster counts");
    }
    if (k > 0 && !(curve[k].epsilon > curve[k - 1].epsilon)) {
      throw Error(ErrorCode::InvalidConfig, "curve radii must be strictly ascending");
    }
    u[k] = std::log(curve[k].epsilon);
    f[k] = std::log(static_cast<double>(curve[k].n_clusters));
  }
  double best = 0.0;
  std::size_t best_k = curve.size() / 2;
  double scale = 0.0;
  for (std::size_t k = 1; k + 1 < curve.size(); ++k) {
    // The last merges (two clusters into one) happen between the extreme
    // samples and put a saturation kink at the log(1) = 0 floor that says
    // nothing about the transition; stencils reaching two or fewer clusters
    // are skipped.
    if (curve[k + 1].n_clusters <= 2) break;
    const double right = (f[k + 1] - f[k]) / (u[k + 1] - u[k]);
    const double left = (f[k] - f[k - 1]) / (u[k] - u[k - 1]);
    const double second = 2.0 * (right - left) / (u[k + 1] - u[k - 1]);
    scale = std::max({scale, std::abs(right), std::abs(left)});
    if (std::abs(second) > best) {
      best = std::abs(second);
      best_k = k;
    }
  }
  const bool flat = best <= 1e-9 * (1.0 + scale);
  if (flat) best_k = curve.size() / 2;
  return {curve[best_k].epsilon, flat};
}

}  // namespace ocd
