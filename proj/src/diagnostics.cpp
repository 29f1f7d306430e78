#include "ocd/diagnostics.hpp"

#include "ocd/error.hpp"

namespace ocd {

MomentSummary moments(const Matrix& samples) {
  const Index n_rows = samples.rows();
  if (n_rows < 1) throw Error(ErrorCode::EmptyInput, "moments of an empty sample matrix");
  MomentSummary out;
  out.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - out.mean.transpose();
  out.covariance = (centered.transpose() * centered) / static_cast<double>(n_rows);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

double transport_cost(const ParticleEnsemble& ensemble, const CostModel& cost) {
  double total = 0.0;
  for (Index i = 0; i < ensemble.size(); ++i) {
    total += cost.cost(row(ensemble.x(), i), row(ensemble.y(), i));
  }
  return total / static_cast<double>(ensemble.size());
}

SquareMatrix cross_correlation(const ParticleEnsemble& ensemble) {
  if (ensemble.size() < 2) {
    throw Error(ErrorCode::DegenerateEnsemble, "cross-correlation needs at least two particles");
  }
  const Vector mx = ensemble.x().colwise().mean().transpose();
  const Vector my = ensemble.y().colwise().mean().transpose();
  const Matrix cx = ensemble.x().rowwise() - mx.transpose();
  const Matrix cy = ensemble.y().rowwise() - my.transpose();
  return (cx.transpose() * cy) / static_cast<double>(ensemble.size());
}

double spd_margin(const SquareMatrix& j) {
  const SquareMatrix sym = 0.5 * (j + j.transpose());
  Eigen::SelfAdjointEigenSolver<SquareMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double marginal_drift(const MomentSummary& current, const MomentSummary& reference) {
  if (current.mean.size() != reference.mean.size() ||
      current.covariance.rows() != reference.covariance.rows() ||
      current.covariance.cols() != reference.covariance.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "moment summaries have different dimensions");
  }
  const double mean_drift =
      (current.mean - reference.mean).norm() / (1.0 + reference.mean.norm());
  const double cov_drift = (current.covariance - reference.covariance).norm() /
                           (1.0 + reference.covariance.norm());
  return std::max(mean_drift, cov_drift);
}

}  // namespace ocd
