#pragma once

#include "ocd/cost.hpp"
#include "ocd/ensemble.hpp"

namespace ocd {

/// Sample mean and population (1/N) covariance of one marginal.
struct MomentSummary {
  Vector mean;
  SquareMatrix covariance;
};

MomentSummary moments(const Matrix& samples);

/// Mean cost (1/N) sum_i c(X_i, Y_i) of the current pairing.
double transport_cost(const ParticleEnsemble& ensemble, const CostModel& cost);

/// Centered cross-correlation (1/N) sum_i (X_i - mean X)(Y_i - mean Y)^T.
/// Throws DegenerateEnsemble for fewer than two particles.
SquareMatrix cross_correlation(const ParticleEnsemble& ensemble);

/// Smallest eigenvalue of the symmetric part (J + J^T) / 2.
double spd_margin(const SquareMatrix& j);

/// max(|d mean| / (1 + |mean_ref|), |d cov|_F / (1 + |cov_ref|_F)).
/// Throws DimensionMismatch when the summaries disagree in size.
double marginal_drift(const MomentSummary& current, const MomentSummary& reference);

}  // namespace ocd
