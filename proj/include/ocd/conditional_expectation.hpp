#pragma once

#include "ocd/cost.hpp"
#include "ocd/ensemble.hpp"
#include "ocd/spatial_index.hpp"

namespace ocd {

/// Per-particle estimates of E[grad_x c | X = X_i] (k_x) and
/// E[grad_y c | Y = Y_i] (k_y).
struct EstimateBatch {
  Matrix k_x;
  Matrix k_y;
};

/// Cluster averages: k_x[i] is the mean of grad_x c(X_i, Y_j) over the
/// X-neighbors j of particle i (X_i held fixed), and symmetrically for k_y.
/// The indexes must be built on the current x and y samples.
EstimateBatch estimate_piecewise_constant(const ParticleEnsemble& ensemble, const CostModel& cost,
                                          const SpatialIndex& idx_x, const SpatialIndex& idx_y,
                                          double epsilon, int threads = 1);

/// Cluster-local ridge regression of the diagonal-pair gradients on position.
///
/// Over the X-neighbors j of particle i, with g_j = grad_x c(X_j, Y_j):
///   m_X = mean X_j,  m_g = mean g_j,
///   S_XX = cov(X_j),  S_Xg = cov(X_j, g_j)              (1/|cluster| normalization)
///   k_x[i] = m_g + S_Xg^T (S_XX + eps_hat I)^{-1} (X_i - m_X)
/// and the mirror image over Y-neighbors for k_y with grad_y c. For the
/// squared Euclidean cost this is 2 (X_i - Ehat[Y | X_i]) with Ehat the local
/// least-squares fit of Y on X.
///
/// The solve uses a Cholesky factorization. When it fails or its reciprocal
/// condition estimate drops below 1e-12, it is retried once with
/// eps_hat = 1e-8 * trace(S_XX) / n + 1e-12; a failure after that throws
/// SingularSystem. Non-finite output throws NonFiniteResult.
EstimateBatch estimate_piecewise_linear(const ParticleEnsemble& ensemble, const CostModel& cost,
                                        const SpatialIndex& idx_x, const SpatialIndex& idx_y,
                                        double epsilon, double epsilon_hat, int threads = 1);

}  // namespace ocd
