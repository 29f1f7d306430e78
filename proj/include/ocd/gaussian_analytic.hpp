#pragma once

#include "ocd/types.hpp"

#include <vector>

namespace ocd {

/// Covariances of two centered Gaussian marginals. Both must be symmetric
/// positive definite (SingularCovariance otherwise, DimensionMismatch when the
/// sizes differ).
class GaussianPair {
 public:
  GaussianPair(SquareMatrix sigma_mu, SquareMatrix sigma_nu);

  const SquareMatrix& sigma_mu() const noexcept { return sigma_mu_; }
  const SquareMatrix& sigma_nu() const noexcept { return sigma_nu_; }
  const SquareMatrix& sigma_mu_inverse() const noexcept { return mu_inv_; }
  const SquareMatrix& sigma_nu_inverse() const noexcept { return nu_inv_; }
  Index dim() const noexcept { return sigma_mu_.rows(); }

 private:
  SquareMatrix sigma_mu_;
  SquareMatrix sigma_nu_;
  SquareMatrix mu_inv_;
  SquareMatrix nu_inv_;
};

/// Right-hand side of the cross-covariance Riccati equation:
/// S_mu + S_nu - J^T S_mu^{-1} J - J S_nu^{-1} J^T.
SquareMatrix riccati_rhs(const SquareMatrix& j, const GaussianPair& pair);

struct RiccatiSample {
  double time = 0.0;
  SquareMatrix j;
};

/// Classical RK4 from j0 up to t_final. The last step is shortened to land on
/// t_final exactly. Throws NonFiniteState on divergence.
std::vector<RiccatiSample> integrate_riccati(const GaussianPair& pair, const SquareMatrix& j0,
                                             double dt, double t_final);

/// kappa(t) = tanh(c t), c = (s_mu^2 + s_nu^2) / (s_mu s_nu): the solution of the
/// 1D correlation ODE started at zero.
double kappa_closed_form(double sigma_mu, double sigma_nu, double t);

struct GaussianOptimum {
  SquareMatrix j_opt;  ///< E[X (T X)^T] for the optimal linear map T
  double d2 = 0.0;     ///< squared Wasserstein distance (Bures)
};

GaussianOptimum gaussian_ot_optimum(const GaussianPair& pair);

/// Symmetric square root through the eigendecomposition. Negative
/// eigenvalues from round-off are clipped to zero.
SquareMatrix spd_sqrt(const SquareMatrix& a);

}  // namespace ocd
