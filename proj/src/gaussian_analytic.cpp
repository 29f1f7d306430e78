#include "ocd/gaussian_analytic.hpp"

#include "ocd/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ocd {

namespace {

SquareMatrix checked_inverse(const SquareMatrix& s, const char* name) {
  if (!all_finite(s) || !s.isApprox(s.transpose(), 1e-12)) {
    throw Error(ErrorCode::SingularCovariance, std::string(name) + " must be finite and symmetric");
  }
  Eigen::LLT<SquareMatrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularCovariance, std::string(name) + " is not positive definite");
  }
  return llt.solve(SquareMatrix::Identity(s.rows(), s.cols()));
}

}  // namespace

GaussianPair::GaussianPair(SquareMatrix sigma_mu, SquareMatrix sigma_nu)
    : sigma_mu_(std::move(sigma_mu)), sigma_nu_(std::move(sigma_nu)) {
  if (sigma_mu_.rows() != sigma_mu_.cols() || sigma_nu_.rows() != sigma_nu_.cols() ||
      sigma_mu_.rows() != sigma_nu_.rows() || sigma_mu_.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "covariances must be square and of equal size");
  }
  mu_inv_ = checked_inverse(sigma_mu_, "sigma_mu");
  nu_inv_ = checked_inverse(sigma_nu_, "sigma_nu");
}

SquareMatrix riccati_rhs(const SquareMatrix& j, const GaussianPair& pair) {
  if (j.rows() != pair.dim() || j.cols() != pair.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "J does not match the covariances");
  }
  return pair.sigma_mu() + pair.sigma_nu() - j.transpose() * pair.sigma_mu_inverse() * j -
         j * pair.sigma_nu_inverse() * j.transpose();
}

std::vector<RiccatiSample> integrate_riccati(const GaussianPair& pair, const SquareMatrix& j0,
                                             double dt, double t_final) {
  if (!(dt > 0.0) || !(t_final >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "integrate_riccati needs dt > 0 and t_final >= 0");
  }
  std::vector<RiccatiSample> out;
  out.push_back({0.0, j0});
  SquareMatrix j = j0;
  double t = 0.0;
  const auto steps = static_cast<std::int64_t>(std::ceil(t_final / dt - 1e-9));
  for (std::int64_t s = 0; s < steps; ++s) {
    const double h = std::min(dt, t_final - t);
    const SquareMatrix k1 = riccati_rhs(j, pair);
    const SquareMatrix k2 = riccati_rhs(j + 0.5 * h * k1, pair);
    const SquareMatrix k3 = riccati_rhs(j + 0.5 * h * k2, pair);
    const SquareMatrix k4 = riccati_rhs(j + h * k3, pair);
    j += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = s + 1 == steps ? t_final : t + h;
    if (!all_finite(j)) {
      throw Error(ErrorCode::NonFiniteState, "Riccati trajectory diverged at t = " + std::to_string(t));
    }
    out.push_back({t, j});
  }
  return out;
}

double kappa_closed_form(double sigma_mu, double sigma_nu, double t) {
  const double c = (sigma_mu * sigma_mu + sigma_nu * sigma_nu) / (sigma_mu * sigma_nu);
  return std::tanh(c * t);
}

SquareMatrix spd_sqrt(const SquareMatrix& a) {
  const SquareMatrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<SquareMatrix> eig(sym);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

GaussianOptimum gaussian_ot_optimum(const GaussianPair& pair) {
  const SquareMatrix mu_half = spd_sqrt(pair.sigma_mu());
  const SquareMatrix middle = spd_sqrt(mu_half * pair.sigma_nu() * mu_half);
  const SquareMatrix mu_half_inv = mu_half.llt().solve(SquareMatrix::Identity(pair.dim(), pair.dim()));
  GaussianOptimum out;
  // T = S_mu^{-1/2} M S_mu^{-1/2} and J = S_mu T^T = S_mu^{1/2} M S_mu^{-1/2}.
  out.j_opt = mu_half * middle * mu_half_inv;
  out.d2 = pair.sigma_mu().trace() + pair.sigma_nu().trace() - 2.0 * middle.trace();
  return out;
}

}  // namespace ocd
