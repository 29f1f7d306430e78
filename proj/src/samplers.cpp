#include "ocd/samplers.hpp"

#include "ocd/error.hpp"

#include <cmath>
#include <numbers>

namespace ocd {

Matrix sample_normal(Index n, const Vector& mean, const SquareMatrix& cov, Rng& rng) {
  const Index dim = mean.size();
  if (cov.rows() != dim || cov.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "covariance does not match the mean");
  }
  Eigen::LLT<SquareMatrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularCovariance, "covariance is not positive definite");
  }
  const SquareMatrix factor = llt.matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, dim);
  Vector z(dim);
  for (Index i = 0; i < n; ++i) {
    for (Index a = 0; a < dim; ++a) z[a] = normal(rng);
    out.row(i) = (mean + factor * z).transpose();
  }
  return out;
}

Matrix sample_standard_normal(Index n, Index dim, double shift, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, dim);
  for (Index i = 0; i < n; ++i) {
    for (Index a = 0; a < dim; ++a) out(i, a) = normal(rng) + shift;
  }
  return out;
}

Matrix softmax_map(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double top = x.row(i).maxCoeff();
    double total = 0.0;
    for (Index a = 0; a < x.cols(); ++a) {
      out(i, a) = std::exp(x(i, a) - top);
      total += out(i, a);
    }
    out.row(i) /= total;
  }
  return out;
}

Matrix sample_softmax_pushforward(Index n, Rng& rng) {
  return softmax_map(sample_standard_normal(n, 2, 0.0, rng));
}

Matrix sample_banana(Index n, Rng& rng) {
  Matrix z = sample_standard_normal(n, 2, 0.0, rng);
  for (Index i = 0; i < n; ++i) z(i, 1) += kBananaCurvature * (z(i, 0) * z(i, 0) - 1.0);
  return z;
}

Matrix sample_funnel(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double v = kFunnelScale * normal(rng);
    out(i, 0) = v / kFunnelScale;
    out(i, 1) = std::exp(0.5 * v) * normal(rng);
  }
  return out;
}

Matrix sample_swiss_roll(Index n, Rng& rng) {
  std::uniform_real_distribution<double> angle(1.5 * std::numbers::pi, 4.5 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, kSwissRollNoise);
  Matrix out(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double t = angle(rng);
    out(i, 0) = t * std::cos(t) / 10.0 + noise(rng);
    out(i, 1) = t * std::sin(t) / 10.0 + noise(rng);
  }
  return out;
}

Matrix shuffle_rows(const Matrix& m, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  for (Index i = m.rows() - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(order[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace ocd
