#include "ocd/conditional_expectation.hpp"
#include "ocd/dynamics.hpp"
#include "ocd/samplers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace ocd;
using oracle::column;

namespace {

EstimateBatch constant_estimate(const ParticleEnsemble& e, double eps, int threads = 1) {
  const SpatialIndex ix(e.x()), iy(e.y());
  return estimate_piecewise_constant(e, l2_cost_model(), ix, iy, eps, threads);
}

EstimateBatch linear_estimate(const ParticleEnsemble& e, double eps, double eps_hat, int threads = 1) {
  const SpatialIndex ix(e.x()), iy(e.y());
  return estimate_piecewise_linear(e, l2_cost_model(), ix, iy, eps, eps_hat, threads);
}

// Direct evaluation of the regression formula for one particle over a
// brute-force neighbor list.
Vector linear_reference(const Matrix& pos, const Matrix& grads, Index i, double eps, double eps_hat) {
  const auto nb = oracle::brute_neighbors(pos, row(pos, i), eps);
  const Index n = pos.cols();
  const double m = static_cast<double>(nb.size());
  Vector mp = Vector::Zero(n), mg = Vector::Zero(n);
  for (Index j : nb) {
    mp += pos.row(j).transpose();
    mg += grads.row(j).transpose();
  }
  mp /= m;
  mg /= m;
  SquareMatrix spp = SquareMatrix::Zero(n, n), spg = SquareMatrix::Zero(n, n);
  for (Index j : nb) {
    const Vector dp = pos.row(j).transpose() - mp;
    const Vector dg = grads.row(j).transpose() - mg;
    spp += dp * dp.transpose();
    spg += dp * dg.transpose();
  }
  spp /= m;
  spg /= m;
  const SquareMatrix a = spp + eps_hat * SquareMatrix::Identity(n, n);
  return mg + spg.transpose() * a.ldlt().solve(pos.row(i).transpose() - mp);
}

}  // namespace

TEST_CASE("singleton clusters freeze both estimators") {
  const ParticleEnsemble e(column({0.0, 1.0, 3.0}), column({5.0, -2.0, 0.5}));
  SolverConfig c;
  c.epsilon = 0.1;
  for (Estimator est : {Estimator::PiecewiseConstant, Estimator::PiecewiseLinear}) {
    c.estimator = est;
    c.epsilon_hat = est == Estimator::PiecewiseLinear ? 1e-3 : 0.0;
    const VelocityBatch v = ocd_velocity(e, l2_cost_model(), c);
    CHECK(v.v_x.isZero(0.0));
    CHECK(v.v_y.isZero(0.0));
  }
}

TEST_CASE("two-member cluster averages the partners") {
  // Particles 0 and 1 share an X-cluster; their partners are 1.0 and 3.0.
  const ParticleEnsemble e(column({0.0, 0.5, 10.0}), column({1.0, 3.0, 40.0}));
  const EstimateBatch k = constant_estimate(e, 1.0);
  CHECK(k.k_x(0, 0) == doctest::Approx(2.0 * (0.0 - 2.0)));
  const double v0 = -2.0 * (e.x()(0, 0) - e.y()(0, 0)) + k.k_x(0, 0);
  CHECK(v0 == doctest::Approx(-2.0));
}

TEST_CASE("one global cluster reduces to the global mean") {
  std::mt19937_64 rng(5);
  const Matrix x = sample_standard_normal(50, 2, 0.0, rng);
  const Matrix y = sample_standard_normal(50, 2, 1.0, rng);
  const ParticleEnsemble e(x, y);
  const EstimateBatch k = constant_estimate(e, 1e6);
  const Eigen::RowVectorXd ybar = y.colwise().mean(), xbar = x.colwise().mean();
  for (Index i = 0; i < 50; ++i) {
    for (Index a = 0; a < 2; ++a) {
      CHECK(k.k_x(i, a) == doctest::Approx(2.0 * (x(i, a) - ybar(a))));
      CHECK(k.k_y(i, a) == doctest::Approx(2.0 * (y(i, a) - xbar(a))));
    }
  }
}

TEST_CASE("linear estimator recovers affine data exactly") {
  // Y = 2 X + 1 on X in {0, 1, 2}.
  const ParticleEnsemble e(column({0.0, 1.0, 2.0}), column({1.0, 3.0, 5.0}));
  const EstimateBatch k = linear_estimate(e, 10.0, 0.0);
  for (Index i = 0; i < 3; ++i) {
    const double xi = e.x()(i, 0);
    CHECK(k.k_x(i, 0) == doctest::Approx(2.0 * (xi - (2.0 * xi + 1.0))).epsilon(1e-12));
  }
}

TEST_CASE("singleton cluster with ridge gives the diagonal gradient") {
  const ParticleEnsemble e(column({0.0, 1.0}), column({4.0, -3.0}));
  const EstimateBatch k = linear_estimate(e, 0.5, 1e-2);
  CHECK(k.k_x(0, 0) == 2.0 * (0.0 - 4.0));
  CHECK(k.k_y(1, 0) == 2.0 * (-3.0 - 1.0));
}

TEST_CASE("large ridge removes the linear term") {
  std::mt19937_64 rng(6);
  const Matrix x = sample_standard_normal(40, 1, 0.0, rng);
  const Matrix y = sample_standard_normal(40, 1, 0.0, rng);
  const ParticleEnsemble e(x, y);
  const EstimateBatch k = linear_estimate(e, 1e6, 1e12);
  const double mean_g = 2.0 * (x.mean() - y.mean());
  for (Index i = 0; i < 40; ++i) CHECK(k.k_x(i, 0) == doctest::Approx(mean_g).epsilon(1e-9));
}

TEST_CASE("zero mean velocity inside separated clusters") {
  // Three well separated groups in X; every member of a group has the same
  // neighbor set, so clusters partition the particles.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> jitter(0.0, 0.1);
  Matrix x(30, 2), y(30, 2);
  for (Index i = 0; i < 30; ++i) {
    const double centre = 10.0 * static_cast<double>(i % 3);
    x.row(i) << centre + jitter(rng), jitter(rng);
    y.row(i) << 5.0 * jitter(rng), 3.0 * jitter(rng) - centre;
  }
  const ParticleEnsemble e(x, y);
  const EstimateBatch k = constant_estimate(e, 1.0);
  for (Index group = 0; group < 3; ++group) {
    Eigen::RowVector2d sum = Eigen::RowVector2d::Zero();
    double scale = 0.0;
    for (Index i = group; i < 30; i += 3) {
      const Eigen::RowVector2d v = -2.0 * (x.row(i) - y.row(i)) + k.k_x.row(i);
      sum += v;
      scale += v.norm();
    }
    CHECK(sum.norm() <= 1e-13 * (1.0 + scale));
  }
}

TEST_CASE("estimators match direct evaluation on random ensembles") {
  std::mt19937_64 rng(21);
  for (Index dim : {1, 2, 3, 5}) {
    const Matrix x = sample_standard_normal(300, dim, 0.0, rng);
    Matrix y = sample_standard_normal(300, dim, 0.5, rng);
    y.leftCols(1) += 0.7 * x.leftCols(1);
    const ParticleEnsemble e(x, y);
    const double eps = 0.5 * std::sqrt(static_cast<double>(dim));
    const Matrix gx = 2.0 * (x - y), gy = 2.0 * (y - x);

    const EstimateBatch lin = linear_estimate(e, eps, 1e-3);
    const EstimateBatch con = constant_estimate(e, eps);
    for (Index i = 0; i < 300; ++i) {
      const Vector rx = linear_reference(x, gx, i, eps, 1e-3);
      const Vector ry = linear_reference(y, gy, i, eps, 1e-3);
      REQUIRE((lin.k_x.row(i).transpose() - rx).norm() <= 1e-9 * (1.0 + rx.norm()));
      REQUIRE((lin.k_y.row(i).transpose() - ry).norm() <= 1e-9 * (1.0 + ry.norm()));

      Vector cx = Vector::Zero(dim);
      const auto nb = oracle::brute_neighbors(x, row(x, i), eps);
      for (Index j : nb) cx += 2.0 * (x.row(i) - y.row(j)).transpose();
      cx /= static_cast<double>(nb.size());
      REQUIRE((con.k_x.row(i).transpose() - cx).norm() <= 1e-12 * (1.0 + cx.norm()));
    }
  }
}

TEST_CASE("estimates are permutation equivariant and thread independent") {
  std::mt19937_64 rng(33);
  const Matrix x = sample_standard_normal(200, 2, 0.0, rng);
  const Matrix y = sample_standard_normal(200, 2, 1.0, rng);
  std::vector<Index> perm(200);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix xp(200, 2), yp(200, 2);
  for (Index i = 0; i < 200; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp.row(i) = y.row(perm[static_cast<std::size_t>(i)]);
  }
  const ParticleEnsemble e(x, y), ep(xp, yp);
  const EstimateBatch a = linear_estimate(e, 0.4, 0.0), b = linear_estimate(ep, 0.4, 0.0);
  const EstimateBatch c = constant_estimate(e, 0.4), d = constant_estimate(ep, 0.4);
  for (Index i = 0; i < 200; ++i) {
    const Index src = perm[static_cast<std::size_t>(i)];
    CHECK((b.k_x.row(i) - a.k_x.row(src)).norm() <= 1e-10);
    CHECK((b.k_y.row(i) - a.k_y.row(src)).norm() <= 1e-10);
    CHECK((d.k_x.row(i) - c.k_x.row(src)).norm() <= 1e-12);
  }

  const EstimateBatch t1 = linear_estimate(e, 0.4, 0.0, 1), t3 = linear_estimate(e, 0.4, 0.0, 3);
  CHECK(t1.k_x == t3.k_x);
  CHECK(t1.k_y == t3.k_y);
  const EstimateBatch u1 = constant_estimate(e, 0.4, 1), u4 = constant_estimate(e, 0.4, 4);
  CHECK(u1.k_x == u4.k_x);
}

TEST_CASE("ridge keeps degenerate clusters finite") {
  // Repeated points and collinear clusters make the covariance singular.
  Matrix x(60, 2), y(60, 2);
  for (Index i = 0; i < 60; ++i) {
    x.row(i) << static_cast<double>(i / 10), 0.0;
    y.row(i) << static_cast<double>(i % 7), static_cast<double>(i % 7);
  }
  const ParticleEnsemble e(x, y);
  for (double eps_hat : {0.0, 1e-6, 1.0}) {
    const EstimateBatch k = linear_estimate(e, 1.5, eps_hat);
    CHECK(k.k_x.allFinite());
    CHECK(k.k_y.allFinite());
  }
}
