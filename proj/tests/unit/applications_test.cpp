#include "ocd/applications.hpp"
#include "ocd/samplers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ocd;
using oracle::column;
using oracle::error_code_of;

namespace {

ImageSamples gradient_image(Index w, Index h, double phase) {
  ImageSamples img{Matrix(w * h, 3), w, h};
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double u = (static_cast<double>(c) + 0.5) / static_cast<double>(w);
      const double v = (static_cast<double>(r) + 0.5) / static_cast<double>(h);
      img.pixels.row(r * w + c) << u, v, 0.5 + 0.4 * std::sin(6.0 * u + phase);
    }
  }
  return img;
}

ImageSamples flat_image(Index w, Index h, double value) {
  return {Matrix::Constant(w * h, 3, value), w, h};
}

}  // namespace

TEST_CASE("map evaluation at anchors and by symmetry") {
  const PairedMap map{oracle::from_rows({{0, 0}, {1, 0}, {0, 1}, {1, 1}}),
                      oracle::from_rows({{1, 2}, {3, 4}, {5, 6}, {7, 8}}), 4};
  const Matrix hit = evaluate_map(map, oracle::from_rows({{1, 0}}));
  CHECK(hit(0, 0) == 3.0);
  CHECK(hit(0, 1) == 4.0);
  // The centre is equidistant from all four anchors.
  const Matrix centre = evaluate_map(map, oracle::from_rows({{0.5, 0.5}}));
  CHECK(centre(0, 0) == doctest::Approx(4.0));
  CHECK(centre(0, 1) == doctest::Approx(5.0));

  CHECK(error_code_of([&] { evaluate_map(map, Matrix(0, 2)); }) == ErrorCode::EmptyQuery);
  CHECK(error_code_of([&] { evaluate_map(map, Matrix::Zero(1, 3)); }) == ErrorCode::DimensionMismatch);
  const PairedMap bad{map.x_anchors, map.y_anchors, 5};
  CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("map evaluation is invariant to anchor order") {
  std::mt19937_64 rng(1);
  const Matrix x = sample_standard_normal(100, 2, 0.0, rng);
  const Matrix y = sample_standard_normal(100, 2, 0.0, rng);
  Matrix xy(100, 4);
  xy << x, y;
  const Matrix shuffled = shuffle_rows(xy, rng);
  const Matrix q = sample_standard_normal(20, 2, 0.0, rng);
  const Matrix a = evaluate_map({x, y, 8}, q);
  const Matrix b = evaluate_map({shuffled.leftCols(2), shuffled.rightCols(2), 8}, q);
  CHECK((a - b).norm() <= 1e-12);
}

TEST_CASE("map from exact softmax pairs generalizes") {
  std::mt19937_64 rng(2);
  const Matrix x = sample_standard_normal(5000, 2, 0.0, rng);
  const PairedMap map{x, softmax_map(x), 8};
  const Matrix held_out = sample_standard_normal(2000, 2, 0.0, rng);
  const Matrix truth = softmax_map(held_out);
  const Matrix predicted = evaluate_map(map, held_out);
  const double err = (predicted - truth).rowwise().squaredNorm().mean();
  const double d2 = (truth - held_out).rowwise().squaredNorm().mean();
  CHECK(err <= 0.05 * d2);
  CHECK(softmax_map(oracle::from_rows({{0.0, 0.0}}))(0, 0) == 0.5);
}

TEST_CASE("color transfer with alpha zero returns the source") {
  const ImageSamples src = gradient_image(12, 10, 0.0), dst = gradient_image(12, 10, 2.0);
  SolverConfig c;
  c.epsilon = 0.1;
  const ImageSamples out = color_transfer(src, dst, c, 0.0, 50);
  CHECK(out.pixels == src.pixels);
  CHECK(out.width == 12);
  CHECK(error_code_of([&] { color_transfer(src, dst, c, 1.5, 50); }) == ErrorCode::InvalidConfig);
  CHECK(error_code_of([&] { color_transfer(src, dst, c, 0.5, 500); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("color transfer of an image onto itself stays close") {
  const ImageSamples src = gradient_image(20, 20, 0.3);
  SolverConfig c;
  c.dt = 0.05;
  c.estimator = Estimator::PiecewiseConstant;
  const ImageSamples out = color_transfer(src, src, c, 1.0, 300, EpsilonMode::Auto);
  const Eigen::RowVector3d dev = (out.pixels - src.pixels).cwiseAbs().colwise().mean();
  CHECK(dev.maxCoeff() < 0.05);
  CHECK(out.pixels.minCoeff() >= 0.0);
  CHECK(out.pixels.maxCoeff() <= 1.0);
}

TEST_CASE("black onto white gives white") {
  SolverConfig c;
  c.epsilon = 0.1;
  const ImageSamples out = color_transfer(flat_image(8, 8, 0.0), flat_image(8, 8, 1.0), c, 1.0, 16);
  CHECK(out.pixels == Matrix::Constant(64, 3, 1.0));
}

TEST_CASE("distance matrix on synthetic datasets") {
  std::mt19937_64 rng(3);
  const Matrix a = sample_standard_normal(300, 1, 0.0, rng);
  const Matrix b = sample_standard_normal(300, 1, 1.0, rng);
  const Matrix far = sample_standard_normal(300, 1, 6.0, rng);
  SolverConfig c;
  c.epsilon = 0.3;

  const DistanceMatrixResult same = distance_matrix({a, shuffle_rows(a, rng)}, c);
  CHECK(same.distances(0, 1) <= c.gamma_abs);

  const DistanceMatrixResult r = distance_matrix({a, b, far, a}, c, EpsilonMode::Fixed);
  CHECK(r.failures.empty());
  CHECK(r.distances(0, 1) == doctest::Approx(1.0).epsilon(0.15));
  for (Index i = 0; i < 4; ++i) {
    CHECK(r.distances(i, i) == 0.0);
    for (Index j = 0; j < 4; ++j) {
      CHECK(r.distances(i, j) == r.distances(j, i));
      CHECK(r.distances(i, j) >= 0.0);
    }
  }
  // Dataset 3 is dataset 0: each finds the other as its nearest neighbor.
  auto nearest = [&](Index i) {
    Index best = -1;
    for (Index j = 0; j < 4; ++j) {
      if (j != i && (best < 0 || r.distances(i, j) < r.distances(i, best))) best = j;
    }
    return best;
  };
  CHECK(nearest(0) == 3);
  CHECK(nearest(3) == 0);
}

TEST_CASE("distance matrix records failing pairs") {
  std::mt19937_64 rng(4);
  SolverConfig c;
  c.epsilon = 0.3;
  c.dt = 1e300;  // overflows on the first step
  const DistanceMatrixResult r =
      distance_matrix({sample_standard_normal(20, 1, 0.0, rng), sample_standard_normal(20, 1, 3.0, rng)}, c);
  CHECK(std::isnan(r.distances(0, 1)));
  CHECK_FALSE(r.failures.empty());
  CHECK(r.distances(0, 0) == 0.0);
}

TEST_CASE("image to point samples") {
  SquareMatrix one = SquareMatrix::Zero(4, 5);
  one(2, 3) = 0.7;
  const Matrix s = image_to_point_samples(one, 50, 1);
  for (Index i = 0; i < 50; ++i) {
    CHECK(s(i, 0) == (3 + 0.5) / 5.0);
    CHECK(s(i, 1) == (2 + 0.5) / 4.0);
  }

  const Index n = 20000;
  const Matrix u = image_to_point_samples(SquareMatrix::Constant(16, 16, 1.0), n, 2);
  // Coordinates are uniform on 16 cell centres: variance (16^2 - 1) / (12 * 16^2).
  const double sd = std::sqrt((256.0 - 1.0) / (12.0 * 256.0) / static_cast<double>(n));
  CHECK(std::abs(u.col(0).mean() - 0.5) <= 3.0 * sd);
  CHECK(std::abs(u.col(1).mean() - 0.5) <= 3.0 * sd);

  SquareMatrix two = SquareMatrix::Zero(3, 3);
  two(0, 0) = two(2, 2) = 1.0;
  const Matrix t = image_to_point_samples(two, n, 3);
  const double left = static_cast<double>((t.col(0).array() < 0.5).count()) / static_cast<double>(n);
  CHECK(std::abs(left - 0.5) <= 3.0 * std::sqrt(0.25 / static_cast<double>(n)));

  CHECK(error_code_of([] { image_to_point_samples(SquareMatrix::Zero(3, 3), 5, 0); }) == ErrorCode::AllZeroImage);
  CHECK(error_code_of([] { image_to_point_samples(-SquareMatrix::Ones(3, 3), 5, 0); }) == ErrorCode::NonFiniteInput);
}
