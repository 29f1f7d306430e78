#include "ocd/applications.hpp"

#include "ocd/cost.hpp"
#include "ocd/dynamics.hpp"
#include "ocd/error.hpp"
#include "ocd/parallel.hpp"
#include "ocd/samplers.hpp"
#include "ocd/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ocd {

void PairedMap::validate() const {
  if (x_anchors.rows() != y_anchors.rows() || x_anchors.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "anchors must be non-empty and paired row by row");
  }
  if (!all_finite(x_anchors) || !all_finite(y_anchors)) {
    throw Error(ErrorCode::NonFiniteInput, "anchors contain NaN or Inf");
  }
  if (k_neighbors < 1 || k_neighbors > x_anchors.rows()) {
    throw Error(ErrorCode::InvalidConfig, "k_neighbors must lie in [1, N]");
  }
}

Matrix evaluate_map(const PairedMap& map, const Matrix& query) {
  map.validate();
  if (query.rows() == 0) throw Error(ErrorCode::EmptyQuery, "no query points");
  if (query.cols() != map.x_anchors.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension differs from the anchors");
  }
  if (!all_finite(query)) throw Error(ErrorCode::NonFiniteInput, "query contains NaN or Inf");

  const SpatialIndex index(map.x_anchors);
  Matrix out(query.rows(), map.y_anchors.cols());
  std::vector<Index> hits;
  for (Index q = 0; q < query.rows(); ++q) {
    const auto p = row(query, q);
    index.radius_query(p, 0.0, hits);
    if (!hits.empty()) {
      out.row(q).setZero();
      for (Index h : hits) out.row(q) += map.y_anchors.row(h);
      out.row(q) /= static_cast<double>(hits.size());
      continue;
    }
    const auto nearest = index.k_nearest(p, map.k_neighbors);
    double total = 0.0;
    out.row(q).setZero();
    for (const auto& [j, d2] : nearest) {
      const double w = 1.0 / std::sqrt(d2);
      out.row(q) += w * map.y_anchors.row(j);
      total += w;
    }
    out.row(q) /= total;
  }
  return out;
}

namespace {

Matrix subsample_rows(const Matrix& m, Index n, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < n; ++i) {
    std::uniform_int_distribution<Index> pick(i, m.rows() - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }
  Matrix out(n, m.cols());
  for (Index i = 0; i < n; ++i) out.row(i) = m.row(order[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

ImageSamples color_transfer(const ImageSamples& source, const ImageSamples& target,
                            const SolverConfig& config, double alpha, Index n_train,
                            EpsilonMode mode) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1]");
  if (source.pixels.cols() != 3 || target.pixels.cols() != 3) {
    throw Error(ErrorCode::DimensionMismatch, "images must have three channels");
  }
  if (n_train < 1 || n_train > std::min(source.pixels.rows(), target.pixels.rows())) {
    throw Error(ErrorCode::InvalidConfig, "n_train must lie in [1, min pixel count]");
  }
  ImageSamples out = source;
  if (alpha == 0.0) return out;

  Rng rng(config.seed);
  Matrix x = subsample_rows(source.pixels, n_train, rng);
  Matrix y = subsample_rows(target.pixels, n_train, rng);
  SolverConfig solve = config;
  solve.epsilon = resolve_epsilon(mode, config.epsilon, x, y);
  solve.record_diagnostics = false;
  const RunResult result = run(ParticleEnsemble(std::move(x), std::move(y)), l2_cost_model(), solve);

  PairedMap map{result.final_ensemble.x(), result.final_ensemble.y(),
                std::min<Index>(8, n_train)};
  const Matrix mapped = evaluate_map(map, source.pixels);
  out.pixels = ((1.0 - alpha) * source.pixels + alpha * mapped).cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

DistanceMatrixResult distance_matrix(const std::vector<Matrix>& datasets,
                                     const SolverConfig& config, EpsilonMode mode) {
  if (datasets.size() < 2) throw Error(ErrorCode::EmptyInput, "distance matrix needs >= 2 datasets");
  for (const Matrix& d : datasets) {
    if (d.cols() != datasets.front().cols()) {
      throw Error(ErrorCode::DimensionMismatch, "datasets differ in dimension");
    }
    if (d.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty dataset");
  }
  const auto m = static_cast<Index>(datasets.size());
  std::vector<std::pair<Index, Index>> jobs;
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      if (a != b) jobs.emplace_back(a, b);
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> value(jobs.size(), nan);
  std::vector<std::string> error(jobs.size());

  parallel_for(static_cast<Index>(jobs.size()), config.threads, [&](Index begin, Index end) {
    for (Index k = begin; k < end; ++k) {
      const auto [a, b] = jobs[static_cast<std::size_t>(k)];
      const Matrix& xa = datasets[static_cast<std::size_t>(a)];
      const Matrix& yb = datasets[static_cast<std::size_t>(b)];
      const Index n = std::min(xa.rows(), yb.rows());
      try {
        Matrix x = xa.topRows(n);
        Matrix y = yb.topRows(n);
        SolverConfig solve = config;
        solve.threads = 1;
        solve.record_diagnostics = false;
        solve.epsilon = resolve_epsilon(mode, config.epsilon, x, y);
        value[static_cast<std::size_t>(k)] =
            run(ParticleEnsemble(std::move(x), std::move(y)), l2_cost_model(), solve).final_cost;
      } catch (const Error& e) {
        error[static_cast<std::size_t>(k)] =
            "pair (" + std::to_string(a) + ", " + std::to_string(b) + "): " + e.what();
      }
    }
  });

  DistanceMatrixResult result;
  result.distances = SquareMatrix::Zero(m, m);
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto [a, b] = jobs[k];
    if (!error[k].empty()) result.failures.push_back(error[k]);
    if (a > b) continue;
    const std::size_t mirror = static_cast<std::size_t>(
        std::find(jobs.begin(), jobs.end(), std::make_pair(b, a)) - jobs.begin());
    const double entry = 0.5 * (value[k] + value[mirror]);  // NaN if either failed
    result.distances(a, b) = entry;
    result.distances(b, a) = entry;
  }
  return result;
}

Matrix image_to_point_samples(const SquareMatrix& image, Index n_samples, std::uint64_t seed) {
  if (image.size() == 0) throw Error(ErrorCode::EmptyInput, "empty image");
  if (!all_finite(image) || image.minCoeff() < 0.0) {
    throw Error(ErrorCode::NonFiniteInput, "intensities must be finite and non-negative");
  }
  if (!(image.maxCoeff() > 0.0)) throw Error(ErrorCode::AllZeroImage, "image has no mass");
  const Index height = image.rows();
  const Index width = image.cols();
  std::vector<double> weights(static_cast<std::size_t>(image.size()));
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) weights[static_cast<std::size_t>(r * width + c)] = image(r, c);
  }
  std::discrete_distribution<Index> pick(weights.begin(), weights.end());
  Rng rng(seed);
  Matrix out(n_samples, 2);
  for (Index i = 0; i < n_samples; ++i) {
    const Index p = pick(rng);
    out(i, 0) = (static_cast<double>(p % width) + 0.5) / static_cast<double>(width);
    out(i, 1) = (static_cast<double>(p / width) + 0.5) / static_cast<double>(height);
  }
  return out;
}

}  // namespace ocd
