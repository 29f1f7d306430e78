#pragma once

#include "ocd/config.hpp"
#include "ocd/epsilon_tuning.hpp"
#include "ocd/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ocd {

/// Paired samples (x_i, y_i) of a converged coupling, read as a map x -> y.
struct PairedMap {
  Matrix x_anchors;
  Matrix y_anchors;
  Index k_neighbors = 8;

  /// Throws ShapeMismatch, NonFiniteInput or InvalidConfig (k outside [1, N]).
  void validate() const;
};

/// Inverse-distance weighted average of the y anchors paired with the
/// k nearest x anchors. A query that coincides with one or more x anchors
/// returns the mean of their partners. Throws EmptyQuery for zero rows and
/// DimensionMismatch for a wrong column count.
Matrix evaluate_map(const PairedMap& map, const Matrix& query);

/// RGB pixels in [0, 1], row-major (pixel (r, c) is row r * width + c).
struct ImageSamples {
  Matrix pixels;
  Index width = 0;
  Index height = 0;
};

/// Learns the color map of `source` onto `target` from n_train pixels of each
/// (drawn without replacement with config.seed), then returns
/// (1 - alpha) p + alpha M(p) for every source pixel, clamped to [0, 1].
ImageSamples color_transfer(const ImageSamples& source, const ImageSamples& target,
                            const SolverConfig& config, double alpha, Index n_train,
                            EpsilonMode mode = EpsilonMode::Fixed);

struct DistanceMatrixResult {
  SquareMatrix distances;  ///< NaN where a pair failed
  std::vector<std::string> failures;
};

/// OCD estimate of the squared Wasserstein distance between every pair of
/// datasets: the final mean cost of a run in each orientation, averaged.
/// The diagonal is zero. Rows of each dataset are paired by index, so
/// datasets of different sizes are truncated to the smaller one.
DistanceMatrixResult distance_matrix(const std::vector<Matrix>& datasets,
                                     const SolverConfig& config,
                                     EpsilonMode mode = EpsilonMode::Fixed);

/// Pixel coordinates, normalized to [0, 1]^2 as ((c + 0.5) / width,
/// (r + 0.5) / height), drawn with probability proportional to intensity.
/// Throws AllZeroImage, or NonFiniteInput for negative or non-finite values.
Matrix image_to_point_samples(const SquareMatrix& image, Index n_samples, std::uint64_t seed);

}  // namespace ocd
