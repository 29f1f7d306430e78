#pragma once

#include "ocd/types.hpp"

#include <cstdint>
#include <random>

namespace ocd {

using Rng = std::mt19937_64;

/// N(mean, cov) via the Cholesky factor of cov (throws SingularCovariance if
/// cov is not positive definite).
Matrix sample_normal(Index n, const Vector& mean, const SquareMatrix& cov, Rng& rng);

/// Standard normal samples in dimension dim shifted by `shift` in every
/// coordinate.
Matrix sample_standard_normal(Index n, Index dim, double shift, Rng& rng);

/// softmax map T(x) = grad log(sum_k exp(x_k)), applied row-wise.
Matrix softmax_map(const Matrix& x);

/// Push-forward of N(0, I_2) by the softmax map.
Matrix sample_softmax_pushforward(Index n, Rng& rng);

/// Banana: z ~ N(0, I_2), (z1, z2 + curvature * (z1^2 - 1)), curvature = 1.
inline constexpr double kBananaCurvature = 1.0;
Matrix sample_banana(Index n, Rng& rng);

/// Neal's funnel in 2D: v ~ N(0, 3^2), x ~ N(0, exp(v / 2)^2), rows (v, x)
/// scaled by 1/3 on the first axis so both coordinates are O(1).
inline constexpr double kFunnelScale = 3.0;
Matrix sample_funnel(Index n, Rng& rng);

/// Swiss roll: t ~ U(1.5 pi, 4.5 pi), (t cos t, t sin t) / 10 plus N(0, noise^2).
inline constexpr double kSwissRollNoise = 0.05;
Matrix sample_swiss_roll(Index n, Rng& rng);

/// Fisher-Yates shuffle of the rows with the given generator.
Matrix shuffle_rows(const Matrix& m, Rng& rng);

}  // namespace ocd
