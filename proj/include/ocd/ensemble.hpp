#pragma once

#include "ocd/types.hpp"

#include <cstdint>

namespace ocd {

/// Paired sample ensemble: row i of x() pairs with row i of y(), so the two
/// matrices together are the empirical joint law of the current coupling.
class ParticleEnsemble {
 public:
  /// Throws ShapeMismatch for unequal or empty shapes and NonFiniteInput for
  /// NaN/Inf entries. Rows are paired by index as given.
  ParticleEnsemble(Matrix x_samples, Matrix y_samples);

  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  double time() const noexcept { return time_; }
  std::int64_t step_index() const noexcept { return step_; }

  Index size() const noexcept { return x_.rows(); }
  Index dim() const noexcept { return x_.cols(); }

  /// Replaces the state after a completed step. Throws NonFiniteState if the
  /// new state contains a non-finite entry; the ensemble is left untouched.
  void advance(Matrix x_next, Matrix y_next, double dt);

 private:
  Matrix x_;
  Matrix y_;
  double time_ = 0.0;
  std::int64_t step_ = 0;
};

}  // namespace ocd
