#include "ocd/ensemble.hpp"

#include "ocd/error.hpp"

#include <string>

namespace ocd {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

ParticleEnsemble::ParticleEnsemble(Matrix x_samples, Matrix y_samples)
    : x_(std::move(x_samples)), y_(std::move(y_samples)) {
  if (x_.rows() != y_.rows() || x_.cols() != y_.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "x is " + shape_of(x_) + " but y is " + shape_of(y_));
  }
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw Error(ErrorCode::ShapeMismatch, "ensemble needs at least one particle and one dimension");
  }
  if (!all_finite(x_) || !all_finite(y_)) {
    throw Error(ErrorCode::NonFiniteInput, "sample matrices contain NaN or Inf");
  }
}

void ParticleEnsemble::advance(Matrix x_next, Matrix y_next, double dt) {
  if (x_next.rows() != x_.rows() || x_next.cols() != x_.cols() || y_next.rows() != y_.rows() ||
      y_next.cols() != y_.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "advance must keep the ensemble shape");
  }
  if (!all_finite(x_next) || !all_finite(y_next)) {
    throw Error(ErrorCode::NonFiniteState,
                "particle state diverged at step " + std::to_string(step_ + 1));
  }
  x_ = std::move(x_next);
  y_ = std::move(y_next);
  time_ += dt;
  ++step_;
}

}  // namespace ocd
