#pragma once

#include "ocd/types.hpp"

#include <cstdint>
#include <functional>
#include <span>

namespace ocd {

enum class CostKind { L2Squared, Custom };

using CostFunction = std::function<double(std::span<const double> x, std::span<const double> y)>;
using GradientFunction =
    std::function<void(std::span<const double> x, std::span<const double> y, std::span<double> out)>;

/// Transport cost c(x, y) together with its partial gradients.
///
/// The squared Euclidean cost is evaluated inline; custom costs go through
/// the supplied callables and must pass a finite-difference check at
/// construction (see make_custom_cost).
///
/// With c = |x - y|^2 the solver integrates the general form
/// dX/dt = -grad_x c + E[grad_x c | X], which carries an explicit factor 2
/// relative to the reduced form dX/dt = Y - E[Y | X]. Trajectories therefore
/// coincide with the reduced form under the time rescaling t -> 2t.
class CostModel {
 public:
  CostKind kind() const noexcept { return kind_; }

  double cost(std::span<const double> x, std::span<const double> y) const;
  void grad_x(std::span<const double> x, std::span<const double> y, std::span<double> out) const;
  void grad_y(std::span<const double> x, std::span<const double> y, std::span<double> out) const;

  friend CostModel l2_cost_model();
  friend CostModel make_custom_cost(CostFunction, GradientFunction, GradientFunction, Index,
                                    std::uint64_t);

 private:
  CostKind kind_ = CostKind::L2Squared;
  CostFunction cost_;
  GradientFunction grad_x_;
  GradientFunction grad_y_;
};

CostModel l2_cost_model();

/// Wraps caller-supplied cost and gradients. The gradients are checked
/// against central finite differences of the cost at 100 random probe points
/// in R^dim x R^dim; a relative mismatch above 1e-5 throws InvalidGradient.
CostModel make_custom_cost(CostFunction cost, GradientFunction grad_x, GradientFunction grad_y,
                           Index dim, std::uint64_t seed = 0);

}  // namespace ocd
