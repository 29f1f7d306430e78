#include "ocd/cost.hpp"

#include "ocd/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ocd {

double CostModel::cost(std::span<const double> x, std::span<const double> y) const {
  if (kind_ == CostKind::L2Squared) return squared_distance(x, y);
  return cost_(x, y);
}

void CostModel::grad_x(std::span<const double> x, std::span<const double> y,
                       std::span<double> out) const {
  if (kind_ == CostKind::L2Squared) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = 2.0 * (x[k] - y[k]);
    return;
  }
  grad_x_(x, y, out);
}

void CostModel::grad_y(std::span<const double> x, std::span<const double> y,
                       std::span<double> out) const {
  if (kind_ == CostKind::L2Squared) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = 2.0 * (y[k] - x[k]);
    return;
  }
  grad_y_(x, y, out);
}

CostModel l2_cost_model() {
  CostModel model;
  model.kind_ = CostKind::L2Squared;
  return model;
}

namespace {

// Central differences of `cost` with respect to `point` (either x or y).
double max_gradient_mismatch(const CostModel& model, std::vector<double>& x, std::vector<double>& y,
                             bool wrt_x) {
  const std::size_t n = x.size();
  std::vector<double> analytic(n);
  if (wrt_x) {
    model.grad_x(x, y, analytic);
  } else {
    model.grad_y(x, y, analytic);
  }
  std::vector<double>& point = wrt_x ? x : y;
  double scale = 1.0;
  for (double g : analytic) scale = std::max(scale, std::abs(g));

  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double saved = point[k];
    const double h = std::cbrt(2.2e-16) * std::max(1.0, std::abs(saved));
    point[k] = saved + h;
    const double up = model.cost(x, y);
    point[k] = saved - h;
    const double down = model.cost(x, y);
    point[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    if (!std::isfinite(numeric) || !std::isfinite(analytic[k])) return INFINITY;
    worst = std::max(worst, std::abs(numeric - analytic[k]) / scale);
  }
  return worst;
}

}  // namespace

CostModel make_custom_cost(CostFunction cost, GradientFunction grad_x, GradientFunction grad_y,
                           Index dim, std::uint64_t seed) {
  if (!cost || !grad_x || !grad_y) {
    throw Error(ErrorCode::InvalidConfig, "custom cost needs cost, grad_x and grad_y callables");
  }
  if (dim < 1) throw Error(ErrorCode::InvalidConfig, "custom cost dimension must be >= 1");

  CostModel model;
  model.kind_ = CostKind::Custom;
  model.cost_ = std::move(cost);
  model.grad_x_ = std::move(grad_x);
  model.grad_y_ = std::move(grad_y);

  constexpr int kProbes = 100;
  constexpr double kTolerance = 1e-5;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(dim));
  std::vector<double> y(static_cast<std::size_t>(dim));
  for (int probe = 0; probe < kProbes; ++probe) {
    for (auto& v : x) v = normal(rng);
    for (auto& v : y) v = normal(rng);
    const double c = model.cost(x, y);
    if (!std::isfinite(c) || c < 0.0) {
      throw Error(ErrorCode::InvalidGradient, "custom cost must be finite and non-negative");
    }
    const double ex = max_gradient_mismatch(model, x, y, true);
    const double ey = max_gradient_mismatch(model, x, y, false);
    if (ex > kTolerance || ey > kTolerance) {
      throw Error(ErrorCode::InvalidGradient,
                  "gradient disagrees with finite differences at probe " + std::to_string(probe) +
                      " (relative error " + std::to_string(std::max(ex, ey)) + ")");
    }
  }
  return model;
}

}  // namespace ocd
