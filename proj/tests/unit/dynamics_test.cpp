#include "ocd/diagnostics.hpp"
#include "ocd/dynamics.hpp"
#include "ocd/exact_ot.hpp"
#include "ocd/samplers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ocd;
using oracle::column;
using oracle::error_code_of;

namespace {

SolverConfig global_constant(double dt) {
  SolverConfig c;
  c.epsilon = 1e6;
  c.estimator = Estimator::PiecewiseConstant;
  c.dt = dt;
  return c;
}

}  // namespace

TEST_CASE("two particles with one global cluster") {
  const ParticleEnsemble e(column({-1.0, 1.0}), column({1.0, -1.0}));
  const VelocityBatch v = ocd_velocity(e, l2_cost_model(), global_constant(0.1));
  CHECK(v.v_x(0, 0) == 2.0);
  CHECK(v.v_x(1, 0) == -2.0);
  CHECK(v.v_y(0, 0) == -2.0);
  CHECK(v.v_y(1, 0) == 2.0);

  const ParticleEnsemble next = step_euler(e, l2_cost_model(), global_constant(0.1));
  CHECK(next.x()(0, 0) == doctest::Approx(-0.8));
  CHECK(next.x()(1, 0) == doctest::Approx(0.8));
  CHECK(next.y()(0, 0) == doctest::Approx(0.8));
  CHECK(next.y()(1, 0) == doctest::Approx(-0.8));
  CHECK(transport_cost(e, l2_cost_model()) == 4.0);
  CHECK(transport_cost(next, l2_cost_model()) == doctest::Approx(2.56));
  CHECK(next.step_index() == 1);
  CHECK(next.time() == doctest::Approx(0.1));
}

TEST_CASE("rk4 step against the exact two-particle flow") {
  // With both means at zero the flow is x' = 2y, y' = 2x per particle, so
  // x(t) = -exp(-2t), y(t) = exp(-2t) from (-1, 1).
  const ParticleEnsemble e(column({-1.0, 1.0}), column({1.0, -1.0}));
  double previous_error = 0.0;
  for (double dt : {0.1, 0.05}) {
    const ParticleEnsemble next = step_rk4(e, l2_cost_model(), global_constant(dt));
    const double exact_x = -std::exp(-2.0 * dt);
    const double error = std::abs(next.x()(0, 0) - exact_x) + std::abs(next.y()(0, 0) + exact_x);
    CHECK(error <= std::pow(2.0 * dt, 5));
    if (previous_error > 0.0) CHECK(previous_error / error == doctest::Approx(32.0).epsilon(0.1));
    previous_error = error;
    const double exact_cost = 4.0 * std::exp(-4.0 * dt);
    CHECK(transport_cost(next, l2_cost_model()) == doctest::Approx(exact_cost).epsilon(1e-4));
  }
  // The explicit Euler step overshoots the exact flow.
  const ParticleEnsemble euler = step_euler(e, l2_cost_model(), global_constant(0.1));
  const ParticleEnsemble rk4 = step_rk4(e, l2_cost_model(), global_constant(0.1));
  CHECK(transport_cost(euler, l2_cost_model()) < transport_cost(rk4, l2_cost_model()));
}

TEST_CASE("frozen regime leaves particles in place") {
  const ParticleEnsemble e(column({0.0, 1.0, 2.5}), column({3.0, -1.0, 7.0}));
  SolverConfig c;
  c.epsilon = 0.01;
  const VelocityBatch v = ocd_velocity(e, l2_cost_model(), c);
  CHECK(v.v_x.isZero(0.0));
  CHECK(v.v_y.isZero(0.0));
  for (Stepper s : {Stepper::Euler, Stepper::RK4}) {
    c.stepper = s;
    const ParticleEnsemble next = s == Stepper::Euler ? step_euler(e, l2_cost_model(), c)
                                                      : step_rk4(e, l2_cost_model(), c);
    CHECK(next.x() == e.x());
    CHECK(next.y() == e.y());
    CHECK(next.time() == doctest::Approx(0.1));
  }
}

TEST_CASE("matched pairs are a fixed point") {
  std::mt19937_64 rng(4);
  const Matrix x = sample_standard_normal(50, 2, 0.0, rng);
  const ParticleEnsemble e(x, x);
  const VelocityBatch v = ocd_velocity(e, l2_cost_model(), SolverConfig{});
  CHECK(v.v_x.isZero(0.0));
  CHECK(v.v_y.isZero(0.0));
  const RunResult r = run(e, l2_cost_model(), SolverConfig{});
  CHECK(r.termination == Termination::CostBelowGamma);
  CHECK(r.final_cost == 0.0);
  CHECK(r.final_ensemble.step_index() == 0);
}

TEST_CASE("invalid step size") {
  const ParticleEnsemble e(column({0.0, 1.0}), column({1.0, 0.0}));
  SolverConfig c;
  c.dt = 0.0;
  CHECK(error_code_of([&] { step_euler(e, l2_cost_model(), c); }) == ErrorCode::InvalidConfig);
  CHECK(error_code_of([&] { step_rk4(e, l2_cost_model(), c); }) == ErrorCode::InvalidConfig);
  CHECK(error_code_of([&] { run(e, l2_cost_model(), c); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("zero step budget returns the initial state") {
  const ParticleEnsemble e(column({0.0, 1.0}), column({1.0, 0.0}));
  SolverConfig c;
  c.max_steps = 0;
  const RunResult r = run(e, l2_cost_model(), c);
  CHECK(r.termination == Termination::MaxSteps);
  CHECK(r.final_ensemble.step_index() == 0);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].step_index == 0);
  CHECK(r.diagnostics[0].transport_cost == 1.0);
}

TEST_CASE("self transport reaches the absolute threshold") {
  std::mt19937_64 rng(17);
  const Matrix x = sample_standard_normal(100, 1, 0.0, rng);
  const Matrix y = shuffle_rows(x, rng);
  SolverConfig c;
  c.epsilon = 0.3;
  c.estimator = Estimator::PiecewiseConstant;
  const RunResult r = run(ParticleEnsemble(x, y), l2_cost_model(), c);
  CHECK(r.termination == Termination::CostBelowGamma);
  CHECK(r.final_cost <= 0.01);
}

TEST_CASE("unit shift in 1D stagnates near the exact distance") {
  // eps near the sweep optimum for 400 particles.
  std::mt19937_64 rng(23);
  const Matrix x = sample_standard_normal(400, 1, 0.0, rng);
  const Matrix y = sample_standard_normal(400, 1, 1.0, rng);
  SolverConfig c;
  c.epsilon = 0.063;
  c.estimator = Estimator::PiecewiseConstant;
  const RunResult r = run(ParticleEnsemble(x, y), l2_cost_model(), c);
  CHECK(r.termination == Termination::Stagnated);
  // Against the exact transport of the same samples, and against the
  // population value with room for the finite-sample spread of 400 points.
  CHECK(r.final_cost == doctest::Approx(wasserstein2_empirical(x, y)).epsilon(0.1));
  CHECK(r.final_cost == doctest::Approx(1.0).epsilon(0.15));

  for (std::size_t k = 1; k < r.diagnostics.size(); ++k) {
    const double prev = r.diagnostics[k - 1].transport_cost;
    CHECK(r.diagnostics[k].transport_cost - prev <= 1e-3 * (1.0 + prev));
  }
  CHECK(r.final_cost < r.diagnostics.front().transport_cost);
}

TEST_CASE("runs are independent of the thread count") {
  std::mt19937_64 rng(31);
  const Matrix x = sample_standard_normal(300, 2, 0.0, rng);
  const Matrix y = sample_standard_normal(300, 2, 1.0, rng);
  SolverConfig c;
  c.epsilon = 0.4;
  c.max_steps = 15;
  for (Estimator est : {Estimator::PiecewiseConstant, Estimator::PiecewiseLinear}) {
    c.estimator = est;
    c.threads = 1;
    const RunResult a = run(ParticleEnsemble(x, y), l2_cost_model(), c);
    c.threads = 4;
    const RunResult b = run(ParticleEnsemble(x, y), l2_cost_model(), c);
    CHECK(a.final_ensemble.x() == b.final_ensemble.x());
    CHECK(a.final_ensemble.y() == b.final_ensemble.y());
    CHECK(a.final_cost == b.final_cost);
  }
}

TEST_CASE("frozen clusters mode stays close to the default") {
  std::mt19937_64 rng(32);
  const Matrix x = sample_standard_normal(200, 1, 0.0, rng);
  const Matrix y = sample_standard_normal(200, 1, 1.0, rng);
  SolverConfig c;
  c.epsilon = 0.3;
  c.max_steps = 30;
  const RunResult a = run(ParticleEnsemble(x, y), l2_cost_model(), c);
  c.frozen_clusters = true;
  const RunResult b = run(ParticleEnsemble(x, y), l2_cost_model(), c);
  CHECK(b.final_cost == doctest::Approx(a.final_cost).epsilon(0.05));
}

TEST_CASE("divergence aborts with the diagnostics so far") {
  // c(x, y) = exp(x - y) blows up under a huge step.
  auto cost = [](std::span<const double> x, std::span<const double> y) { return std::exp(x[0] - y[0]); };
  auto gx = [](std::span<const double> x, std::span<const double> y, std::span<double> out) {
    out[0] = std::exp(x[0] - y[0]);
  };
  auto gy = [](std::span<const double> x, std::span<const double> y, std::span<double> out) {
    out[0] = -std::exp(x[0] - y[0]);
  };
  const CostModel model = make_custom_cost(cost, gx, gy, 1);
  SolverConfig c;
  c.epsilon = 1e6;
  c.estimator = Estimator::PiecewiseConstant;
  c.stepper = Stepper::Euler;
  c.dt = 50.0;
  c.max_steps = 100;
  try {
    run(ParticleEnsemble(column({0.0, 10.0, 1.0}), column({-5.0, 0.0, 3.0})), model, c);
    FAIL("run should have diverged");
  } catch (const RunAborted& e) {
    CHECK(e.code() == ErrorCode::NonFiniteState);
    CHECK_FALSE(e.partial_diagnostics().empty());
    CHECK(e.partial_diagnostics().front().step_index == 0);
  }
}
