#include <gtest/gtest.h>

#include <cmath>

#include "mechrom/newmark.hpp"
#include "support/expect_error.hpp"
#include "support/testing.hpp"

namespace mechrom {
namespace {

using testing::expect_error;
using testing::Rng;

SecondOrderOperators<double> scalar_ops(double m, double e, double k) {
  return {MatrixXd::Constant(1, 1, m), MatrixXd::Constant(1, 1, e),
          MatrixXd::Constant(1, 1, k), MatrixXd::Ones(1, 1)};
}

VectorXd v1(double value) { return VectorXd::Constant(1, value); }

IntegratorConfig<double> config_of(double dt, double t_end) {
  IntegratorConfig<double> config;
  config.dt = dt;
  config.t_end = t_end;
  return config;
}

double oscillator_error(double dt) {
  const auto ops = scalar_ops(1, 0, 1);
  const auto data = simulate(ops, Excitation<double>::force([](double) { return v1(0); }),
                             v1(1), v1(0), config_of(dt, 1.0));
  double worst = 0;
  for (Index k = 0; k < data.samples(); ++k)
    worst = std::max(worst, std::abs(data.X(0, k) - std::cos(data.times(k))));
  return worst;
}

TEST(IntegratorConfig, DefaultsAndHhtParameters) {
  IntegratorConfig<double> config;
  EXPECT_EQ(config.resolved_gamma(), 0.5);
  EXPECT_EQ(config.resolved_beta(), 0.25);
  config.alpha = -0.1;
  EXPECT_DOUBLE_EQ(config.resolved_gamma(), 0.6);
  EXPECT_DOUBLE_EQ(config.resolved_beta(), 1.21 / 4);
  config.gamma = 0.5;
  EXPECT_EQ(config.resolved_gamma(), 0.5);
}

TEST(IntegratorConfig, StepCountSnapsNearIntegers) {
  EXPECT_EQ(config_of(0.1, 0.3).step_count(), 3);
  EXPECT_EQ(config_of(0.01, 7.0).step_count(), 700);
  EXPECT_EQ(config_of(0.1, 0.35).step_count(), 3);
}

TEST(IntegratorConfig, Validation) {
  expect_error(ErrorKind::kInvalidParameter, [] { config_of(0.0, 1.0).validate(); });
  expect_error(ErrorKind::kInvalidParameter, [] { config_of(0.1, 0.05).validate(); });
  auto config = config_of(0.1, 1.0);
  config.alpha = -0.5;
  expect_error(ErrorKind::kInvalidParameter, [&] { config.validate(); });
  config.alpha = 0.1;
  expect_error(ErrorKind::kInvalidParameter, [&] { config.validate(); });
}

TEST(InitialAcceleration, Examples) {
  const auto ops = scalar_ops(1, 0, 1);
  EXPECT_EQ(initial_acceleration(ops, v1(0), v1(0), v1(0))(0), 0.0);
  EXPECT_EQ(initial_acceleration(ops, v1(1), v1(0), v1(0))(0), -1.0);
}

TEST(InitialAcceleration, MatchesDirectSolve) {
  Rng rng(8);
  const SecondOrderOperators<double> ops{rng.spd(4), rng.spd(4), rng.spd(4),
                                         MatrixXd::Identity(4, 4)};
  const VectorXd x0 = rng.normal(4, 1), v0 = rng.normal(4, 1), f0 = rng.normal(4, 1);
  const VectorXd a0 = initial_acceleration(ops, x0, v0, f0);
  const VectorXd oracle =
      ops.M.fullPivHouseholderQr().solve(f0 - ops.E * v0 - ops.K * x0);
  EXPECT_LE((a0 - oracle).norm(), 1e-12 * oracle.norm());
  EXPECT_LE((ops.M * a0 + ops.E * v0 + ops.K * x0 - f0).norm(), 1e-10 * (1 + f0.norm()));
}

TEST(InitialAcceleration, SingularMass) {
  const auto ops = scalar_ops(0, 1, 1);
  expect_error(ErrorKind::kSingularOperator,
               [&] { initial_acceleration(ops, v1(0), v1(0), v1(0)); });
}

TEST(NewmarkStep, ZeroStaysZero) {
  Rng rng(9);
  const SecondOrderOperators<double> ops{rng.spd(3), rng.spd(3), rng.spd(3),
                                         MatrixXd::Identity(3, 3)};
  const NewmarkStepper<double> stepper(ops, config_of(0.1, 1.0));
  IntegratorState<double> state{VectorXd::Zero(3), VectorXd::Zero(3), VectorXd::Zero(3), 0};
  for (int k = 0; k < 5; ++k) state = stepper.step(state, VectorXd::Zero(3), VectorXd::Zero(3));
  EXPECT_EQ(state.x, VectorXd::Zero(3));
  EXPECT_EQ(state.v, VectorXd::Zero(3));
}

TEST(NewmarkStep, ExactForConstantAcceleration) {
  const auto ops = scalar_ops(1, 0, 0);
  for (double dt : {0.1, 0.25, 0.5}) {
    const auto data = simulate(ops, Excitation<double>::force([](double) { return v1(2); }),
                               v1(0), v1(0), config_of(dt, 2.0));
    for (Index k = 0; k < data.samples(); ++k) {
      const double t = double(k + 1) * dt;
      EXPECT_NEAR(data.X(0, k), t * t, 1e-13 * (1 + t * t));
      EXPECT_NEAR(data.Xdd(0, k), 2.0, 1e-13);
    }
  }
}

TEST(NewmarkStep, OscillatorMatchesCosine) {
  const auto ops = scalar_ops(1, 0, 1);
  const auto data = simulate(ops, Excitation<double>::force([](double) { return v1(0); }),
                             v1(1), v1(0), config_of(0.01, 1.0));
  ASSERT_EQ(data.samples(), 100);
  EXPECT_NEAR(data.X(0, 99), std::cos(1.0), 5e-5);
}

TEST(NewmarkStep, SatisfiesDiscreteBalanceWithHhtWeights) {
  Rng rng(10);
  const SecondOrderOperators<double> ops{rng.spd(5), rng.spd(5, 0.0, 0.2),
                                         rng.spd(5, 1, 50), MatrixXd::Identity(5, 5)};
  for (double alpha : {0.0, -0.05, -0.3}) {
    auto config = config_of(0.02, 1.0);
    config.alpha = alpha;
    const NewmarkStepper<double> stepper(ops, config);
    const double gamma = config.resolved_gamma(), beta = config.resolved_beta(),
                 dt = config.dt;
    IntegratorState<double> state{rng.normal(5, 1), rng.normal(5, 1), VectorXd(), 0};
    VectorXd f_curr = rng.normal(5, 1);
    state.a = initial_acceleration(ops, state.x, state.v, f_curr);
    for (int k = 0; k < 20; ++k) {
      const VectorXd f_next = rng.normal(5, 1);
      const auto next = stepper.step(state, f_next, f_curr);
      const VectorXd lhs = ops.M * next.a + (1 + alpha) * (ops.E * next.v + ops.K * next.x) -
                           alpha * (ops.E * state.v + ops.K * state.x);
      const VectorXd rhs = (1 + alpha) * f_next - alpha * f_curr;
      EXPECT_LE((lhs - rhs).norm(), 1e-9 * (1 + f_next.norm()));
      const VectorXd x_update = state.x + dt * state.v +
                                dt * dt * ((0.5 - beta) * state.a + beta * next.a);
      const VectorXd v_update = state.v + dt * ((1 - gamma) * state.a + gamma * next.a);
      EXPECT_LE((next.x - x_update).norm(), 1e-12 * (1 + next.x.norm()));
      EXPECT_LE((next.v - v_update).norm(), 1e-12 * (1 + next.v.norm()));
      state = next;
      f_curr = f_next;
    }
  }
}

TEST(NewmarkStep, SingularEffectiveMatrix) {
  const auto ops = scalar_ops(0, 0, 0);
  expect_error(ErrorKind::kSingularOperator,
               [&] { NewmarkStepper<double>(ops, config_of(0.1, 1.0)); });
}

TEST(Simulate, ColumnCountFollowsHorizon) {
  const auto ops = scalar_ops(1, 0.1, 1);
  const auto data = simulate(ops, Excitation<double>::input([](double) { return v1(1); }),
                             v1(0), v1(0), config_of(0.1, 1.0));
  EXPECT_EQ(data.samples(), 10);
  EXPECT_NEAR(data.times(0), 0.1, 1e-15);
  EXPECT_NEAR(data.times(9), 1.0, 1e-15);
}

TEST(Simulate, UndampedEnergyIsConserved) {
  const auto sys = uniform_chain<double>(2, 1.0, 1.0, 0.0, 0.0, {0});
  const auto ops = sys.operators();
  VectorXd x0(2);
  x0 << 1.0, -0.5;
  const auto data = simulate(ops, Excitation<double>::input([](double) { return v1(0); }),
                             x0, VectorXd::Zero(2), config_of(0.05, 50.0));
  ASSERT_EQ(data.samples(), 1000);
  const double e0 = mechanical_energy<double>(ops, x0, VectorXd::Zero(2));
  double drift = 0;
  for (Index k = 0; k < data.samples(); ++k) {
    const double e = mechanical_energy<double>(ops, data.X.col(k), data.Xd.col(k));
    drift = std::max(drift, std::abs(e - e0) / e0);
  }
  EXPECT_LT(drift, 1e-6);
}

TEST(Simulate, SevenSecondsAtCentisecondSteps) {
  const auto sys = uniform_chain<double>(5, 1.0, 10.0, 0.01, 1e-3, {4});
  const auto data = simulate(
      sys, Excitation<double>::input([](double t) { return v1(std::sin(t)); }),
      VectorXd::Zero(5), VectorXd::Zero(5), config_of(0.01, 7.0));
  EXPECT_EQ(data.samples(), 700);
  ASSERT_TRUE(data.U.has_value());
  EXPECT_NEAR((*data.U)(0, 699), std::sin(7.0), 1e-15);
}

TEST(Simulate, RecordsInputsAndForces) {
  const auto sys = uniform_chain<double>(3, 1.0, 2.0, 0.0, 0.0, {1});
  const auto u = [](double t) { return v1(std::cos(t)); };
  const auto by_input = simulate(sys, Excitation<double>::input(u), VectorXd::Zero(3),
                                 VectorXd::Zero(3), config_of(0.1, 1.0));
  ASSERT_TRUE(by_input.U && by_input.F);
  EXPECT_EQ(*by_input.F, MatrixXd(sys.input_map() * *by_input.U));

  const auto by_force = simulate(
      sys, Excitation<double>::force([&](double t) { return VectorXd(sys.input_map() * u(t)); }),
      VectorXd::Zero(3), VectorXd::Zero(3), config_of(0.1, 1.0));
  EXPECT_FALSE(by_force.U.has_value());
  EXPECT_EQ(by_force.X, by_input.X);
}

TEST(Simulate, BitIdenticalReruns) {
  const auto sys = uniform_chain<double>(6, 1.0, 5.0, 0.02, 1e-3, {2});
  const auto u = [](double t) { return v1(std::sin(3 * t)); };
  const auto a = simulate(sys, Excitation<double>::input(u), VectorXd::Zero(6),
                          VectorXd::Zero(6), config_of(0.01, 2.0));
  const auto b = simulate(sys, Excitation<double>::input(u), VectorXd::Zero(6),
                          VectorXd::Zero(6), config_of(0.01, 2.0));
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.Xdd, b.Xdd);
}

TEST(Simulate, SecondOrderConvergence) {
  const double ratio = oscillator_error(1e-2) / oscillator_error(5e-3);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(Replay, ReproducesSimulationFromAnInteriorState) {
  const auto sys = uniform_chain<double>(4, 1.0, 3.0, 0.05, 1e-3, {3});
  const auto ops = sys.operators();
  const auto config = config_of(0.01, 1.0);
  const auto data = simulate(
      sys, Excitation<double>::input([](double t) { return v1(std::sin(2 * t)); }),
      VectorXd::Zero(4), VectorXd::Zero(4), config);
  const auto replayed = replay<double>(ops, *data.F, data.X.col(0), data.Xd.col(0),
                                       data.times(0), config);
  EXPECT_LE((replayed.X - data.X).norm(), 1e-10 * data.X.norm());
  EXPECT_EQ(replayed.times(5), data.times(0) + 5 * config.dt);
}

TEST(Replay, DivergenceFillsWithInfinity) {
  const auto ops = scalar_ops(1, 0, -1e4);
  const MatrixXd forces = MatrixXd::Zero(1, 2000);
  const auto data = replay<double>(ops, forces, v1(1), v1(0), 0.0, config_of(0.01, 20.0));
  EXPECT_FALSE(std::isfinite(data.X(0, 1999)));
}

}  // namespace
}  // namespace mechrom
