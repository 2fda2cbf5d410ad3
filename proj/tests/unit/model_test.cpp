#include <gtest/gtest.h>

#include "mechrom/model.hpp"
#include "support/expect_error.hpp"
#include "support/testing.hpp"

namespace mechrom {
namespace {

using testing::expect_error;
using testing::Rng;

MatrixXd m1(double v) { return MatrixXd::Constant(1, 1, v); }

TEST(MassSpringChain, SingleMass) {
  ChainParameters<double> p{{1.0}, {1.0, 1.0}, 0.0, 0.0, {0}};
  const auto sys = build_mass_spring_chain(p);
  EXPECT_EQ(sys.n(), 1);
  EXPECT_EQ(sys.m(), 1);
  EXPECT_EQ(sys.mass()(0, 0), 1.0);
  EXPECT_EQ(sys.stiffness()(0, 0), 2.0);
  EXPECT_EQ(sys.damping()(0, 0), 0.0);
  EXPECT_EQ(sys.input_map()(0, 0), 1.0);
}

TEST(MassSpringChain, TwoMassStiffnessAndSpectrum) {
  ChainParameters<double> p{{1.0, 1.0}, {1.0, 1.0, 1.0}, 0.0, 0.0, {1}};
  const auto sys = build_mass_spring_chain(p);
  MatrixXd expected(2, 2);
  expected << 2, -1, -1, 2;
  EXPECT_EQ(sys.stiffness(), expected);
  // 2x2 symmetric eigenvalues: mean +/- sqrt(((a-d)/2)^2 + b^2).
  const double a = expected(0, 0), b = expected(0, 1), d = expected(1, 1);
  const double mean = (a + d) / 2, radius = std::hypot((a - d) / 2, b);
  const VectorXd values = symmetric_eigenvalues(sys.stiffness());
  EXPECT_NEAR(values(0), mean - radius, 1e-14);
  EXPECT_NEAR(values(1), mean + radius, 1e-14);
  EXPECT_NEAR(values(0), 1.0, 1e-14);
  EXPECT_NEAR(values(1), 3.0, 1e-14);
}

TEST(MassSpringChain, UniformChainIsSymmetricPositiveDefinite) {
  const auto sys = uniform_chain<double>(3, 2.0, 5.0, 0.1, 0.01, {0, 2});
  const MatrixXd& K = sys.stiffness();
  EXPECT_EQ(K, K.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(K);
  EXPECT_GT(solver.eigenvalues().minCoeff(), 0.0);
  EXPECT_EQ(sys.input_map().cols(), 2);
  EXPECT_EQ(sys.input_map()(2, 1), 1.0);
  EXPECT_EQ(sys.label(), "chain-3");
}

TEST(MassSpringChain, RandomParametersKeepDefiniteness) {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = rng.integer(1, 12);
    ChainParameters<double> p;
    for (Index i = 0; i < n; ++i) p.masses.push_back(rng.uniform(0.1, 10.0));
    for (Index i = 0; i <= n; ++i) p.stiffnesses.push_back(rng.uniform(0.1, 1e3));
    p.alpha_r = rng.uniform(0.0, 0.1);
    p.beta_r = rng.uniform(0.0, 1e-2);
    p.input_nodes = {rng.integer(0, n - 1)};
    const auto sys = build_mass_spring_chain(p);
    EXPECT_GT(min_eigenvalue(sys.mass()), 0.0);
    EXPECT_GT(min_eigenvalue(sys.stiffness()), 0.0);
    EXPECT_GE(min_eigenvalue(sys.damping()), -1e-12);
  }
}

TEST(MassSpringChain, RejectsBadParameters) {
  expect_error(ErrorKind::kInvalidParameter, [] {
    build_mass_spring_chain(ChainParameters<double>{{0.0}, {1.0, 1.0}, 0, 0, {0}});
  });
  expect_error(ErrorKind::kInvalidParameter, [] {
    build_mass_spring_chain(ChainParameters<double>{{1.0}, {1.0, -1.0}, 0, 0, {0}});
  });
  expect_error(ErrorKind::kInvalidParameter, [] {
    build_mass_spring_chain(ChainParameters<double>{{1.0}, {1.0, 1.0}, 0, 0, {1}});
  });
  expect_error(ErrorKind::kInvalidParameter, [] {
    build_mass_spring_chain(ChainParameters<double>{{1.0}, {1.0}, 0, 0, {0}});
  });
}

TEST(RayleighDamping, UndampedIsZero) {
  Rng rng(1);
  const MatrixXd M = rng.spd(4), K = rng.spd(4);
  EXPECT_EQ(rayleigh_damping(M, K, 0.0, 0.0), MatrixXd::Zero(4, 4));
}

TEST(RayleighDamping, PureStiffnessDamping) {
  Rng rng(2);
  const MatrixXd M = rng.spd(5), K = rng.spd(5, 10, 100);
  EXPECT_TRUE(rayleigh_damping(M, K, 0.0, 1e-6).isApprox(1e-6 * K, 1e-15));
}

TEST(RayleighDamping, ScalarCoefficients) {
  const MatrixXd E = rayleigh_damping(m1(2.0), m1(3.0), 0.01, 1e-4);
  EXPECT_NEAR(E(0, 0), 0.01 * 2 + 1e-4 * 3, 1e-16);
  EXPECT_NEAR(E(0, 0), 0.0203, 1e-15);
}

TEST(RayleighDamping, LinearInEachCoefficient) {
  Rng rng(3);
  const MatrixXd M = rng.spd(4), K = rng.spd(4);
  const MatrixXd lhs = rayleigh_damping(M, K, 0.3 + 0.2, 0.7);
  const MatrixXd rhs = rayleigh_damping(M, K, 0.3, 0.7) + rayleigh_damping(M, K, 0.2, 0.0);
  EXPECT_LE((lhs - rhs).norm(), 1e-14 * lhs.norm());
}

TEST(RayleighDamping, ShapeMismatch) {
  expect_error(ErrorKind::kInvalidParameter, [] {
    rayleigh_damping(MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3), 1.0, 1.0);
  });
}

TEST(SecondOrderSystem, SymmetrizesOnConstruction) {
  MatrixXd M(2, 2);
  M << 2, 1, 0, 2;
  const SecondOrderSystemd sys(M, MatrixXd::Zero(2, 2), M, MatrixXd::Ones(2, 1));
  EXPECT_EQ(sys.mass(), sys.mass().transpose());
  EXPECT_EQ(sys.mass()(0, 1), 0.5);
  EXPECT_EQ(sys.stiffness()(1, 0), 0.5);
}

TEST(SecondOrderSystem, ShapeMismatch) {
  expect_error(ErrorKind::kInvalidParameter, [] {
    SecondOrderSystemd(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                       MatrixXd::Identity(3, 3), MatrixXd::Ones(2, 1));
  });
}

TEST(ForceAt, Examples) {
  const SecondOrderSystemd scalar(m1(1), m1(1), m1(1), m1(1));
  EXPECT_EQ(force_at(scalar, VectorXd::Zero(1)), VectorXd::Zero(1));

  MatrixXd B(2, 1);
  B << 1, 0;
  const SecondOrderSystemd sys(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2),
                               MatrixXd::Identity(2, 2), B);
  const VectorXd f = force_at(sys, VectorXd::Constant(1, 3.0));
  EXPECT_EQ(f(0), 3.0);
  EXPECT_EQ(f(1), 0.0);
}

TEST(ForceAt, MatchesExplicitLoop) {
  Rng rng(4);
  const MatrixXd B = rng.normal(6, 3);
  const SecondOrderSystemd sys(rng.spd(6), rng.spd(6), rng.spd(6), B);
  const VectorXd u = rng.normal(3, 1);
  const VectorXd f = force_at(sys, u);
  for (Index i = 0; i < 6; ++i) {
    double sum = 0;
    for (Index j = 0; j < 3; ++j) sum += B(i, j) * u(j);
    EXPECT_NEAR(f(i), sum, 1e-14);
  }
}

TEST(ForceAt, LengthMismatch) {
  const SecondOrderSystemd sys(m1(1), m1(1), m1(1), m1(1));
  expect_error(ErrorKind::kInvalidParameter, [&] { force_at(sys, VectorXd::Zero(2)); });
}

}  // namespace
}  // namespace mechrom
