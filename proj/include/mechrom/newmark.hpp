#pragma once

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "mechrom/model.hpp"
#include "mechrom/snapshots.hpp"
#include "mechrom/types.hpp"

namespace mechrom {

/// HHT-alpha parameters. With alpha = 0 and gamma, beta unset this is the
/// average-acceleration Newmark scheme (gamma = 1/2, beta = 1/4).
template <typename Scalar>
struct IntegratorConfig {
  Scalar dt = Scalar(0.01);
  Scalar t_end = Scalar(1);
  std::optional<Scalar> gamma;
  std::optional<Scalar> beta;
  Scalar alpha = 0;

  Scalar resolved_gamma() const {
    return gamma ? *gamma : (Scalar(1) - Scalar(2) * alpha) / Scalar(2);
  }
  Scalar resolved_beta() const {
    return beta ? *beta
                : (Scalar(1) - alpha) * (Scalar(1) - alpha) / Scalar(4);
  }

  /// floor(t_end / dt), snapping quotients within 1e-9 of an integer.
  Index step_count() const {
    const Scalar ratio = t_end / dt;
    const Scalar nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= Scalar(1e-9) * std::max(Scalar(1), ratio))
      return static_cast<Index>(nearest);
    return static_cast<Index>(std::floor(ratio));
  }

  void validate() const {
    require(dt > Scalar(0) && std::isfinite(static_cast<double>(dt)),
            ErrorKind::kInvalidParameter, "dt must be positive");
    require(t_end >= dt, ErrorKind::kInvalidParameter, "t_end must be >= dt");
    require(alpha >= Scalar(-1) / Scalar(3) && alpha <= Scalar(0),
            ErrorKind::kInvalidParameter, "alpha must lie in [-1/3, 0]");
  }
};

template <typename Scalar>
struct IntegratorState {
  Vector<Scalar> x;
  Vector<Scalar> v;
  Vector<Scalar> a;
  Scalar t = 0;
};

/// Solves M a0 = f0 - E v0 - K x0.
template <typename Scalar>
Vector<Scalar> initial_acceleration(const SecondOrderOperators<Scalar>& ops,
                                    const VectorArg<Scalar>& x0,
                                    const VectorArg<Scalar>& v0,
                                    const VectorArg<Scalar>& f0) {
  ops.validate();
  const Index n = ops.n();
  require(x0.size() == n && v0.size() == n && f0.size() == n,
          ErrorKind::kInvalidParameter,
          "initial vectors must have length " + std::to_string(n));
  Eigen::PartialPivLU<Matrix<Scalar>> lu(ops.M);
  require(lu.rcond() > std::numeric_limits<Scalar>::epsilon(),
          ErrorKind::kSingularOperator, "mass matrix is singular");
  return lu.solve(f0 - ops.E * v0 - ops.K * x0);
}

template <typename Scalar>
Vector<Scalar> initial_acceleration(const SecondOrderSystem<Scalar>& system,
                                    const VectorArg<Scalar>& x0,
                                    const VectorArg<Scalar>& v0,
                                    const VectorArg<Scalar>& f0) {
  return initial_acceleration(system.operators(), x0, v0, f0);
}

/// One HHT/Newmark step with the effective matrix
///   M + (1+alpha) gamma dt E + (1+alpha) beta dt^2 K
/// factorized once at construction.
template <typename Scalar>
class NewmarkStepper {
 public:
  NewmarkStepper(SecondOrderOperators<Scalar> ops,
                 const IntegratorConfig<Scalar>& config)
      : ops_(std::move(ops)),
        dt_(config.dt),
        gamma_(config.resolved_gamma()),
        beta_(config.resolved_beta()),
        alpha_(config.alpha) {
    ops_.validate();
    require(dt_ > Scalar(0), ErrorKind::kInvalidParameter,
            "dt must be positive");
    const Scalar weight = Scalar(1) + alpha_;
    Matrix<Scalar> effective = ops_.M + weight * gamma_ * dt_ * ops_.E +
                               weight * beta_ * dt_ * dt_ * ops_.K;
    lu_.compute(effective);
    require(lu_.rcond() > std::numeric_limits<Scalar>::epsilon(),
            ErrorKind::kSingularOperator,
            "effective Newmark matrix is singular");
  }

  const SecondOrderOperators<Scalar>& operators() const { return ops_; }

  /// Advances (x, v, a) at t_k to t_{k+1} under the applied forces
  /// f_{k+1} and f_k. The force enters as (1+alpha) f_{k+1} - alpha f_k.
  IntegratorState<Scalar> step(const IntegratorState<Scalar>& state,
                               const VectorArg<Scalar>& f_next,
                               const VectorArg<Scalar>& f_curr) const {
    const Index n = ops_.n();
    require(state.x.size() == n && state.v.size() == n && state.a.size() == n,
            ErrorKind::kInvalidParameter, "state length mismatch");
    require(f_next.size() == n && f_curr.size() == n,
            ErrorKind::kInvalidParameter, "force length mismatch");
    const Scalar weight = Scalar(1) + alpha_;
    const Vector<Scalar> x_pred =
        state.x + dt_ * state.v +
        dt_ * dt_ * (Scalar(0.5) - beta_) * state.a;
    const Vector<Scalar> v_pred =
        state.v + dt_ * (Scalar(1) - gamma_) * state.a;

    Vector<Scalar> rhs = weight * f_next;
    if (alpha_ != Scalar(0)) {
      rhs -= alpha_ * f_curr;
      rhs -= ops_.E * (weight * v_pred - alpha_ * state.v);
      rhs -= ops_.K * (weight * x_pred - alpha_ * state.x);
    } else {
      rhs -= ops_.E * v_pred;
      rhs -= ops_.K * x_pred;
    }

    IntegratorState<Scalar> next;
    next.a = lu_.solve(rhs);
    next.x = x_pred + beta_ * dt_ * dt_ * next.a;
    next.v = v_pred + gamma_ * dt_ * next.a;
    next.t = state.t + dt_;
    return next;
  }

 private:
  SecondOrderOperators<Scalar> ops_;
  Scalar dt_;
  Scalar gamma_;
  Scalar beta_;
  Scalar alpha_;
  Eigen::PartialPivLU<Matrix<Scalar>> lu_;
};

template <typename Scalar>
IntegratorState<Scalar> step(const SecondOrderOperators<Scalar>& ops,
                             const IntegratorState<Scalar>& state,
                             const VectorArg<Scalar>& f_next,
                             const VectorArg<Scalar>& f_curr,
                             const IntegratorConfig<Scalar>& config) {
  return NewmarkStepper<Scalar>(ops, config).step(state, f_next, f_curr);
}

template <typename Scalar>
IntegratorState<Scalar> step(const SecondOrderSystem<Scalar>& system,
                             const IntegratorState<Scalar>& state,
                             const VectorArg<Scalar>& f_next,
                             const VectorArg<Scalar>& f_curr,
                             const IntegratorConfig<Scalar>& config) {
  return step(system.operators(), state, f_next, f_curr, config);
}

/// Excitation: either an input signal u(t) mapped through B, or a force
/// f(t) applied directly.
template <typename Scalar>
struct Excitation {
  enum class Kind { kInput, kForce };
  Kind kind = Kind::kInput;
  std::function<Vector<Scalar>(Scalar)> sample;

  static Excitation input(std::function<Vector<Scalar>(Scalar)> u) {
    return {Kind::kInput, std::move(u)};
  }
  static Excitation force(std::function<Vector<Scalar>(Scalar)> f) {
    return {Kind::kForce, std::move(f)};
  }
};

/// Time-integrates from (x0, v0) at t = 0 and records snapshots at
/// t_1 ... t_N, N = floor(t_end / dt).
///
/// Input-driven runs record both U and the applied force F = B U.
/// Force-driven runs record F only.
template <typename Scalar>
TrajectoryData<Scalar> simulate(const SecondOrderOperators<Scalar>& ops,
                                const Excitation<Scalar>& excitation,
                                const VectorArg<Scalar>& x0,
                                const VectorArg<Scalar>& v0,
                                const IntegratorConfig<Scalar>& config) {
  config.validate();
  ops.validate();
  require(static_cast<bool>(excitation.sample), ErrorKind::kInvalidParameter,
          "excitation has no sampler");
  const Index n = ops.n();
  const Index count = config.step_count();
  const bool input_driven = excitation.kind == Excitation<Scalar>::Kind::kInput;

  auto force_at_time = [&](Scalar t, Vector<Scalar>* input) {
    Vector<Scalar> sample = excitation.sample(t);
    if (input_driven) {
      require(sample.size() == ops.m(), ErrorKind::kInvalidParameter,
              "input sample length " + std::to_string(sample.size()) +
                  " != m = " + std::to_string(ops.m()));
      if (input) *input = sample;
      return Vector<Scalar>(ops.B * sample);
    }
    require(sample.size() == n, ErrorKind::kInvalidParameter,
            "force sample length " + std::to_string(sample.size()) +
                " != n = " + std::to_string(n));
    return sample;
  };

  NewmarkStepper<Scalar> stepper(ops, config);
  Vector<Scalar> f_curr = force_at_time(Scalar(0), nullptr);
  IntegratorState<Scalar> state{x0, v0,
                                initial_acceleration(ops, x0, v0, f_curr),
                                Scalar(0)};

  TrajectoryData<Scalar> data;
  data.times.resize(count);
  data.X.resize(n, count);
  data.Xd.resize(n, count);
  data.Xdd.resize(n, count);
  Matrix<Scalar> forces(n, count);
  Matrix<Scalar> inputs(input_driven ? ops.m() : 0, count);

  Vector<Scalar> input;
  for (Index k = 0; k < count; ++k) {
    const Scalar t_next = Scalar(k + 1) * config.dt;
    Vector<Scalar> f_next = force_at_time(t_next, &input);
    state = stepper.step(state, f_next, f_curr);
    state.t = t_next;
    data.times(k) = t_next;
    data.X.col(k) = state.x;
    data.Xd.col(k) = state.v;
    data.Xdd.col(k) = state.a;
    forces.col(k) = f_next;
    if (input_driven) inputs.col(k) = input;
    f_curr = std::move(f_next);
  }
  data.F = std::move(forces);
  if (input_driven) data.U = std::move(inputs);
  return data;
}

template <typename Scalar>
TrajectoryData<Scalar> simulate(const SecondOrderSystem<Scalar>& system,
                                const Excitation<Scalar>& excitation,
                                const VectorArg<Scalar>& x0,
                                const VectorArg<Scalar>& v0,
                                const IntegratorConfig<Scalar>& config) {
  return simulate(system.operators(), excitation, x0, v0, config);
}

/// Steps through a sampled force history. Column 0 of `forces` acts at the
/// given start state; the returned snapshots include that start column.
/// Used to replay a reduced model over a data window without t_0 samples.
template <typename Scalar>
TrajectoryData<Scalar> replay(const SecondOrderOperators<Scalar>& ops,
                              const MatrixArg<Scalar>& forces,
                              const VectorArg<Scalar>& x_start,
                              const VectorArg<Scalar>& v_start, Scalar t_start,
                              const IntegratorConfig<Scalar>& config) {
  ops.validate();
  const Index n = ops.n();
  const Index count = forces.cols();
  require(count >= 1, ErrorKind::kInvalidInput, "empty force history");
  require(forces.rows() == n, ErrorKind::kInvalidParameter,
          "force rows " + std::to_string(forces.rows()) + " != n = " +
              std::to_string(n));
  NewmarkStepper<Scalar> stepper(ops, config);
  IntegratorState<Scalar> state{
      x_start, v_start,
      initial_acceleration(ops, x_start, v_start, Vector<Scalar>(forces.col(0))),
      t_start};

  TrajectoryData<Scalar> data;
  data.times.resize(count);
  data.X.resize(n, count);
  data.Xd.resize(n, count);
  data.Xdd.resize(n, count);
  auto record = [&](Index k) {
    data.times(k) = t_start + Scalar(k) * config.dt;
    data.X.col(k) = state.x;
    data.Xd.col(k) = state.v;
    data.Xdd.col(k) = state.a;
  };
  record(0);
  for (Index k = 1; k < count; ++k) {
    state = stepper.step(state, Vector<Scalar>(forces.col(k)),
                         Vector<Scalar>(forces.col(k - 1)));
    record(k);
    if (!state.x.allFinite()) {
      // Diverged; the remaining columns stay non-finite.
      for (Index j = k + 1; j < count; ++j) {
        data.times(j) = t_start + Scalar(j) * config.dt;
        data.X.col(j).setConstant(std::numeric_limits<Scalar>::infinity());
        data.Xd.col(j).setConstant(std::numeric_limits<Scalar>::infinity());
        data.Xdd.col(j).setConstant(std::numeric_limits<Scalar>::infinity());
      }
      break;
    }
  }
  data.F = forces;
  return data;
}

/// Energy 1/2 v^T M v + 1/2 x^T K x.
template <typename Scalar>
Scalar mechanical_energy(const SecondOrderOperators<Scalar>& ops,
                         const Vector<Scalar>& x, const Vector<Scalar>& v) {
  return Scalar(0.5) * v.dot(ops.M * v) + Scalar(0.5) * x.dot(ops.K * x);
}

}  // namespace mechrom
