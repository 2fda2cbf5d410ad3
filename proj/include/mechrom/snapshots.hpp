#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "mechrom/pod.hpp"
#include "mechrom/types.hpp"

namespace mechrom {

/// Column-wise snapshots at t_1 ... t_N (t_0 is never stored).
template <typename Scalar>
struct TrajectoryData {
  Vector<Scalar> times;
  Matrix<Scalar> X;
  Matrix<Scalar> Xd;
  Matrix<Scalar> Xdd;
  std::optional<Matrix<Scalar>> U;
  std::optional<Matrix<Scalar>> F;

  Index samples() const { return times.size(); }
  Index n() const { return X.rows(); }

  Scalar time_step() const {
    require(samples() >= 2, ErrorKind::kInsufficientData,
            "time step needs at least 2 samples");
    return (times(samples() - 1) - times(0)) / Scalar(samples() - 1);
  }

  void validate() const {
    const Index count = samples();
    require(count > 0, ErrorKind::kInvalidInput, "trajectory has no samples");
    auto check_cols = [count](const Matrix<Scalar>& a, const char* name) {
      require(a.cols() == count, ErrorKind::kInvalidInput,
              std::string(name) + " has " + std::to_string(a.cols()) +
                  " columns, expected " + std::to_string(count));
    };
    check_cols(X, "X");
    check_cols(Xd, "Xd");
    check_cols(Xdd, "Xdd");
    require(Xd.rows() == X.rows() && Xdd.rows() == X.rows(),
            ErrorKind::kInvalidInput, "X, Xd, Xdd row counts differ");
    if (U) check_cols(*U, "U");
    if (F) {
      check_cols(*F, "F");
      require(F->rows() == X.rows(), ErrorKind::kInvalidInput,
              "F rows differ from X rows");
    }
    if (count >= 2) {
      const Scalar dt = time_step();
      require(dt > Scalar(0), ErrorKind::kInvalidInput,
              "times must be strictly increasing");
      for (Index i = 1; i < count; ++i) {
        const Scalar gap = times(i) - times(i - 1);
        require(std::abs(gap - dt) <= Scalar(1e-9) * dt,
                ErrorKind::kInvalidInput,
                "times are not uniformly spaced at sample " + std::to_string(i));
      }
    }
  }

  /// Leading columns with t <= t_last (up to a relative slack of 1e-9 dt).
  TrajectoryData head_until(Scalar t_last) const {
    Index count = 0;
    const Scalar slack =
        samples() >= 2 ? Scalar(1e-9) * time_step() : Scalar(0);
    while (count < samples() && times(count) <= t_last + slack) ++count;
    require(count > 0, ErrorKind::kInvalidInput,
            "no samples at or before t = " +
                std::to_string(static_cast<double>(t_last)));
    TrajectoryData head;
    head.times = times.head(count);
    head.X = X.leftCols(count);
    head.Xd = Xd.leftCols(count);
    head.Xdd = Xdd.leftCols(count);
    if (U) head.U = U->leftCols(count);
    if (F) head.F = F->leftCols(count);
    return head;
  }
};

/// Projected snapshots; only produced by `project`.
template <typename Scalar>
struct ReducedTrajectoryData : TrajectoryData<Scalar> {
  std::shared_ptr<const PodBasis<Scalar>> basis;
};

using TrajectoryDatad = TrajectoryData<double>;
using ReducedTrajectoryDatad = ReducedTrajectoryData<double>;

/// V^T applied to every state-like matrix; U is copied unchanged.
template <typename Scalar>
ReducedTrajectoryData<Scalar> project(const TrajectoryData<Scalar>& data,
                                      BasisHandle<Scalar> basis) {
  require(basis != nullptr, ErrorKind::kInvalidInput, "null basis");
  require(basis->n() == data.n(), ErrorKind::kInvalidInput,
          "basis rows " + std::to_string(basis->n()) +
              " != snapshot rows " + std::to_string(data.n()));
  const auto Vt = basis->V.transpose();
  ReducedTrajectoryData<Scalar> reduced;
  reduced.times = data.times;
  reduced.X = Vt * data.X;
  reduced.Xd = Vt * data.Xd;
  reduced.Xdd = Vt * data.Xdd;
  reduced.U = data.U;
  if (data.F) reduced.F = Matrix<Scalar>(Vt * *data.F);
  reduced.basis = std::move(basis);
  return reduced;
}

template <typename Scalar>
ReducedTrajectoryData<Scalar> project(const TrajectoryData<Scalar>& data,
                                      const PodBasis<Scalar>& basis) {
  return project(data, std::make_shared<const PodBasis<Scalar>>(basis));
}

/// Data and right-hand side of a linear regression  P D ~ R.
template <typename Scalar>
struct RegressionData {
  Matrix<Scalar> D;
  Matrix<Scalar> rhs;
};

/// D = [Xd; X; U] (2r+m rows), rhs = Xdd.
template <typename Scalar>
RegressionData<Scalar> assemble_opinf_data(
    const ReducedTrajectoryData<Scalar>& rdata) {
  require(rdata.samples() > 0, ErrorKind::kInvalidInput, "no samples");
  require(rdata.U.has_value(), ErrorKind::kMissingData,
          "input snapshots U are missing");
  require(rdata.Xd.size() > 0, ErrorKind::kMissingData,
          "velocity snapshots Xd are missing");
  require(rdata.Xdd.size() > 0, ErrorKind::kMissingData,
          "acceleration snapshots Xdd are missing");
  const Index r = rdata.X.rows();
  const Index m = rdata.U->rows();
  RegressionData<Scalar> out;
  out.D.resize(2 * r + m, rdata.samples());
  out.D << rdata.Xd, rdata.X, *rdata.U;
  out.rhs = rdata.Xdd;
  return out;
}

/// D = [Xdd; Xd; X] (3r rows), rhs = V^T F.
template <typename Scalar>
RegressionData<Scalar> assemble_force_data(
    const ReducedTrajectoryData<Scalar>& rdata) {
  require(rdata.samples() > 0, ErrorKind::kInvalidInput, "no samples");
  require(rdata.F.has_value(), ErrorKind::kMissingData,
          "force snapshots F are missing");
  require(rdata.Xd.size() > 0, ErrorKind::kMissingData,
          "velocity snapshots Xd are missing");
  require(rdata.Xdd.size() > 0, ErrorKind::kMissingData,
          "acceleration snapshots Xdd are missing");
  const Index r = rdata.X.rows();
  RegressionData<Scalar> out;
  out.D.resize(3 * r, rdata.samples());
  out.D << rdata.Xdd, rdata.Xd, rdata.X;
  out.rhs = *rdata.F;
  return out;
}

/// Second-order finite differences along the time axis: central in the
/// interior, one-sided three/four-point stencils at both ends.
template <typename Derived>
auto finite_difference_derivatives(const Eigen::MatrixBase<Derived>& X,
                                   typename Derived::Scalar dt) {
  using Scalar = typename Derived::Scalar;
  const Index count = X.cols();
  require(count >= 5, ErrorKind::kInsufficientData,
          "finite differences need at least 5 samples, got " +
              std::to_string(count));
  require(dt > Scalar(0), ErrorKind::kInvalidParameter, "dt must be positive");

  Matrix<Scalar> velocity(X.rows(), count);
  Matrix<Scalar> acceleration(X.rows(), count);
  const Scalar inv2dt = Scalar(1) / (Scalar(2) * dt);
  const Scalar invdt2 = Scalar(1) / (dt * dt);
  for (Index i = 1; i + 1 < count; ++i) {
    velocity.col(i) = (X.col(i + 1) - X.col(i - 1)) * inv2dt;
    acceleration.col(i) =
        (X.col(i + 1) - Scalar(2) * X.col(i) + X.col(i - 1)) * invdt2;
  }
  const Index last = count - 1;
  velocity.col(0) =
      (Scalar(-3) * X.col(0) + Scalar(4) * X.col(1) - X.col(2)) * inv2dt;
  velocity.col(last) = (Scalar(3) * X.col(last) - Scalar(4) * X.col(last - 1) +
                        X.col(last - 2)) *
                       inv2dt;
  acceleration.col(0) = (Scalar(2) * X.col(0) - Scalar(5) * X.col(1) +
                         Scalar(4) * X.col(2) - X.col(3)) *
                        invdt2;
  acceleration.col(last) =
      (Scalar(2) * X.col(last) - Scalar(5) * X.col(last - 1) +
       Scalar(4) * X.col(last - 2) - X.col(last - 3)) *
      invdt2;
  return std::pair<Matrix<Scalar>, Matrix<Scalar>>{std::move(velocity),
                                                   std::move(acceleration)};
}

}  // namespace mechrom
