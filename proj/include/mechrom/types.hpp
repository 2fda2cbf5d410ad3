#pragma once

#include <Eigen/Dense>

#include <string>
#include <type_traits>

#include "mechrom/errors.hpp"

namespace mechrom {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Non-deduced vector parameter, so Eigen expressions convert implicitly.
template <typename Scalar>
using VectorArg = std::type_identity_t<Vector<Scalar>>;

template <typename Scalar>
using MatrixArg = std::type_identity_t<Matrix<Scalar>>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& a) {
  return ((a + a.transpose()) / typename Derived::Scalar(2)).eval();
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
std::string shape_of(const Eigen::EigenBase<Derived>& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

/// Eigenvalues of the symmetric part, ascending.
template <typename Derived>
auto symmetric_eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(symmetrized(a),
                                                       Eigen::EigenvaluesOnly);
  return Vector<Scalar>(solver.eigenvalues());
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  return symmetric_eigenvalues(a).minCoeff();
}

}  // namespace mechrom
