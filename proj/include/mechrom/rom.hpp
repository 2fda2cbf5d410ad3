#pragma once

#include <memory>

#include "mechrom/model.hpp"
#include "mechrom/types.hpp"

namespace mechrom {

template <typename Scalar>
struct PodBasis;

/// Identity-mass reduced model x'' + E_M x' + K_M x = B_M u.
template <typename Scalar>
struct MassNormalizedRom {
  Matrix<Scalar> E_M;
  Matrix<Scalar> K_M;
  Matrix<Scalar> B_M;
  std::shared_ptr<const PodBasis<Scalar>> basis;
  Scalar lambda = 0;

  Index r() const { return K_M.rows(); }
  Index m() const { return B_M.cols(); }

  SecondOrderOperators<Scalar> operators() const {
    return {Matrix<Scalar>::Identity(r(), r()), E_M, K_M, B_M};
  }
};

/// Reduced model M x'' + E x' + K x = V^T f with M, K positive definite and
/// E positive semidefinite. The right-hand side is the projected force, so
/// the input map used for time integration is the r x r identity.
template <typename Scalar>
struct StructuredRom {
  Matrix<Scalar> M;
  Matrix<Scalar> E;
  Matrix<Scalar> K;
  std::shared_ptr<const PodBasis<Scalar>> basis;
  Scalar omega = 0;

  Index r() const { return M.rows(); }

  SecondOrderOperators<Scalar> operators() const {
    return {M, E, K, Matrix<Scalar>::Identity(r(), r())};
  }
};

/// Mass/damping/stiffness/input operators recovered from a mass-normalized
/// model. No symmetry or definiteness is implied.
template <typename Scalar>
struct SeparatedRom {
  Matrix<Scalar> M;
  Matrix<Scalar> E;
  Matrix<Scalar> K;
  Matrix<Scalar> B;
  Vector<Scalar> modal_stiffness;  // Omega^2, ascending
  Scalar mode_condition = 1;

  SecondOrderOperators<Scalar> operators() const { return {M, E, K, B}; }
};

}  // namespace mechrom
