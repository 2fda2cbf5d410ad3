#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <variant>

#include "mechrom/model.hpp"
#include "mechrom/rom.hpp"
#include "mechrom/types.hpp"

namespace mechrom {

/// Orthonormal projection basis V (n x r) and the full singular spectrum of
/// the snapshot matrix it was computed from.
template <typename Scalar>
struct PodBasis {
  Matrix<Scalar> V;
  Vector<Scalar> sigma;  // min(n, N) values, nonincreasing

  Index n() const { return V.rows(); }
  Index r() const { return V.cols(); }

  /// Basis restricted to its leading `rank` columns.
  PodBasis truncated(Index rank) const {
    require(rank >= 1 && rank <= r(), ErrorKind::kInvalidParameter,
            "rank " + std::to_string(rank) + " outside [1, " +
                std::to_string(r()) + "]");
    return PodBasis{V.leftCols(rank), sigma};
  }

  /// The identity basis of dimension n, which makes projection a no-op.
  static PodBasis identity(Index n) {
    return PodBasis{Matrix<Scalar>::Identity(n, n), Vector<Scalar>::Ones(n)};
  }
};

using PodBasisd = PodBasis<double>;

template <typename Scalar>
using BasisHandle = std::shared_ptr<const PodBasis<Scalar>>;

struct FixedRank {
  Index rank;
};

/// Smallest r with sigma_{r+1} / sigma_1 <= tol.
template <typename Scalar>
struct SingularValueRatio {
  Scalar tol;
};

/// Smallest r whose discarded energy sum_{i>r} sigma_i^2 / sum sigma_i^2
/// is at most tol.
template <typename Scalar>
struct CumulativeEnergy {
  Scalar tol;
};

template <typename Scalar>
using BasisSelector =
    std::variant<FixedRank, SingularValueRatio<Scalar>, CumulativeEnergy<Scalar>>;

template <typename Scalar>
Index select_rank(const Vector<Scalar>& sigma,
                  const BasisSelector<Scalar>& selector) {
  const Index available = sigma.size();
  require(available >= 1, ErrorKind::kDegenerateInput, "empty spectrum");
  if (const auto* fixed = std::get_if<FixedRank>(&selector)) {
    require(fixed->rank >= 1 && fixed->rank <= available,
            ErrorKind::kInvalidParameter,
            "rank " + std::to_string(fixed->rank) + " outside [1, " +
                std::to_string(available) + "]");
    return fixed->rank;
  }
  if (const auto* ratio = std::get_if<SingularValueRatio<Scalar>>(&selector)) {
    require(ratio->tol > Scalar(0) && ratio->tol < Scalar(1),
            ErrorKind::kInvalidParameter, "tolerance must lie in (0, 1)");
    for (Index r = 1; r < available; ++r) {
      if (sigma(r) / sigma(0) <= ratio->tol) return r;
    }
    return available;
  }
  const auto& energy = std::get<CumulativeEnergy<Scalar>>(selector);
  require(energy.tol > Scalar(0) && energy.tol < Scalar(1),
          ErrorKind::kInvalidParameter, "tolerance must lie in (0, 1)");
  const Scalar total = sigma.squaredNorm();
  Scalar tail = total;
  for (Index r = 1; r <= available; ++r) {
    tail -= sigma(r - 1) * sigma(r - 1);
    if (std::max(tail, Scalar(0)) / total <= energy.tol) return r;
  }
  return available;
}

/// Leading left singular vectors of the snapshot matrix X.
///
/// Each returned column is sign-normalized so that its entry of largest
/// magnitude is nonnegative.
template <typename Derived>
auto compute_basis(const Eigen::MatrixBase<Derived>& snapshots,
                   const BasisSelector<typename Derived::Scalar>& selector) {
  using Scalar = typename Derived::Scalar;
  require(snapshots.size() > 0, ErrorKind::kDegenerateInput,
          "empty snapshot matrix");
  require(snapshots.allFinite(), ErrorKind::kInvalidInput,
          "snapshot matrix has non-finite entries");
  require(snapshots.cwiseAbs().maxCoeff() > Scalar(0),
          ErrorKind::kDegenerateInput, "snapshot matrix is identically zero");

  Eigen::BDCSVD<Matrix<Scalar>> svd(snapshots.derived(), Eigen::ComputeThinU);
  Vector<Scalar> sigma = svd.singularValues();
  const Index rank = select_rank<Scalar>(sigma, selector);

  Matrix<Scalar> V = svd.matrixU().leftCols(rank);
  for (Index j = 0; j < rank; ++j) {
    Index pivot = 0;
    V.col(j).cwiseAbs().maxCoeff(&pivot);
    if (V(pivot, j) < Scalar(0)) V.col(j) = -V.col(j);
  }
  return PodBasis<Scalar>{std::move(V), std::move(sigma)};
}

/// ||X - V V^T X||_F.
template <typename Derived, typename Scalar>
Scalar projection_error(const Eigen::MatrixBase<Derived>& snapshots,
                        const PodBasis<Scalar>& basis) {
  require(basis.r() >= 1, ErrorKind::kInvalidParameter,
          "basis rank must be at least 1");
  require(snapshots.rows() == basis.n(), ErrorKind::kInvalidInput,
          "snapshot rows " + std::to_string(snapshots.rows()) +
              " != basis rows " + std::to_string(basis.n()));
  const Matrix<Scalar> coefficients = basis.V.transpose() * snapshots;
  return (snapshots - basis.V * coefficients).norm();
}

/// Galerkin reduction V^T M V, V^T E V, V^T K V, V^T B.
template <typename Scalar>
SecondOrderSystem<Scalar> intrusive_reduce(
    const SecondOrderSystem<Scalar>& system, const PodBasis<Scalar>& basis) {
  require(system.n() == basis.n(), ErrorKind::kInvalidInput,
          "system dimension " + std::to_string(system.n()) +
              " != basis rows " + std::to_string(basis.n()));
  const auto& V = basis.V;
  return SecondOrderSystem<Scalar>(
      V.transpose() * system.mass() * V, V.transpose() * system.damping() * V,
      V.transpose() * system.stiffness() * V, V.transpose() * system.input_map(),
      system.label() + "-pod" + std::to_string(basis.r()));
}

/// 2-norm condition number, +inf when singular.
template <typename Derived>
typename Derived::Scalar condition_number(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a.derived());
  const auto& s = svd.singularValues();
  if (s.size() == 0) return Scalar(1);
  const Scalar smallest = s(s.size() - 1);
  if (smallest <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return s(0) / smallest;
}

/// M~^{-1} E~, M~^{-1} K~, M~^{-1} B~ of a (reduced) system. This is the
/// intrusive counterpart of the operators learned by `infer`.
template <typename Scalar>
MassNormalizedRom<Scalar> mass_normalized_form(
    const SecondOrderSystem<Scalar>& reduced, BasisHandle<Scalar> basis = {}) {
  const Scalar condition = condition_number(reduced.mass());
  require(condition <= Scalar(1e14), ErrorKind::kSingularOperator,
          "reduced mass matrix is numerically singular (condition " +
              std::to_string(static_cast<double>(condition)) + ")");
  const auto lu = reduced.mass().partialPivLu();
  MassNormalizedRom<Scalar> rom;
  rom.E_M = lu.solve(reduced.damping());
  rom.K_M = lu.solve(reduced.stiffness());
  rom.B_M = lu.solve(reduced.input_map());
  rom.basis = std::move(basis);
  rom.lambda = Scalar(0);
  return rom;
}

}  // namespace mechrom
