#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mechrom/opinf.hpp"
#include "mechrom/rom.hpp"
#include "mechrom/snapshots.hpp"
#include "mechrom/types.hpp"

namespace mechrom {

/// Frobenius projection of (A + A^T)/2 onto {S = S^T : S >= shift I}.
template <typename Derived>
auto project_psd(const Eigen::MatrixBase<Derived>& a,
                 typename Derived::Scalar shift) {
  using Scalar = typename Derived::Scalar;
  require(a.rows() == a.cols(), ErrorKind::kInvalidInput,
          "project_psd needs a square matrix");
  require(a.allFinite(), ErrorKind::kInvalidInput, "non-finite entries");
  require(shift >= Scalar(0), ErrorKind::kInvalidParameter,
          "shift must be nonnegative");
  Matrix<Scalar> sym = symmetrized(a);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
  const Vector<Scalar>& values = solver.eigenvalues();
  if (values.size() == 0 || values.minCoeff() >= shift) return sym;
  const Matrix<Scalar>& vectors = solver.eigenvectors();
  Matrix<Scalar> out =
      vectors * values.cwiseMax(shift).asDiagonal() * vectors.transpose();
  return Matrix<Scalar>(symmetrized(out));
}

template <typename Scalar>
struct ConstrainedOptions {
  Index max_iter = 50000;
  Scalar tol_abs = Scalar(1e-9);
  Scalar tol_rel = Scalar(1e-9);
  Scalar penalty = Scalar(1);
  bool adapt_penalty = true;
  bool record_trace = false;
};

template <typename Scalar>
struct TraceRow {
  Index iteration = 0;
  Scalar objective = 0;
  Scalar primal_residual = 0;
  Scalar dual_residual = 0;
};

template <typename Scalar>
struct ConstrainedSolveReport {
  Scalar objective = 0;  // ||[M E K] D - F||_F^2 at the returned operators
  Index iterations = 0;
  Scalar primal_residual = 0;
  Scalar dual_residual = 0;
  bool converged = false;
  Scalar final_penalty = 0;
  std::vector<TraceRow<Scalar>> trace;
};

/// ||[M E K] D - F||_F^2.
template <typename Scalar>
Scalar constrained_objective(const Matrix<Scalar>& M, const Matrix<Scalar>& E,
                             const Matrix<Scalar>& K, const Matrix<Scalar>& D,
                             const Matrix<Scalar>& F) {
  const Index r = M.rows();
  return (M * D.topRows(r) + E * D.middleRows(r, r) + K * D.bottomRows(r) - F)
      .squaredNorm();
}

/// Fits symmetric (M, E, K) to  M Xdd + E Xd + K X ~ F  subject to
/// M >= omega I, K >= omega I, E >= 0, by ADMM on the splitting Z = W:
///
///   Z <- argmin ||Z D - F||^2 + rho/2 ||Z - W + Y||^2     (linear solve)
///   W <- blockwise projection of Z + Y onto the shifted PSD cones
///   Y <- Y + Z - W
///
/// Each row block of D and the right-hand side are rescaled to unit norm
/// before iterating (block-scalar scaling maps each cone onto a cone with a
/// rescaled shift). The penalty follows residual balancing. The returned
/// operators are always the projected iterate, so the definiteness bounds
/// hold whether or not the tolerances were met.
template <typename Scalar>
std::pair<StructuredRom<Scalar>, ConstrainedSolveReport<Scalar>>
infer_constrained(const Matrix<Scalar>& D, const Matrix<Scalar>& F,
                  Scalar omega, const ConstrainedOptions<Scalar>& options = {},
                  BasisHandle<Scalar> basis = {}) {
  const Index r = F.rows();
  require(r >= 1 && D.rows() == 3 * r, ErrorKind::kInvalidInput,
          "data matrix must have 3r = " + std::to_string(3 * r) +
              " rows, got " + std::to_string(D.rows()));
  require(D.cols() == F.cols() && D.cols() > 0, ErrorKind::kInvalidInput,
          "data and force sample counts differ or are zero");
  require(D.allFinite() && F.allFinite(), ErrorKind::kInvalidInput,
          "regression data has non-finite entries");
  require(omega > Scalar(0), ErrorKind::kInvalidParameter,
          "omega must be positive");
  require(options.max_iter >= 1 && options.penalty > Scalar(0) &&
              options.tol_abs >= Scalar(0) && options.tol_rel >= Scalar(0),
          ErrorKind::kInvalidParameter, "invalid solver options");

  // Block scaling: Dn_b = D_b / c_b, Fn = F / f, W_b = Z_b c_b / f.
  std::array<Scalar, 3> block_scale{};
  for (Index b = 0; b < 3; ++b) {
    const Scalar norm = D.middleRows(b * r, r).norm();
    block_scale[static_cast<std::size_t>(b)] = norm > Scalar(0) ? norm : Scalar(1);
  }
  const Scalar force_norm = F.norm();
  const Scalar force_scale = force_norm > Scalar(0) ? force_norm : Scalar(1);
  const std::array<Scalar, 3> base_shift{omega, Scalar(0), omega};
  std::array<Scalar, 3> shift{};
  Matrix<Scalar> Dn(3 * r, D.cols());
  for (Index b = 0; b < 3; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    Dn.middleRows(b * r, r) = D.middleRows(b * r, r) / block_scale[bi];
    shift[bi] = base_shift[bi] * block_scale[bi] / force_scale;
  }
  const Matrix<Scalar> Fn = F / force_scale;

  const Matrix<Scalar> gram = Dn * Dn.transpose();         // 3r x 3r
  const Matrix<Scalar> cross = Fn * Dn.transpose();        // r x 3r
  const Scalar force_energy = Fn.squaredNorm();

  auto project = [&](const Matrix<Scalar>& z) {
    Matrix<Scalar> w(r, 3 * r);
    for (Index b = 0; b < 3; ++b)
      w.middleCols(b * r, r) =
          project_psd(z.middleCols(b * r, r), shift[static_cast<std::size_t>(b)]);
    return w;
  };
  auto scaled_objective = [&](const Matrix<Scalar>& w) {
    return std::max(Scalar(0), (w * gram * w.transpose()).trace() -
                                   Scalar(2) * (w * cross.transpose()).trace() +
                                   force_energy);
  };

  // Warm start from the unconstrained minimum-norm fit when it exists.
  Matrix<Scalar> W;
  try {
    W = project(solve_tikhonov<Scalar>(Dn, Fn, Scalar(0)).first);
  } catch (const Error&) {
    W = project(Matrix<Scalar>::Zero(r, 3 * r));
  }
  Matrix<Scalar> Y = Matrix<Scalar>::Zero(r, 3 * r);
  Matrix<Scalar> Z = W;

  Scalar rho = options.penalty;
  Eigen::LLT<Matrix<Scalar>> factor;
  auto refactor = [&] {
    Matrix<Scalar> h = Scalar(2) * gram;
    h.diagonal().array() += rho;
    factor.compute(h);
  };
  refactor();

  ConstrainedSolveReport<Scalar> report;
  const Scalar root_dim = std::sqrt(Scalar(r * 3 * r));
  for (Index it = 1; it <= options.max_iter; ++it) {
    const Matrix<Scalar> rhs = Scalar(2) * cross + rho * (W - Y);
    Z = factor.solve(rhs.transpose()).transpose();
    const Matrix<Scalar> W_prev = W;
    W = project(Z + Y);
    Y += Z - W;

    const Scalar primal = (Z - W).norm();
    const Scalar dual = rho * (W - W_prev).norm();
    report.iterations = it;
    report.primal_residual = primal;
    report.dual_residual = dual;
    if (options.record_trace) {
      report.trace.push_back({it, scaled_objective(W) * force_scale * force_scale,
                              primal, dual});
    }

    const Scalar eps_primal = options.tol_abs * root_dim +
                              options.tol_rel * std::max(Z.norm(), W.norm());
    const Scalar eps_dual =
        options.tol_abs * root_dim + options.tol_rel * rho * Y.norm();
    if (primal <= eps_primal && dual <= eps_dual) {
      report.converged = true;
      break;
    }

    if (options.adapt_penalty) {
      constexpr Scalar kRatio = 10;
      constexpr Scalar kFactor = 2;
      if (primal > kRatio * dual) {
        rho *= kFactor;
        Y /= kFactor;
        refactor();
      } else if (dual > kRatio * primal) {
        rho /= kFactor;
        Y *= kFactor;
        refactor();
      }
    }
  }
  report.final_penalty = rho;

  StructuredRom<Scalar> rom;
  rom.omega = omega;
  rom.basis = std::move(basis);
  const auto unscale = [&](Index b) {
    const auto bi = static_cast<std::size_t>(b);
    const Matrix<Scalar> block =
        W.middleCols(b * r, r) * (force_scale / block_scale[bi]);
    // Rebuilding V diag(d) V^T leaves eigenvalue errors near eps ||block||,
    // so a zero bound alone can come back slightly indefinite.
    const Scalar floor = Scalar(16 * r) *
                         std::numeric_limits<Scalar>::epsilon() * block.norm();
    return project_psd(block, std::max(base_shift[bi], floor));
  };
  rom.M = unscale(0);
  rom.E = unscale(1);
  rom.K = unscale(2);
  report.objective = constrained_objective(rom.M, rom.E, rom.K, D, F);
  return {std::move(rom), std::move(report)};
}

template <typename Scalar>
std::pair<StructuredRom<Scalar>, ConstrainedSolveReport<Scalar>>
infer_constrained(const RegressionData<Scalar>& data, Scalar omega,
                  const ConstrainedOptions<Scalar>& options = {},
                  BasisHandle<Scalar> basis = {}) {
  return infer_constrained(data.D, data.rhs, omega, options, std::move(basis));
}

}  // namespace mechrom
