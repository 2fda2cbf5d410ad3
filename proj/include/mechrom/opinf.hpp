#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mechrom/eval.hpp"
#include "mechrom/newmark.hpp"
#include "mechrom/pod.hpp"
#include "mechrom/rom.hpp"
#include "mechrom/snapshots.hpp"
#include "mechrom/types.hpp"

namespace mechrom {

template <typename Scalar>
struct SolveReport {
  Scalar residual = 0;   // ||P D - rhs||_F
  Scalar condition = 1;  // sigma_max / sigma_min of D, +inf if singular
  Index rank_estimate = 0;
  Scalar lambda = 0;
  std::string solver = "svd";
  bool rank_deficient = false;
  bool underdetermined = false;  // fewer samples than unknowns per row
};

/// Minimizer of ||P D - R||_F^2 + lambda ||P||_F^2 through the thin SVD
/// D^T = U S W^T:  P = R U diag(s / (s^2 + lambda)) W^T.
///
/// At lambda = 0 singular values below 1e-12 sigma_max are dropped, which
/// yields the minimum-norm least-squares solution.
template <typename Scalar>
std::pair<Matrix<Scalar>, SolveReport<Scalar>> solve_tikhonov(
    const Matrix<Scalar>& D, const Matrix<Scalar>& rhs, Scalar lambda) {
  require(lambda >= Scalar(0) && std::isfinite(static_cast<double>(lambda)),
          ErrorKind::kInvalidParameter, "lambda must be finite and >= 0");
  require(D.cols() == rhs.cols(), ErrorKind::kInvalidInput,
          "data has " + std::to_string(D.cols()) + " samples, rhs has " +
              std::to_string(rhs.cols()));
  require(D.cols() > 0 && D.rows() > 0, ErrorKind::kInvalidInput,
          "empty regression data");
  require(D.allFinite() && rhs.allFinite(), ErrorKind::kInvalidInput,
          "regression data has non-finite entries");

  Eigen::BDCSVD<Matrix<Scalar>> svd(D.transpose(),
                                    Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector<Scalar>& s = svd.singularValues();
  const Scalar s_max = s.size() > 0 ? s(0) : Scalar(0);
  require(s_max > Scalar(0) || lambda > Scalar(0), ErrorKind::kDegenerateInput,
          "data matrix is identically zero");

  SolveReport<Scalar> report;
  report.lambda = lambda;
  const Scalar cutoff = Scalar(1e-12) * s_max;
  Vector<Scalar> filter(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++report.rank_estimate;
    if (lambda > Scalar(0)) {
      filter(i) = s(i) / (s(i) * s(i) + lambda);
    } else {
      filter(i) = s(i) > cutoff ? Scalar(1) / s(i) : Scalar(0);
    }
  }
  const Scalar s_min = s.size() > 0 ? s(s.size() - 1) : Scalar(0);
  report.condition = (s_min > Scalar(0) && D.cols() >= D.rows())
                         ? s_max / s_min
                         : std::numeric_limits<Scalar>::infinity();
  report.rank_deficient = report.rank_estimate < D.rows();
  report.underdetermined = D.cols() < D.rows();

  Matrix<Scalar> P = (rhs * svd.matrixU()) * filter.asDiagonal() *
                     svd.matrixV().transpose();
  report.residual = (P * D - rhs).norm();
  return {std::move(P), report};
}

/// Learns x'' + E_M x' + K_M x = B_M u from D = [Xd; X; U], rhs = Xdd.
/// The regression variable is P = [-E_M, -K_M, B_M].
template <typename Scalar>
std::pair<MassNormalizedRom<Scalar>, SolveReport<Scalar>> infer(
    const Matrix<Scalar>& D, const Matrix<Scalar>& rhs, Scalar lambda,
    BasisHandle<Scalar> basis = {}) {
  const Index r = rhs.rows();
  require(r >= 1 && D.rows() > 2 * r, ErrorKind::kInvalidInput,
          "data matrix must have 2r + m rows with m >= 1; got " +
              std::to_string(D.rows()) + " rows for r = " + std::to_string(r));
  auto [P, report] = solve_tikhonov(D, rhs, lambda);
  MassNormalizedRom<Scalar> rom;
  rom.E_M = -P.leftCols(r);
  rom.K_M = -P.middleCols(r, r);
  rom.B_M = P.rightCols(D.rows() - 2 * r);
  rom.basis = std::move(basis);
  rom.lambda = lambda;
  return {std::move(rom), report};
}

template <typename Scalar>
std::pair<MassNormalizedRom<Scalar>, SolveReport<Scalar>> infer(
    const RegressionData<Scalar>& data, Scalar lambda,
    BasisHandle<Scalar> basis = {}) {
  return infer(data.D, data.rhs, lambda, std::move(basis));
}

template <typename Scalar>
struct LambdaCandidate {
  Scalar lambda = 0;
  Scalar train_residual = 0;
  Scalar validation_error = 0;  // max relative state error, +inf if unstable
  Scalar operator_norm = 0;     // ||P||_F
};

/// Raised when every candidate diverges on the validation window.
template <typename Scalar>
class NoViableLambdaError : public Error {
 public:
  explicit NoViableLambdaError(std::vector<LambdaCandidate<Scalar>> table)
      : Error(ErrorKind::kNoViableLambda,
              "every regularization candidate diverged on the validation "
              "window"),
        table_(std::move(table)) {}

  const std::vector<LambdaCandidate<Scalar>>& table() const { return table_; }

 private:
  std::vector<LambdaCandidate<Scalar>> table_;
};

template <typename Scalar>
struct LambdaSelection {
  Scalar lambda = 0;
  std::vector<LambdaCandidate<Scalar>> table;
};

/// Max relative state error of a mass-normalized model replayed over a
/// reduced trajectory, starting from its first snapshot.
template <typename Scalar>
Scalar replay_error(const MassNormalizedRom<Scalar>& rom,
                    const ReducedTrajectoryData<Scalar>& window,
                    const IntegratorConfig<Scalar>& scheme) {
  require(window.U.has_value(), ErrorKind::kMissingData,
          "validation window has no input snapshots");
  if (window.samples() < 2) return Scalar(0);
  IntegratorConfig<Scalar> config = scheme;
  config.dt = window.time_step();
  config.t_end = config.dt * Scalar(window.samples());
  try {
    const Matrix<Scalar> forces = rom.B_M * *window.U;
    const auto trajectory =
        replay(rom.operators(), forces, Vector<Scalar>(window.X.col(0)),
               Vector<Scalar>(window.Xd.col(0)), window.times(0), config);
    return relative_error(window.X, trajectory.X).max_eps;
  } catch (const Error& error) {
    if (error.kind() == ErrorKind::kSingularOperator)
      return std::numeric_limits<Scalar>::infinity();
    throw;
  }
}

/// Fits one model per grid value and keeps the one with the smallest
/// validation error. Exact ties go to the larger lambda.
template <typename Scalar>
LambdaSelection<Scalar> select_lambda(
    const Matrix<Scalar>& D, const Matrix<Scalar>& rhs,
    const std::vector<Scalar>& grid,
    const ReducedTrajectoryData<Scalar>& validation,
    const IntegratorConfig<Scalar>& scheme = {}) {
  require(!grid.empty(), ErrorKind::kInvalidParameter, "empty lambda grid");
  LambdaSelection<Scalar> selection;
  std::optional<std::size_t> best;
  for (Scalar lambda : grid) {
    auto [rom, report] = infer(D, rhs, lambda, validation.basis);
    LambdaCandidate<Scalar> row;
    row.lambda = lambda;
    row.train_residual = report.residual;
    row.operator_norm = std::sqrt(rom.E_M.squaredNorm() +
                                  rom.K_M.squaredNorm() +
                                  rom.B_M.squaredNorm());
    row.validation_error = replay_error(rom, validation, scheme);
    if (!std::isfinite(static_cast<double>(row.validation_error)))
      row.validation_error = std::numeric_limits<Scalar>::infinity();
    selection.table.push_back(row);

    if (!std::isfinite(static_cast<double>(row.validation_error))) continue;
    const std::size_t index = selection.table.size() - 1;
    if (!best) {
      best = index;
      continue;
    }
    const auto& incumbent = selection.table[*best];
    if (row.validation_error < incumbent.validation_error ||
        (row.validation_error == incumbent.validation_error &&
         row.lambda > incumbent.lambda)) {
      best = index;
    }
  }
  if (!best) throw NoViableLambdaError<Scalar>(selection.table);
  selection.lambda = selection.table[*best].lambda;
  return selection;
}

/// Splits a mass-normalized model into (M, E, K, B) through its modes
/// K_M Phi = Phi Omega^2:
///   K = Phi^{-T} Omega^2 Phi^{-1},  M = K K_M^{-1},  E = M E_M,  B = M B_M.
/// Mode shapes are scaled to unit Euclidean length.
template <typename Scalar>
SeparatedRom<Scalar> separate_operators(const MassNormalizedRom<Scalar>& rom) {
  const Index r = rom.r();
  require(r >= 1 && rom.K_M.cols() == r && rom.E_M.rows() == r &&
              rom.E_M.cols() == r && rom.B_M.rows() == r,
          ErrorKind::kInvalidInput, "inconsistent operator shapes");
  require(rom.K_M.allFinite() && rom.E_M.allFinite() && rom.B_M.allFinite(),
          ErrorKind::kInvalidInput, "non-finite operators");

  Eigen::EigenSolver<Matrix<Scalar>> solver(rom.K_M, true);
  require(solver.info() == Eigen::Success, ErrorKind::kNotSeparable,
          "eigenvalue iteration did not converge");
  const auto& values = solver.eigenvalues();
  const Scalar scale = values.cwiseAbs().maxCoeff();

  std::string spectrum;
  bool separable = scale > Scalar(0);
  for (Index i = 0; i < r; ++i) {
    spectrum += (i ? ", " : "") + std::to_string(static_cast<double>(values(i).real())) +
                (values(i).imag() >= 0 ? "+" : "") +
                std::to_string(static_cast<double>(values(i).imag())) + "i";
    if (std::abs(values(i).imag()) > Scalar(1e-10) * scale ||
        values(i).real() <= Scalar(0))
      separable = false;
  }
  require(separable, ErrorKind::kNotSeparable,
          "stiffness operator needs real positive eigenvalues; got [" +
              spectrum + "]");

  std::vector<Index> order(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return values(a).real() < values(b).real();
  });

  Matrix<Scalar> modes(r, r);
  Vector<Scalar> omega2(r);
  for (Index j = 0; j < r; ++j) {
    const Index source = order[static_cast<std::size_t>(j)];
    omega2(j) = values(source).real();
    Vector<Scalar> shape = solver.eigenvectors().col(source).real();
    const Scalar length = shape.norm();
    require(length > Scalar(0), ErrorKind::kIllConditionedModes,
            "zero mode shape");
    shape /= length;
    Index pivot = 0;
    shape.cwiseAbs().maxCoeff(&pivot);
    if (shape(pivot) < Scalar(0)) shape = -shape;
    modes.col(j) = shape;
  }

  SeparatedRom<Scalar> out;
  out.modal_stiffness = omega2;
  out.mode_condition = condition_number(modes);
  require(out.mode_condition <= Scalar(1e12), ErrorKind::kIllConditionedModes,
          "mode shape matrix condition " +
              std::to_string(static_cast<double>(out.mode_condition)) +
              " exceeds 1e12");

  Eigen::PartialPivLU<Matrix<Scalar>> modes_lu(modes);
  const Matrix<Scalar> modes_inv = modes_lu.inverse();
  out.K = symmetrized(modes_inv.transpose() * omega2.asDiagonal() * modes_inv);
  // M = K K_M^{-1}  <=>  K_M^T M^T = K^T
  out.M = rom.K_M.transpose().partialPivLu().solve(out.K.transpose()).transpose();
  out.E = out.M * rom.E_M;
  out.B = out.M * rom.B_M;
  return out;
}

/// Frobenius-nearest symmetric positive semidefinite matrix: the symmetric
/// part with negative eigenvalues clipped to zero, plus shift * I.
template <typename Derived>
auto nearest_spd(const Eigen::MatrixBase<Derived>& a,
                 typename Derived::Scalar shift = 0) {
  using Scalar = typename Derived::Scalar;
  require(a.rows() == a.cols(), ErrorKind::kInvalidInput,
          "nearest_spd needs a square matrix");
  require(a.allFinite(), ErrorKind::kInvalidInput, "non-finite entries");
  require(shift >= Scalar(0), ErrorKind::kInvalidParameter,
          "shift must be nonnegative");
  const Matrix<Scalar> sym = symmetrized(a);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
  const Vector<Scalar>& values = solver.eigenvalues();
  if (values.size() == 0 || (values.minCoeff() >= Scalar(0) && shift == 0))
    return sym;
  const Matrix<Scalar>& vectors = solver.eigenvectors();
  Matrix<Scalar> out =
      vectors * values.cwiseMax(Scalar(0)).asDiagonal() * vectors.transpose();
  out = symmetrized(out);
  out.diagonal().array() += shift;
  return out;
}

}  // namespace mechrom
