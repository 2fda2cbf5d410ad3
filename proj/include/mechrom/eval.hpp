#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <complex>
#include <limits>
#include <vector>

#include "mechrom/pod.hpp"
#include "mechrom/rom.hpp"
#include "mechrom/types.hpp"

namespace mechrom {

template <typename Scalar>
struct ErrorSeries {
  Vector<Scalar> times;
  Vector<Scalar> eps;
  Scalar max_eps = 0;
  Scalar phase_split = 0;  // end of the training window
};

/// eps_i = ||x(t_i) - x_rom(t_i)||_2 / max_t ||x(t)||_2 over all columns.
/// The ROM trajectory must already be lifted to full dimension.
template <typename DerivedA, typename DerivedB>
auto relative_error(const Eigen::MatrixBase<DerivedA>& reference,
                    const Eigen::MatrixBase<DerivedB>& approximation) {
  using Scalar = typename DerivedA::Scalar;
  require(reference.rows() == approximation.rows() &&
              reference.cols() == approximation.cols(),
          ErrorKind::kInvalidInput,
          "trajectory shapes differ: " + shape_of(reference) + " vs " +
              shape_of(approximation));
  require(reference.cols() > 0, ErrorKind::kInvalidInput, "empty trajectory");
  const Scalar scale = reference.colwise().norm().maxCoeff();
  require(scale > Scalar(0), ErrorKind::kDegenerateInput,
          "reference trajectory is identically zero");
  ErrorSeries<Scalar> series;
  series.eps = ((reference - approximation).colwise().norm() / scale)
                   .transpose()
                   .eval();
  // NaN compares false everywhere; surface divergence as +inf.
  for (Index i = 0; i < series.eps.size(); ++i) {
    if (!std::isfinite(static_cast<double>(series.eps(i))))
      series.eps(i) = std::numeric_limits<Scalar>::infinity();
  }
  series.max_eps = series.eps.maxCoeff();
  return series;
}

template <typename DerivedA, typename DerivedB, typename Scalar>
ErrorSeries<Scalar> relative_error(const Eigen::MatrixBase<DerivedA>& reference,
                                   const Eigen::MatrixBase<DerivedB>& approximation,
                                   const Vector<Scalar>& times,
                                   Scalar phase_split) {
  auto series = relative_error(reference, approximation);
  require(times.size() == series.eps.size(), ErrorKind::kInvalidInput,
          "time grid length differs from trajectory length");
  series.times = times;
  series.phase_split = phase_split;
  return series;
}

template <typename Scalar>
struct OperatorDistances {
  Scalar damping = 0;    // ||M~^{-1} E~ - E_M||_F
  Scalar stiffness = 0;  // ||M~^{-1} K~ - K_M||_F
  Scalar input = 0;      // ||M~^{-1} B~ - B_M||_F
  Scalar damping_relative = 0;
  Scalar stiffness_relative = 0;
  Scalar input_relative = 0;
};

template <typename Scalar>
bool same_basis(const MassNormalizedRom<Scalar>& a,
                const MassNormalizedRom<Scalar>& b) {
  if (a.basis == b.basis) return true;
  if (!a.basis || !b.basis) return false;
  return a.basis->V.rows() == b.basis->V.rows() &&
         a.basis->V.cols() == b.basis->V.cols() && a.basis->V == b.basis->V;
}

template <typename Scalar>
OperatorDistances<Scalar> operator_closeness(
    const MassNormalizedRom<Scalar>& oracle,
    const MassNormalizedRom<Scalar>& inferred) {
  require(same_basis(oracle, inferred), ErrorKind::kInvalidComparison,
          "models were built on different bases");
  require(oracle.E_M.rows() == inferred.E_M.rows() &&
              oracle.E_M.cols() == inferred.E_M.cols() &&
              oracle.K_M.rows() == inferred.K_M.rows() &&
              oracle.K_M.cols() == inferred.K_M.cols() &&
              oracle.B_M.rows() == inferred.B_M.rows() &&
              oracle.B_M.cols() == inferred.B_M.cols(),
          ErrorKind::kInvalidComparison, "operator shapes differ");
  auto relative = [](Scalar distance, Scalar scale) {
    return scale > Scalar(0) ? distance / scale
                             : (distance > Scalar(0)
                                    ? std::numeric_limits<Scalar>::infinity()
                                    : Scalar(0));
  };
  OperatorDistances<Scalar> d;
  d.damping = (oracle.E_M - inferred.E_M).norm();
  d.stiffness = (oracle.K_M - inferred.K_M).norm();
  d.input = (oracle.B_M - inferred.B_M).norm();
  d.damping_relative = relative(d.damping, oracle.E_M.norm());
  d.stiffness_relative = relative(d.stiffness, oracle.K_M.norm());
  d.input_relative = relative(d.input, oracle.B_M.norm());
  return d;
}

namespace detail {

/// Root of m s^2 + e s + k nearest to `guess`.
template <typename Scalar>
std::complex<Scalar> nearest_scalar_root(Scalar m, Scalar e, Scalar k,
                                         std::complex<Scalar> guess) {
  using C = std::complex<Scalar>;
  const Scalar disc = e * e - Scalar(4) * m * k;
  C first, second;
  if (disc < Scalar(0)) {
    const Scalar im = std::sqrt(-disc) / (Scalar(2) * m);
    first = C(-e / (Scalar(2) * m), im);
    second = std::conj(first);
  } else {
    // Cancellation-free pair: q = -(e + sign(e) sqrt(disc)) / 2.
    const Scalar q = -(e + std::copysign(std::sqrt(disc), e)) / Scalar(2);
    first = C(q / m);
    second = q != Scalar(0) ? C(k / q) : C(0);
  }
  return std::abs(first - guess) <= std::abs(second - guess) ? first : second;
}

}  // namespace detail

/// Roots of det(s^2 M + s E + K) = 0, sorted by real part, then imaginary
/// part.
///
/// The QZ algorithm runs on the pencil
///   [0, I; -K, -E] - s [I, 0; 0, M],
/// which never inverts M. For symmetric operators each root s is then
/// refined with the null vector x of s^2 M + s E + K to the root of
///   (x^* M x) s^2 + (x^* E x) s + (x^* K x) = 0
/// nearest s (the quadratic Rayleigh functional). The refinement is exact for
/// exact eigenvectors and keeps roots of semidefinite pencils in the closed
/// left half plane even when M is badly conditioned.
template <typename Scalar>
std::vector<std::complex<Scalar>> pencil_spectrum(const Matrix<Scalar>& M,
                                                  const Matrix<Scalar>& E,
                                                  const Matrix<Scalar>& K) {
  using C = std::complex<Scalar>;
  using ComplexMatrix = Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>;
  const Index r = M.rows();
  require(r > 0 && M.cols() == r && E.rows() == r && E.cols() == r &&
              K.rows() == r && K.cols() == r,
          ErrorKind::kInvalidParameter, "pencil operators must be equal square");
  Eigen::PartialPivLU<Matrix<Scalar>> lu(M);
  require(lu.rcond() > std::numeric_limits<Scalar>::epsilon(),
          ErrorKind::kSingularOperator, "mass matrix is singular");

  Matrix<Scalar> a = Matrix<Scalar>::Zero(2 * r, 2 * r);
  Matrix<Scalar> b = Matrix<Scalar>::Zero(2 * r, 2 * r);
  a.topRightCorner(r, r).setIdentity();
  a.bottomLeftCorner(r, r) = -K;
  a.bottomRightCorner(r, r) = -E;
  b.topLeftCorner(r, r).setIdentity();
  b.bottomRightCorner(r, r) = M;
  Eigen::GeneralizedEigenSolver<Matrix<Scalar>> solver(a, b, false);
  require(solver.info() == Eigen::Success, ErrorKind::kSingularOperator,
          "eigenvalue iteration did not converge");

  const bool symmetric =
      M == M.transpose() && E == E.transpose() && K == K.transpose();
  const ComplexMatrix Mc = M.template cast<C>(), Ec = E.template cast<C>(),
                      Kc = K.template cast<C>();
  std::vector<C> values;
  values.reserve(static_cast<std::size_t>(2 * r));
  for (Index i = 0; i < 2 * r; ++i) {
    C value = solver.eigenvalues()(i);
    if (symmetric && std::isfinite(static_cast<double>(std::abs(value)))) {
      const ComplexMatrix P = value * value * Mc + value * Ec + Kc;
      Eigen::JacobiSVD<ComplexMatrix> svd(P, Eigen::ComputeFullV);
      const Vector<Scalar> re = svd.matrixV().col(r - 1).real();
      const Vector<Scalar> im = svd.matrixV().col(r - 1).imag();
      auto form = [&](const Matrix<Scalar>& op) {
        return re.dot(op * re) + im.dot(op * im);
      };
      const Scalar m = form(M);
      if (m > Scalar(0))
        value = detail::nearest_scalar_root(m, form(E), form(K), value);
    }
    values.push_back(value);
  }
  std::sort(values.begin(), values.end(), [](const auto& x, const auto& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return values;
}

template <typename Scalar>
bool is_stable(const Matrix<Scalar>& M, const Matrix<Scalar>& E,
               const Matrix<Scalar>& K, Scalar tol = Scalar(1e-10)) {
  for (const auto& value : pencil_spectrum(M, E, K)) {
    if (value.real() > tol) return false;
  }
  return true;
}

}  // namespace mechrom
