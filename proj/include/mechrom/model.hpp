#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mechrom/types.hpp"

namespace mechrom {

/// Operators of M x'' + E x' + K x = B u with no structural requirements.
/// This is what the time integrator consumes; inferred models in
/// mass-normalized form are generally nonsymmetric and live here too.
template <typename Scalar>
struct SecondOrderOperators {
  Matrix<Scalar> M;
  Matrix<Scalar> E;
  Matrix<Scalar> K;
  Matrix<Scalar> B;

  Index n() const { return M.rows(); }
  Index m() const { return B.cols(); }

  void validate() const {
    const Index size = M.rows();
    require(size > 0, ErrorKind::kInvalidParameter, "empty mass operator");
    require(M.cols() == size && E.rows() == size && E.cols() == size &&
                K.rows() == size && K.cols() == size && B.rows() == size,
            ErrorKind::kInvalidParameter,
            "operator shapes disagree: M " + shape_of(M) + ", E " +
                shape_of(E) + ", K " + shape_of(K) + ", B " + shape_of(B));
  }
};

/// Mechanical model M x'' + E x' + K x = B u with symmetric M, E, K.
///
/// Symmetry is enforced at construction by replacing each of M, E, K with
/// its symmetric part. Instances are immutable.
template <typename Scalar>
class SecondOrderSystem {
 public:
  SecondOrderSystem(Matrix<Scalar> mass, Matrix<Scalar> damping,
                    Matrix<Scalar> stiffness, Matrix<Scalar> input_map,
                    std::string label = {})
      : label_(std::move(label)) {
    const Index size = mass.rows();
    require(size > 0, ErrorKind::kInvalidParameter, "state dimension is zero");
    require(input_map.cols() > 0, ErrorKind::kInvalidParameter,
            "input dimension is zero");
    require(mass.cols() == size && damping.rows() == size &&
                damping.cols() == size && stiffness.rows() == size &&
                stiffness.cols() == size && input_map.rows() == size,
            ErrorKind::kInvalidParameter,
            "operator shapes disagree: M " + shape_of(mass) + ", E " +
                shape_of(damping) + ", K " + shape_of(stiffness) + ", B " +
                shape_of(input_map));
    M_ = symmetrized(mass);
    E_ = symmetrized(damping);
    K_ = symmetrized(stiffness);
    B_ = std::move(input_map);
  }

  Index n() const { return M_.rows(); }
  Index m() const { return B_.cols(); }

  const Matrix<Scalar>& mass() const { return M_; }
  const Matrix<Scalar>& damping() const { return E_; }
  const Matrix<Scalar>& stiffness() const { return K_; }
  const Matrix<Scalar>& input_map() const { return B_; }
  const std::string& label() const { return label_; }

  SecondOrderOperators<Scalar> operators() const { return {M_, E_, K_, B_}; }

 private:
  Matrix<Scalar> M_;
  Matrix<Scalar> E_;
  Matrix<Scalar> K_;
  Matrix<Scalar> B_;
  std::string label_;
};

using SecondOrderSystemd = SecondOrderSystem<double>;

/// E = alpha_r M + beta_r K.
template <typename DerivedM, typename DerivedK>
auto rayleigh_damping(const Eigen::MatrixBase<DerivedM>& mass,
                      const Eigen::MatrixBase<DerivedK>& stiffness,
                      typename DerivedM::Scalar alpha_r,
                      typename DerivedM::Scalar beta_r) {
  using Scalar = typename DerivedM::Scalar;
  require(mass.rows() == mass.cols() && stiffness.rows() == stiffness.cols() &&
              mass.rows() == stiffness.rows(),
          ErrorKind::kInvalidParameter,
          "rayleigh damping needs equal square M and K, got " +
              shape_of(mass) + " and " + shape_of(stiffness));
  require(alpha_r >= Scalar(0) && beta_r >= Scalar(0),
          ErrorKind::kInvalidParameter,
          "rayleigh coefficients must be nonnegative");
  return Matrix<Scalar>(alpha_r * mass + beta_r * stiffness);
}

template <typename Scalar>
struct ChainParameters {
  std::vector<Scalar> masses;       // n entries
  std::vector<Scalar> stiffnesses;  // n + 1 entries, springs to both walls
  Scalar alpha_r = 0;
  Scalar beta_r = 0;
  std::vector<Index> input_nodes;
};

/// Fixed-fixed mass-spring chain: diagonal M, tridiagonal SPD K,
/// Rayleigh damping, one unit input column per entry of input_nodes.
template <typename Scalar>
SecondOrderSystem<Scalar> build_mass_spring_chain(
    const ChainParameters<Scalar>& params) {
  const auto n = static_cast<Index>(params.masses.size());
  require(n >= 1, ErrorKind::kInvalidParameter, "chain needs at least 1 mass");
  require(static_cast<Index>(params.stiffnesses.size()) == n + 1,
          ErrorKind::kInvalidParameter,
          "chain of " + std::to_string(n) + " masses needs " +
              std::to_string(n + 1) + " springs, got " +
              std::to_string(params.stiffnesses.size()));
  for (Scalar mass : params.masses) {
    require(mass > Scalar(0), ErrorKind::kInvalidParameter,
            "masses must be strictly positive");
  }
  for (Scalar k : params.stiffnesses) {
    require(k > Scalar(0), ErrorKind::kInvalidParameter,
            "stiffnesses must be strictly positive");
  }
  require(!params.input_nodes.empty(), ErrorKind::kInvalidParameter,
          "chain needs at least one input node");

  Matrix<Scalar> M = Matrix<Scalar>::Zero(n, n);
  Matrix<Scalar> K = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    M(i, i) = params.masses[i];
    K(i, i) = params.stiffnesses[i] + params.stiffnesses[i + 1];
    if (i + 1 < n) {
      K(i, i + 1) = -params.stiffnesses[i + 1];
      K(i + 1, i) = -params.stiffnesses[i + 1];
    }
  }

  const auto m = static_cast<Index>(params.input_nodes.size());
  Matrix<Scalar> B = Matrix<Scalar>::Zero(n, m);
  for (Index j = 0; j < m; ++j) {
    const Index node = params.input_nodes[j];
    require(node >= 0 && node < n, ErrorKind::kInvalidParameter,
            "input node " + std::to_string(node) + " outside [0, " +
                std::to_string(n) + ")");
    B(node, j) = Scalar(1);
  }

  Matrix<Scalar> E = rayleigh_damping(M, K, params.alpha_r, params.beta_r);
  return SecondOrderSystem<Scalar>(std::move(M), std::move(E), std::move(K),
                                   std::move(B),
                                   "chain-" + std::to_string(n));
}

/// Uniform chain shorthand: every mass and every spring identical.
template <typename Scalar>
SecondOrderSystem<Scalar> uniform_chain(Index n, Scalar mass, Scalar stiffness,
                                        Scalar alpha_r, Scalar beta_r,
                                        std::vector<Index> input_nodes) {
  require(n >= 1, ErrorKind::kInvalidParameter, "chain needs at least 1 mass");
  ChainParameters<Scalar> params;
  params.masses.assign(static_cast<std::size_t>(n), mass);
  params.stiffnesses.assign(static_cast<std::size_t>(n + 1), stiffness);
  params.alpha_r = alpha_r;
  params.beta_r = beta_r;
  params.input_nodes = std::move(input_nodes);
  return build_mass_spring_chain(params);
}

/// f = B u.
template <typename Scalar, typename Derived>
Vector<Scalar> force_at(const SecondOrderSystem<Scalar>& system,
                        const Eigen::MatrixBase<Derived>& u) {
  require(u.size() == system.m(), ErrorKind::kInvalidParameter,
          "input length " + std::to_string(u.size()) + " != m = " +
              std::to_string(system.m()));
  return system.input_map() * u;
}

}  // namespace mechrom
