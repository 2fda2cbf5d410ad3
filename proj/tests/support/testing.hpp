#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "mechrom/types.hpp"

namespace mechrom::testing {

/// Deterministic Gaussian matrices for test fixtures.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  MatrixXd normal(Index rows, Index cols) {
    MatrixXd a(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) a(i, j) = gauss_(engine_);
    return a;
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  Index integer(Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(engine_);
  }

  /// Orthonormal n x r matrix from a Householder QR.
  MatrixXd orthonormal(Index n, Index r) {
    Eigen::HouseholderQR<MatrixXd> qr(normal(n, r));
    return qr.householderQ() * MatrixXd::Identity(n, r);
  }

  /// Symmetric positive definite with eigenvalues in [lo, hi].
  MatrixXd spd(Index n, double lo = 0.5, double hi = 2.0) {
    const MatrixXd q = orthonormal(n, n);
    VectorXd d(n);
    for (Index i = 0; i < n; ++i) d(i) = uniform(lo, hi);
    MatrixXd s = q * d.asDiagonal() * q.transpose();
    return (s + s.transpose()) / 2;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

inline double relative_frobenius(const MatrixXd& truth, const MatrixXd& estimate) {
  return (truth - estimate).norm() / truth.norm();
}

/// Fresh empty directory below the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mechrom-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Relative path -> file contents for every regular file below `root`.
inline std::map<std::string, std::string> tree_contents(
    const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[std::filesystem::relative(entry.path(), root).generic_string()] =
        slurp(entry.path());
  }
  return files;
}

}  // namespace mechrom::testing
