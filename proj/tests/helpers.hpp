#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <Eigen/Core>

#include "dgmsm/rng.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, dgmsm::Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

/// Rows on the probability simplex.
inline Eigen::MatrixXd random_simplex(Eigen::Index rows, Eigen::Index cols, dgmsm::Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = 0.1 + rng.uniform();
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

inline double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dgmsm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
