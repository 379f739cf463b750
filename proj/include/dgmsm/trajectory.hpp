#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

#include "dgmsm/potential.hpp"

namespace dgmsm {

/// N x d configurations, one frame per row.
using Frames = Eigen::MatrixXd;

struct Trajectory {
  Frames frames;
  double dt = 0.01;  // time per integrator step
  int stride = 1;    // integrator steps between stored frames
  std::uint64_t seed = 0;

  Eigen::Index size() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
  /// Throws DataError when empty or non-finite.
  void validate() const;
};

struct SimulateOptions {
  int stride = 1;
  /// Multiplies the stochastic increment; 0 turns the integrator into gradient descent.
  double noise_scale = 1.0;
};

/// Overdamped Langevin, Euler–Maruyama:
///   x <- x + dt * force(x) + sqrt(2 dt) * eta,   eta ~ N(0, 1)
/// with reflection at spec.domain. Returns n_steps / stride + 1 frames.
Trajectory simulate(const PotentialSpec& spec, double x0, std::int64_t n_steps, double dt,
                    std::uint64_t seed, const SimulateOptions& options = {});

// File formats.
//   CSV:    header "frame,x0,...,x{d-1}", one frame per row.
//   binary: "DGMTRAJ1", u32 N, u32 d, f64 dt (24 bytes, little-endian), then
//           N*d little-endian f64 in row-major order.
void save_csv(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_csv(const std::filesystem::path& path, double dt = 0.01);
void save_binary(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_binary(const std::filesystem::path& path);
/// Dispatches on the file extension (.csv or anything else as binary).
Trajectory load_trajectory(const std::filesystem::path& path);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace dgmsm
