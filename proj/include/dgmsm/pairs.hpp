#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dgmsm/trajectory.hpp"

namespace dgmsm {

enum class Split { train, validation };

/// Time-lagged pairs (x_t, x_{t+lag}); row k of `x` pairs with row k of `y`.
struct PairDataset {
  Frames x;
  Frames y;
  int lag = 1;
  Split split = Split::train;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
  /// FNV-1a over lag, shape and the raw bytes of both frame matrices.
  std::uint64_t fingerprint() const;
  PairDataset subset(std::span<const std::size_t> rows) const;
};

/// Sliding-window pairs within each trajectory; never across trajectories.
PairDataset make_pairs(std::span<const Trajectory> trajs, int lag, Split split = Split::train);

}  // namespace dgmsm
