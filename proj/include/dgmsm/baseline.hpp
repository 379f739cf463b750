#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgmsm/analysis.hpp"
#include "dgmsm/rng.hpp"
#include "dgmsm/trajectory.hpp"

namespace dgmsm {

/// Nearest-center partition; ties go to the lowest center index.
struct KMeansModel {
  Eigen::MatrixXd centers;  // k x d
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
  int iterations = 0;

  int k() const { return static_cast<int>(centers.rows()); }
  int assign_one(const Eigen::RowVectorXd& x) const;
  std::vector<int> assign(const Frames& frames) const;
};

/// k-means++ seeding followed by Lloyd iterations until the largest center
/// move is below `tolerance` or `max_iterations` is reached. An empty cluster
/// is re-seeded at the frame farthest from its assigned center.
KMeansModel kmeans_fit(const Frames& data, int k, std::uint64_t seed, int max_iterations = 500,
                       double tolerance = 1e-8);

/// Sum of squared distances to the assigned centers.
double inertia(const KMeansModel& model, const Frames& data);

/// Raw sliding-window transition counts between clusters at `lag`.
Eigen::MatrixXd transition_counts(const KMeansModel& model, std::span<const Trajectory> trajs, int lag);

/// Row-normalized counts. Throws EstimationError naming the first cluster
/// that is never left from at this lag.
TransitionMatrix count_transition_matrix(const KMeansModel& model, std::span<const Trajectory> trajs, int lag);

/// Frames grouped by their hard assignment.
struct ClusterPools {
  Frames frames;
  std::vector<std::vector<Eigen::Index>> members;
};

ClusterPools build_pools(const KMeansModel& model, std::span<const Trajectory> trajs);

/// x -> i = assign(x) -> j ~ K[i] -> uniform frame of pool j.
Eigen::RowVectorXd baseline_resample_step(const KMeansModel& model, const TransitionMatrix& K,
                                          const ClusterPools& pools, const Eigen::RowVectorXd& x, Rng& rng);

Trajectory baseline_resample_trajectory(const KMeansModel& model, const TransitionMatrix& K, const ClusterPools& pools,
                                        const Eigen::RowVectorXd& x0, std::int64_t n_steps, Rng& rng);

/// Per-frame weights pi_j / |pool j| of the mixture sum_j pi_j rho_j.
Eigen::VectorXd baseline_mixture_weights(const ClusterPools& pools, const KMeansModel& model,
                                         const Eigen::VectorXd& pi);

/// "cluster,x0,...,x{d-1}"
void save_centers_csv(const KMeansModel& model, const std::filesystem::path& path, const std::string& comment = "");
KMeansModel load_centers_csv(const std::filesystem::path& path);
/// "state,to0,...,to{m-1}"
void save_matrix_csv(const TransitionMatrix& K, const std::filesystem::path& path, const std::string& comment = "");

}  // namespace dgmsm
