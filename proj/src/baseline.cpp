#include "dgmsm/baseline.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "dgmsm/csv.hpp"
#include "dgmsm/errors.hpp"

namespace dgmsm {

namespace {

template <class A, class B>
double squared_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a - b).squaredNorm();
}

std::size_t count_distinct_rows(const Frames& data, std::size_t enough) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) idx[static_cast<std::size_t>(i)] = i;
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (data(a, c) != data(b, c)) return data(a, c) < data(b, c);
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = idx.empty() ? 0 : 1;
  for (std::size_t i = 1; i < idx.size() && distinct < enough; ++i) {
    if (less(idx[i - 1], idx[i])) ++distinct;
  }
  return distinct;
}

}  // namespace

namespace {

template <class A>
int nearest_center(const Eigen::MatrixXd& centers, const Eigen::MatrixBase<A>& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d = squared_distance(x, centers.row(c));
    if (d < best_d) {  // strict: ties keep the lower index
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

int KMeansModel::assign_one(const Eigen::RowVectorXd& x) const { return nearest_center(centers, x); }

std::vector<int> KMeansModel::assign(const Frames& frames) const {
  std::vector<int> out(static_cast<std::size_t>(frames.rows()));
  for (Eigen::Index t = 0; t < frames.rows(); ++t) out[static_cast<std::size_t>(t)] = nearest_center(centers, frames.row(t));
  return out;
}

double inertia(const KMeansModel& model, const Frames& data) {
  double total = 0.0;
  for (Eigen::Index t = 0; t < data.rows(); ++t) {
    total += squared_distance(data.row(t), model.centers.row(nearest_center(model.centers, data.row(t))));
  }
  return total;
}

KMeansModel kmeans_fit(const Frames& data, int k, std::uint64_t seed, int max_iterations, double tolerance) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (!data.allFinite()) throw DataError("k-means input has non-finite entries");
  if (count_distinct_rows(data, static_cast<std::size_t>(k)) < static_cast<std::size_t>(k)) {
    throw DataError("k-means needs at least k = " + std::to_string(k) + " distinct frames");
  }
  const Eigen::Index n = data.rows();
  Rng rng(seed);
  KMeansModel model;
  model.seed = seed;
  model.centers.resize(k, data.cols());

  // k-means++ seeding: D^2 weighting against the centers chosen so far.
  model.centers.row(0) = data.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) d2[static_cast<std::size_t>(t)] = squared_distance(data.row(t), model.centers.row(0));
  for (int c = 1; c < k; ++c) {
    model.centers.row(c) = data.row(static_cast<Eigen::Index>(rng.categorical(d2)));
    for (Eigen::Index t = 0; t < n; ++t) {
      auto& v = d2[static_cast<std::size_t>(t)];
      v = std::min(v, squared_distance(data.row(t), model.centers.row(c)));
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int it = 0; it < max_iterations; ++it) {
    double total = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const int c = nearest_center(model.centers, data.row(t));
      labels[static_cast<std::size_t>(t)] = c;
      total += squared_distance(data.row(t), model.centers.row(c));
    }
    model.inertia_history.push_back(total);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index t = 0; t < n; ++t) {
      sums.row(labels[static_cast<std::size_t>(t)]) += data.row(t);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(t)])];
    }
    Eigen::MatrixXd next = model.centers;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        next.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        const double d = squared_distance(data.row(t), next.row(labels[static_cast<std::size_t>(t)]));
        if (d > far_d) {
          far_d = d;
          far = t;
        }
      }
      next.row(c) = data.row(far);
      labels[static_cast<std::size_t>(far)] = c;
    }
    const double moved = (next - model.centers).rowwise().norm().maxCoeff();
    model.centers = std::move(next);
    model.iterations = it + 1;
    if (moved < tolerance) break;
  }
  return model;
}

Eigen::MatrixXd transition_counts(const KMeansModel& model, std::span<const Trajectory> trajs, int lag) {
  if (lag < 1) throw DomainError("lag must be >= 1");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(model.k(), model.k());
  for (const auto& traj : trajs) {
    const std::vector<int> labels = model.assign(traj.frames);
    for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < labels.size(); ++t) {
      C(labels[t], labels[t + static_cast<std::size_t>(lag)]) += 1.0;
    }
  }
  return C;
}

TransitionMatrix count_transition_matrix(const KMeansModel& model, std::span<const Trajectory> trajs, int lag) {
  const Eigen::MatrixXd C = transition_counts(model, trajs, lag);
  TransitionMatrix T;
  T.K = C;
  T.lag = lag;
  T.source = MatrixSource::count;
  for (int i = 0; i < model.k(); ++i) {
    const double row = C.row(i).sum();
    if (row <= 0.0) {
      throw EstimationError("cluster " + std::to_string(i) + " has no outgoing transitions at lag " + std::to_string(lag));
    }
    T.K.row(i) /= row;
  }
  return T;
}

ClusterPools build_pools(const KMeansModel& model, std::span<const Trajectory> trajs) {
  ClusterPools pools;
  Eigen::Index total = 0;
  for (const auto& t : trajs) total += t.size();
  if (trajs.empty()) throw DataError("no trajectories for the cluster pools");
  pools.frames.resize(total, trajs.front().dim());
  Eigen::Index row = 0;
  for (const auto& t : trajs) {
    pools.frames.middleRows(row, t.size()) = t.frames;
    row += t.size();
  }
  pools.members.assign(static_cast<std::size_t>(model.k()), {});
  const std::vector<int> labels = model.assign(pools.frames);
  for (Eigen::Index t = 0; t < total; ++t) pools.members[static_cast<std::size_t>(labels[static_cast<std::size_t>(t)])].push_back(t);
  return pools;
}

Eigen::RowVectorXd baseline_resample_step(const KMeansModel& model, const TransitionMatrix& K,
                                          const ClusterPools& pools, const Eigen::RowVectorXd& x, Rng& rng) {
  const int i = model.assign_one(x);
  const Eigen::RowVectorXd row = K.K.row(i);
  const auto j = rng.categorical(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  const auto& pool = pools.members[j];
  if (pool.empty()) throw EstimationError("cluster " + std::to_string(j) + " has no frames to resample from");
  return pools.frames.row(pool[rng.index(pool.size())]);
}

Trajectory baseline_resample_trajectory(const KMeansModel& model, const TransitionMatrix& K, const ClusterPools& pools,
                                        const Eigen::RowVectorXd& x0, std::int64_t n_steps, Rng& rng) {
  if (n_steps < 0) throw DomainError("n_steps must be >= 0");
  Trajectory traj;
  traj.stride = K.lag;
  traj.frames.resize(n_steps + 1, x0.size());
  traj.frames.row(0) = x0;
  for (std::int64_t k = 1; k <= n_steps; ++k) {
    traj.frames.row(k) = baseline_resample_step(model, K, pools, traj.frames.row(k - 1), rng);
  }
  return traj;
}

Eigen::VectorXd baseline_mixture_weights(const ClusterPools& pools, const KMeansModel& model,
                                         const Eigen::VectorXd& pi) {
  if (pi.size() != model.k()) throw DomainError("pi has the wrong length");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(pools.frames.rows());
  for (std::size_t j = 0; j < pools.members.size(); ++j) {
    const auto& pool = pools.members[j];
    for (Eigen::Index t : pool) w(t) = pi(static_cast<Eigen::Index>(j)) / static_cast<double>(pool.size());
  }
  return w;
}

void save_centers_csv(const KMeansModel& model, const std::filesystem::path& path, const std::string& comment) {
  std::string header = "cluster";
  for (Eigen::Index c = 0; c < model.centers.cols(); ++c) header += ",x" + std::to_string(c);
  auto out = open_csv(path, comment, header);
  for (int i = 0; i < model.k(); ++i) {
    out << i;
    for (Eigen::Index c = 0; c < model.centers.cols(); ++c) out << ',' << model.centers(i, c);
    out << '\n';
  }
}

KMeansModel load_centers_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("cluster", 0) != 0) throw DataError(path.string() + ": not a centers file");
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path.string() + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw DataError(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw DataError(path.string() + ": no centers");
  KMeansModel model;
  model.centers.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) model.centers(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return model;
}

void save_matrix_csv(const TransitionMatrix& K, const std::filesystem::path& path, const std::string& comment) {
  std::string header = "state";
  for (int j = 0; j < K.states(); ++j) header += ",to" + std::to_string(j);
  auto out = open_csv(path, comment, header);
  for (int i = 0; i < K.states(); ++i) {
    out << i;
    for (int j = 0; j < K.states(); ++j) out << ',' << K.K(i, j);
    out << '\n';
  }
}

}  // namespace dgmsm
