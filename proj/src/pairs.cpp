#include "dgmsm/pairs.hpp"

#include <string>

#include "dgmsm/errors.hpp"
#include "dgmsm/rng.hpp"

namespace dgmsm {

std::uint64_t PairDataset::fingerprint() const {
  Fnv1a h;
  const std::int64_t header[3] = {lag, static_cast<std::int64_t>(x.rows()), static_cast<std::int64_t>(x.cols())};
  h.update(header, sizeof header);
  h.update(x.data(), static_cast<std::size_t>(x.size()) * sizeof(double));
  h.update(y.data(), static_cast<std::size_t>(y.size()) * sizeof(double));
  return h.digest();
}

PairDataset PairDataset::subset(std::span<const std::size_t> rows) const {
  PairDataset out;
  out.lag = lag;
  out.split = split;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), dim());
  out.y.resize(static_cast<Eigen::Index>(rows.size()), dim());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
    out.y.row(static_cast<Eigen::Index>(k)) = y.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

PairDataset make_pairs(std::span<const Trajectory> trajs, int lag, Split split) {
  if (lag < 1) throw DomainError("lag must be >= 1");
  if (trajs.empty()) throw DataError("no trajectories given");
  Eigen::Index total = 0;
  const Eigen::Index d = trajs.front().dim();
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    if (trajs[k].dim() != d) throw DataError("trajectories differ in dimension");
    if (trajs[k].size() <= lag) {
      throw DataError("trajectory " + std::to_string(k) + " has " + std::to_string(trajs[k].size()) +
                      " frames, needs more than lag " + std::to_string(lag));
    }
    total += trajs[k].size() - lag;
  }
  PairDataset out;
  out.lag = lag;
  out.split = split;
  out.x.resize(total, d);
  out.y.resize(total, d);
  Eigen::Index row = 0;
  for (const auto& t : trajs) {
    const Eigen::Index n = t.size() - lag;
    out.x.middleRows(row, n) = t.frames.topRows(n);
    out.y.middleRows(row, n) = t.frames.bottomRows(n);
    row += n;
  }
  return out;
}

}  // namespace dgmsm
