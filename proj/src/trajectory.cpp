#include "dgmsm/trajectory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dgmsm/errors.hpp"
#include "dgmsm/rng.hpp"

namespace dgmsm {

static_assert(std::endian::native == std::endian::little, "binary trajectory IO assumes a little-endian host");

void Trajectory::validate() const {
  if (frames.rows() < 1 || frames.cols() < 1) throw DataError("trajectory has no frames");
  if (!frames.allFinite()) throw DataError("trajectory contains non-finite entries");
}

Trajectory simulate(const PotentialSpec& spec, double x0, std::int64_t n_steps, double dt,
                    std::uint64_t seed, const SimulateOptions& options) {
  if (n_steps < 0) throw DomainError("n_steps must be >= 0");
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  if (options.stride < 1 || n_steps % options.stride != 0) {
    throw DomainError("n_steps must be a multiple of stride >= 1");
  }
  if (!spec.domain.contains(x0)) throw DomainError("x0 outside potential domain");

  Trajectory traj;
  traj.dt = dt;
  traj.stride = options.stride;
  traj.seed = seed;
  traj.frames.resize(n_steps / options.stride + 1, 1);
  traj.frames(0, 0) = x0;

  Rng rng(seed);
  const double noise = std::sqrt(2.0 * dt) * options.noise_scale;
  const auto [lo, hi] = spec.domain;
  double x = x0;
  for (std::int64_t step = 1; step <= n_steps; ++step) {
    x += dt * force(spec, x) + noise * rng.normal();
    if (x > hi) x = 2.0 * hi - x;
    if (x < lo) x = 2.0 * lo - x;
    if (!std::isfinite(x)) throw IntegrationError(step, "non-finite position");
    if (!spec.domain.contains(x)) throw IntegrationError(step, "step overshoots the domain (dt too large?)");
    if (step % options.stride == 0) traj.frames(step / options.stride, 0) = x;
  }
  return traj;
}

void save_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "frame";
  for (Eigen::Index j = 0; j < traj.dim(); ++j) out << ",x" << j;
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < traj.dim(); ++j) out << ',' << traj.frames(i, j);
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Trajectory load_csv(const std::filesystem::path& path, double dt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame", 0) != 0) {
    throw DataError(path.string() + ": missing 'frame,x0..' header");
  }
  const auto dim = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  if (dim < 1) throw DataError(path.string() + ": header declares no coordinates");
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // frame index
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (!std::getline(ss, cell, ',')) {
        throw DataError(path.string() + ": row " + std::to_string(rows) + " has too few columns");
      }
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path.string() + ": bad number '" + cell + "'");
      }
    }
    ++rows;
  }
  Trajectory traj;
  traj.dt = dt;
  traj.frames = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(rows), dim);
  traj.validate();
  return traj;
}

namespace {
constexpr std::array<char, 8> kMagic = {'D', 'G', 'M', 'T', 'R', 'A', 'J', '1'};
}

void save_binary(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  const auto n = static_cast<std::uint32_t>(traj.size());
  const auto d = static_cast<std::uint32_t>(traj.dim());
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  out.write(reinterpret_cast<const char*>(&traj.dt), sizeof traj.dt);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = traj.frames;
  out.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!out) throw DataError("write failed for " + path.string());
}

Trajectory load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<char, 8> magic{};
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  Trajectory traj;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  in.read(reinterpret_cast<char*>(&traj.dt), sizeof traj.dt);
  if (!in || magic != kMagic) throw DataError(path.string() + ": not a DGMTRAJ1 file");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, d);
  in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!in) throw DataError(path.string() + ": truncated payload");
  traj.frames = rows;
  traj.validate();
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? load_csv(path) : load_binary(path);
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    save_csv(traj, path);
  } else {
    save_binary(traj, path);
  }
}

}  // namespace dgmsm
