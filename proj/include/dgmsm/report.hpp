#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgmsm/analysis.hpp"
#include "dgmsm/oracle.hpp"
#include "dgmsm/potential.hpp"

namespace dgmsm {

struct TimescaleRow {
  int lag = 1;
  int index = 2;  // eigenvalue index, 2 is the slowest process
  double value = 0.0;
};

/// Kinetic summary of one model against the oracle. Lags and timescales are
/// in frames.
struct KineticsReport {
  std::string model_tag;
  std::uint64_t seed = 0;
  int lag = 1;
  int states = 0;
  Eigen::VectorXd pi;
  std::vector<TimescaleRow> timescales;
  std::vector<CkRow> ck;
  double kl_stationary = 0.0;
  std::vector<double> probe_points;
  std::vector<double> kl_transition;  // one per probe point
  Binning binning;
  Eigen::VectorXd stationary_histogram;
  Eigen::VectorXd oracle_histogram;
  double slowest_timescale = 0.0;  // at `lag`
  /// False for data without an oracle (d > 1); the KL and oracle fields are then 0.
  bool has_oracle = true;
  double oracle_slowest_timescale = 0.0;

  double slowest_relative_error() const;
  double mean_kl_transition() const;
  /// Throws NumericError when pi is not a distribution or timescales are not
  /// positive and descending within each lag.
  void validate() const;
};

nlohmann::json to_json(const KineticsReport& r);
KineticsReport report_from_json(const nlohmann::json& j);

/// Writes report.json plus pi.csv, timescales.csv, ck.csv, kl.csv and
/// histogram.csv into `dir`.
void save_report(const KineticsReport& r, const std::filesystem::path& dir, const std::string& comment = "");
/// Reads a report.json (or the directory holding one).
KineticsReport load_report(const std::filesystem::path& path);

/// Exact kinetics on the configured binning.
struct OracleReference {
  GridKernel kernel;
  Eigen::VectorXd pi_grid;
  Binning binning;
  Eigen::VectorXd pi_hist;  // pi_grid redistributed onto `binning`

  /// Transition density after `lag_steps` from the grid bin holding x, on `binning`.
  Eigen::VectorXd transition_hist(double x, long lag_steps) const;
  /// Slowest relaxation time in integrator steps.
  double slowest_timescale(long lag_steps) const;
};

OracleReference make_reference(const PotentialSpec& spec, int grid_bins, double dt, const Binning& binning);

/// One row per model tag: replicate mean and sample standard deviation of each
/// score, plus its difference to the first tag's mean.
struct CompareRow {
  std::string model_tag;
  std::size_t replicates = 0;
  ReplicateStats kl_stationary;
  ReplicateStats kl_transition;
  ReplicateStats timescale_relative_error;
  double delta_kl_stationary = 0.0;
  double delta_kl_transition = 0.0;
  double delta_timescale_relative_error = 0.0;
};

/// Throws DataError on fewer than 2 reports or mismatched binning.
std::vector<CompareRow> compare_reports(const std::vector<KineticsReport>& reports);
void save_comparison(const std::vector<CompareRow>& rows, const std::filesystem::path& path,
                     const std::string& comment = "");

}  // namespace dgmsm
