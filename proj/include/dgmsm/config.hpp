#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgmsm/analysis.hpp"
#include "dgmsm/nn.hpp"
#include "dgmsm/potential.hpp"

namespace dgmsm {

inline constexpr const char* kVersion = "1.0.0";

enum class ModelFamily { resample, gen_ed, gen_ml_ed, baseline };

const char* to_string(ModelFamily f);

struct SimulateSection {
  std::string potential = "prinz";  // "prinz" or a JSON file holding a PotentialSpec
  double x0 = 0.0;
  double dt = 0.01;
  std::int64_t train_steps = 250000;
  std::int64_t validation_steps = 125000;
  int stride = 1;
  std::string format = "binary";  // binary | csv
};

struct DatasetSection {
  int lag = 5;
  /// "separate": dedicated validation trajectories; "fraction": the last
  /// validation_fraction of every training trajectory is held out.
  std::string split = "separate";
  double validation_fraction = 0.2;
};

struct ModelSection {
  ModelFamily family = ModelFamily::resample;
  std::string objective = "ml";  // ml | vamp_e (resample family)
  int states = 4;
  std::vector<int> hidden{64, 64, 64, 64};
  nn::Activation activation = nn::Activation::relu;
  bool batch_norm = true;
  nn::Head gamma_head = nn::Head::softplus;
  double learning_rate = 1e-3;
  double generator_learning_rate = 1e-5;
  int batch_size = 100;
  int max_epochs = 100;
  int patience = 5;
  int noise_dim = 1;
  int samples_per_state = 10000;
  int kmeans_max_iterations = 500;
  std::string chi_model;  // resample model.json whose chi a gen-ml-ed run reuses
};

struct AnalysisSection {
  std::vector<int> ck_steps{2, 3, 5};
  std::vector<int> timescale_lags{1, 2, 5, 10, 20, 50};
  Binning binning;
  int grid_bins = 256;
  std::int64_t generate_steps = 100000;
  int transition_samples = 100000;
  /// Probe configurations for transition-density KLs; empty means the local
  /// minima of the potential.
  std::vector<double> probes;
};

struct ReplicatesSection {
  int count = 10;
  std::uint64_t base_seed = 0;
};

struct HoldoutSection {
  double region_lo = 0.0;
  double region_hi = 0.0;  // lo >= hi is the empty region
};

struct ExperimentConfig {
  SimulateSection simulate;
  DatasetSection dataset;
  ModelSection model;
  AnalysisSection analysis;
  ReplicatesSection replicates;
  HoldoutSection holdout;

  /// Every value, one "section.key = value" line each, in a fixed order.
  std::string canonical() const;
  /// FNV-1a of canonical(), 16 hex digits.
  std::string hash() const;

  /// Replicate r simulates with base_seed + r and initializes networks with
  /// base_seed + 1000 + r.
  std::uint64_t data_seed(int replicate) const { return replicates.base_seed + static_cast<std::uint64_t>(replicate); }
  std::uint64_t init_seed(int replicate) const {
    return replicates.base_seed + 1000u + static_cast<std::uint64_t>(replicate);
  }

  /// Resolves `simulate.potential`; relative paths are taken from `base_dir`.
  PotentialSpec potential(const std::filesystem::path& base_dir = {}) const;
  nn::NetSpec chi_spec(int input_dim) const;
  nn::NetSpec gamma_spec(int input_dim) const;
  nn::NetSpec generator_spec(int output_dim) const;
};

/// Parses INI text. Unknown sections or keys, malformed values and values out
/// of range throw ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace dgmsm
