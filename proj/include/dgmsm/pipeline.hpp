#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgmsm/baseline.hpp"
#include "dgmsm/config.hpp"
#include "dgmsm/gen_msm.hpp"
#include "dgmsm/report.hpp"
#include "dgmsm/resample_msm.hpp"

namespace dgmsm {

struct DataSplit {
  std::vector<Trajectory> train;
  std::vector<Trajectory> validation;
};

/// Training and validation trajectories of replicate `replicate`: seeds
/// data_seed(r) and derive_seed(data_seed(r), 1), both started at x0.
DataSplit simulate_data(const ExperimentConfig& cfg, const PotentialSpec& spec, int replicate);

/// Reads trajectory files. With dataset.split = fraction the validation files
/// are ignored and the tail of every training trajectory is held out.
DataSplit load_data(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& train_files,
                    const std::vector<std::filesystem::path>& validation_files);

/// Everything the analyses share: the oracle, probe points and budgets.
struct AnalysisContext {
  const ExperimentConfig* cfg = nullptr;
  std::optional<OracleReference> oracle;  // absent for d > 1
  std::vector<double> probes;
  int stride = 1;  // integrator steps per frame
  std::uint64_t seed = 0;
};

AnalysisContext make_analysis_context(const ExperimentConfig& cfg, const PotentialSpec& spec, int data_dim,
                                      std::uint64_t seed);

/// Timescales over analysis.timescale_lags and the CK table come from
/// re-estimating at other lags with chi fixed: gamma is retrained for the
/// resample family, the generator for the generative ones, counts for the
/// baseline.
KineticsReport analyze_resample(const ResampleModel& model, const DataSplit& data, const AnalysisContext& ctx);
KineticsReport analyze_generator(const GeneratorModel& model, const DataSplit& data, const AnalysisContext& ctx);
KineticsReport analyze_baseline(const KMeansModel& model, const DataSplit& data, int lag, const AnalysisContext& ctx);
KineticsReport analyze_oracle(int lag, const AnalysisContext& ctx);

/// K at `lag` with the model's chi; gamma is retrained unless lag == model.lag.
TransitionMatrix resample_K_at(const ResampleModel& model, const DataSplit& data, int lag, const ExperimentConfig& cfg,
                               std::uint64_t seed);
/// K at `lag` with the model's chi; the generator is retrained unless lag == model.lag.
TransitionMatrix generative_K_at(const GeneratorModel& model, const DataSplit& data, int lag,
                                 const ExperimentConfig& cfg, std::uint64_t seed);

TrainHyper resample_hyper(const ExperimentConfig& cfg, std::uint64_t seed);
GenHyper generator_hyper(const ExperimentConfig& cfg, std::uint64_t seed);

// Command implementations. Each writes into `out_dir` and is a pure function
// of its inputs; CSVs carry a "# dgmsm <version> config <hash>" line.

struct CommandOptions {
  ExperimentConfig config;
  std::filesystem::path config_dir;
  std::filesystem::path out_dir = ".";
  int replicate = 0;
  std::vector<std::filesystem::path> train_files;
  std::vector<std::filesystem::path> validation_files;
  std::filesystem::path model_path;  // analyze
  std::filesystem::path chi_model;   // train, gen-ml-ed (overrides model.chi_model)
  std::vector<std::filesystem::path> reports;  // compare
  std::optional<Interval> region;             // holdout (overrides [holdout])

  std::string comment() const;
};

void cmd_simulate(const CommandOptions& opt);
void cmd_train(const CommandOptions& opt);
void cmd_analyze(const CommandOptions& opt);
void cmd_compare(const CommandOptions& opt);
void cmd_holdout(const CommandOptions& opt);

}  // namespace dgmsm
