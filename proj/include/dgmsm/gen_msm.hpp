#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dgmsm/analysis.hpp"
#include "dgmsm/nn.hpp"
#include "dgmsm/pairs.hpp"
#include "dgmsm/potential.hpp"
#include "dgmsm/resample_msm.hpp"
#include "dgmsm/rng.hpp"

namespace dgmsm {

enum class GenMode { joint_ed, ml_ed };

const char* to_string(GenMode m);

/// Generator y = G(e_i ⊕ eps) with eps ~ N(0, I_r), plus the membership net chi.
struct GeneratorModel {
  nn::Network gen;  // input m + noise_dim, linear head of width d
  nn::Network chi;  // softmax head of width m
  int noise_dim = 1;
  int lag = 1;
  GenMode mode = GenMode::ml_ed;
  std::uint64_t chi_fingerprint = 0;

  int states() const { return chi.spec().output_dim; }
  int dim() const { return gen.spec().output_dim; }
  /// Throws ConfigError when the two networks do not fit together.
  void validate() const;
};

/// FNV-1a over a network's flat weights and running statistics.
std::uint64_t network_fingerprint(const nn::Network& net);

/// Rows [e_{state_k}, noise_k].
Eigen::MatrixXd generator_inputs(int states, std::span<const int> state, const Eigen::MatrixXd& noise);

/// Eval-mode G(e_state, eps) with a fresh eps.
Eigen::RowVectorXd sample_generator(const GeneratorModel& model, int state, Rng& rng);

/// The random quantities of one energy-distance step.
struct EdDraws {
  std::vector<int> I;
  std::vector<int> I2;
  Eigen::MatrixXd eps;
  Eigen::MatrixXd eps2;
};

/// I, I' ~ Categorical(chi_x row) and standard normal eps, eps'.
EdDraws draw_ed(const Eigen::MatrixXd& chi_x, int noise_dim, Rng& rng);

struct EdTerms {
  EdDraws draws;
  Eigen::MatrixXd a;   // G(e_I, eps)
  Eigen::MatrixXd a2;  // G(e_I', eps')
  Eigen::VectorXd d;   // |a - y| + |a' - y| - |a - a'|
};

/// Evaluates both generator arms in one 2B-row forward pass. With a cache the
/// pass is recorded for ed_gradients.
EdTerms ed_terms(const GeneratorModel& model, EdDraws draws, const Frames& y, nn::Mode mode,
                 nn::ForwardCache* gen_cache = nullptr);
EdTerms batch_ed_terms(const GeneratorModel& model, const Eigen::MatrixXd& chi_x, const Frames& y, Rng& rng,
                       nn::Mode mode = nn::Mode::eval, nn::ForwardCache* gen_cache = nullptr);

struct EdGradients {
  Eigen::VectorXd gen;  // pathwise gradient of mean d
  Eigen::VectorXd chi;  // score-function estimate; empty without a chi cache
};

/// Gradients of the batch mean of d. `chi_cache` is the forward of chi on the
/// batch's x_t (omit it when chi is frozen).
EdGradients ed_gradients(const GeneratorModel& model, const nn::ForwardCache& gen_cache, const EdTerms& terms,
                         const Frames& y, const nn::ForwardCache* chi_cache = nullptr);

struct GenHyper {
  double learning_rate_gen = 1e-5;
  double learning_rate_chi = 1e-3;
  int batch_size = 100;
  int max_epochs = 100;
  int patience = 5;
  int noise_dim = 1;
  std::uint64_t seed = 0;
};

struct GenTraining {
  GeneratorModel model;
  TrainingLog log;  // scores are mean d (lower is better)
};

/// Energy-distance training. ml_ed keeps `frozen_chi` fixed (weights and
/// running statistics); joint_ed trains a fresh chi from chi_spec.
GenTraining train_ed(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& gen_spec,
                     const nn::NetSpec& chi_spec, const GenHyper& hyper, GenMode mode,
                     const nn::Network* frozen_chi = nullptr);

/// Mean d over `data` with draws fixed by `seed`.
double mean_energy_distance(const GeneratorModel& model, const PairDataset& data, std::uint64_t seed);

/// K_ij = mean over samples of chi_j(G(e_i, eps)).
TransitionMatrix estimate_K_generative(const GeneratorModel& model, int samples_per_state, Rng& rng);

/// x -> i ~ Categorical(chi(x)) -> G(e_i, eps), frames `lag` apart.
Trajectory generate_trajectory(const GeneratorModel& model, const Eigen::RowVectorXd& x0, std::int64_t n_steps,
                               Rng& rng);

/// n draws of i ~ pi, y = G(e_i, eps).
Frames sample_stationary(const GeneratorModel& model, const Eigen::VectorXd& pi, Eigen::Index n, Rng& rng);

nlohmann::json to_json(const GeneratorModel& model);
GeneratorModel generator_model_from_json(const nlohmann::json& j);

struct HoldoutSetup {
  nn::NetSpec chi_spec;
  nn::NetSpec gamma_spec;
  nn::NetSpec gen_spec;
  TrainHyper resample_hyper;
  GenHyper gen_hyper;
  std::int64_t generate_steps = 100000;
  std::uint64_t seed = 0;
  Binning binning;
};

struct HoldoutReport {
  Interval region;
  bool region_empty = true;
  std::size_t pairs_total = 0;
  std::size_t pairs_kept = 0;
  std::int64_t generated_frames = 0;
  std::int64_t generated_in_region = 0;
  double generated_in_region_fraction = 0.0;
  std::int64_t resampled_in_region = 0;  // always 0 by construction of resampling
  Eigen::VectorXd generated_histogram;
  Eigen::VectorXd training_histogram;
  int resample_best_epoch = 0;
  int generator_best_epoch = 0;
};

/// Drops every pair with an endpoint (first coordinate) inside `region`, trains
/// an ML-ED model on what is left and generates a long trajectory. An empty
/// region keeps all pairs.
HoldoutReport holdout_region_experiment(std::span<const Trajectory> train_trajs, std::span<const Trajectory> val_trajs,
                                        int lag, const Interval& region, const Interval& domain,
                                        const HoldoutSetup& setup);

}  // namespace dgmsm
