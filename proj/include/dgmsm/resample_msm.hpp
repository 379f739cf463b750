#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgmsm/analysis.hpp"
#include "dgmsm/nn.hpp"
#include "dgmsm/pairs.hpp"
#include "dgmsm/rng.hpp"

namespace dgmsm {

struct TrainHyper {
  double learning_rate = 1e-3;
  int batch_size = 100;
  int max_epochs = 100;
  int patience = 5;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;  // 0 is the untrained model
  double train_score = 0.0;
  double validation_score = 0.0;
  double wall_seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool early_stopped = false;
};

/// Writes "epoch,train_score,validation_score,wall_seconds".
void save_training_log(const TrainingLog& log, const std::filesystem::path& path, const std::string& comment = "");

enum class ResampleObjective { ml, vamp_e };

/// Batch score and its gradients with respect to chi(x_t) and gamma(x_{t+tau}).
struct ScoreGrad {
  double score = 0.0;
  Eigen::MatrixXd d_chi;
  Eigen::MatrixXd d_gamma;
};

/// Mean log-likelihood (1/B) sum_t ln(sum_i chi_ti gamma_ti / gbar_i) with gbar
/// the batch mean of gamma; gradients include the dependence through gbar.
ScoreGrad ml_score(const Eigen::MatrixXd& chi_x, const Eigen::MatrixXd& gamma_y);

/// R_E = tr(2 C01 G^-1 - C00 G^-1 C11 G^-1), G = diag(mean gamma), with
/// C00 = E[chi chi^T], C11 = E[gamma gamma^T], C01 = E[chi gamma^T].
ScoreGrad vamp_e_score_grad(const Eigen::MatrixXd& chi_x, const Eigen::MatrixXd& gamma_y);

/// chi (softmax head) and gamma (nonnegative head) plus the empirical landing
/// densities q_i(y) = gamma_i(y) rho(y) / gbar_i of the bound dataset.
struct ResampleModel {
  nn::Network chi;
  nn::Network gamma;
  Eigen::VectorXd gamma_bar;
  int lag = 1;
  ResampleObjective objective = ResampleObjective::ml;

  // Bound dataset (landing frames y_t = x_{t+tau}).
  Frames landing_frames;
  Eigen::MatrixXd landing_weights;  // w[t][i] = gamma_i(y_t) / (N gbar_i)
  Eigen::MatrixXd landing_chi;      // chi(y_t)
  std::uint64_t data_fingerprint = 0;

  int states() const { return chi.spec().output_dim; }
  Eigen::MatrixXd membership(const Frames& x) const;
  Eigen::MatrixXd weighting(const Frames& y) const;

  /// Recomputes gbar, the landing weights and chi on the landing frames.
  void bind(const PairDataset& data);
  bool bound() const { return landing_frames.rows() > 0; }

 private:
  friend Eigen::Index sample_landing_index(const ResampleModel&, int, Rng&);
  Eigen::MatrixXd landing_cdf_;
};

/// sum_t ln(sum_i chi_i(x_t) gamma_i(x_{t+tau}) / gbar_i), gbar over data's landing frames.
double log_likelihood(const ResampleModel& model, const PairDataset& data);

/// R_E over the full dataset (eval-mode networks).
double vamp_e_score(const ResampleModel& model, const PairDataset& data);

struct ResampleTraining {
  ResampleModel model;
  TrainingLog log;
};

/// Trains chi and gamma by minibatch Adam ascent of the chosen objective with
/// early stopping on the full validation score; returns the best-validation
/// parameters bound to the training data. When `frozen_chi` is given, only
/// gamma is trained (fixed state definition).
ResampleTraining train_resample(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& chi_spec,
                                const nn::NetSpec& gamma_spec, const TrainHyper& hyper,
                                ResampleObjective objective, const nn::Network* frozen_chi = nullptr);

ResampleTraining train_ml(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& chi_spec,
                          const nn::NetSpec& gamma_spec, const TrainHyper& hyper);

ResampleTraining train_vamp_e(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& chi_spec,
                              const nn::NetSpec& gamma_spec, const TrainHyper& hyper);

/// K = sum_t w[t] chi(x_{t+tau})^T with the weights recomputed on `data`.
TransitionMatrix estimate_K_resample(const ResampleModel& model, const PairDataset& data);

/// i ~ Categorical(chi(x)), then a landing frame drawn with probability w[t][i].
Eigen::RowVectorXd resample_step(const ResampleModel& model, const Eigen::RowVectorXd& x, Rng& rng);
Eigen::Index sample_landing_index(const ResampleModel& model, int state, Rng& rng);

/// Iterated resampling; frame interval is the model lag.
Trajectory resample_trajectory(const ResampleModel& model, const Eigen::RowVectorXd& x0, std::int64_t n_steps,
                               Rng& rng);

nlohmann::json to_json(const ResampleModel& model);
/// Unbound model; call bind() with the dataset it was trained on.
ResampleModel resample_model_from_json(const nlohmann::json& j);

}  // namespace dgmsm
