#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace dgmsm {
class Rng;
}

namespace dgmsm::nn {

enum class Activation { relu, elu };
/// softplus and relu are the nonnegative heads; softplus is strictly positive.
enum class Head { softmax, softplus, relu, linear };
enum class Mode { train, eval };

struct NetSpec {
  int input_dim = 1;
  std::vector<int> hidden{64, 64, 64, 64};
  Activation activation = Activation::relu;
  bool batch_norm = true;
  Head head = Head::softmax;
  int output_dim = 4;

  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const NetSpec&) const = default;
};

/// Flat weights plus batch-norm running statistics (one vector per hidden
/// layer when batch_norm is on).
struct Params {
  Eigen::VectorXd values;
  std::vector<Eigen::VectorXd> running_mean;
  std::vector<Eigen::VectorXd> running_var;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t size, double learning_rate)
      : m(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
        v(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
        lr(learning_rate) {}
};

/// Bias-corrected Adam. Throws OptimizerError on a non-finite gradient.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state);

/// Everything the backward pass needs from one forward call.
struct ForwardCache {
  std::uint64_t generation = 0;
  Mode mode = Mode::eval;
  std::vector<Eigen::MatrixXd> inputs;  // input of every layer, head included
  std::vector<Eigen::MatrixXd> xhat;    // normalized pre-activations (batch norm)
  std::vector<Eigen::RowVectorXd> inv_std;
  std::vector<Eigen::RowVectorXd> batch_mean;
  std::vector<Eigen::RowVectorXd> batch_var;
  std::vector<Eigen::MatrixXd> pre_activation;
  Eigen::MatrixXd logits;
  Eigen::MatrixXd output;
};

/// Dense feed-forward network: [Linear -> BatchNorm -> activation] x hidden,
/// then Linear -> head. Batches are B x input_dim, one sample per row.
class Network {
 public:
  Network() = default;
  /// He-uniform weights, zero biases, unit scales, zero shifts.
  Network(NetSpec spec, Rng& rng);
  /// All weights zero (batch-norm scales stay 1).
  static Network zeros(NetSpec spec);

  const NetSpec& spec() const { return spec_; }
  const Params& params() const { return params_; }
  void set_params(Params params);
  void set_values(const Eigen::VectorXd& values);
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.values.size()); }
  std::uint64_t generation() const { return generation_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, Mode mode, ForwardCache* cache = nullptr) const;
  /// Gradient of sum(grad_output .* output) with respect to the flat weights.
  Eigen::VectorXd backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output) const;
  /// Same, with the upstream gradient given on the head's pre-activations.
  Eigen::VectorXd backward_logits(const ForwardCache& cache, const Eigen::MatrixXd& grad_logits) const;

  /// Exponential moving average of the batch statistics held by a train-mode cache.
  void update_running_stats(const ForwardCache& cache, double momentum = 0.1);
  /// Overwrites the running statistics with the batch statistics of a train-mode cache.
  void freeze_running_stats(const ForwardCache& cache);
  void adam_step(const Eigen::VectorXd& grad, AdamState& state);

 private:
  struct LayerOffsets {
    Eigen::Index weight, bias, scale, shift;
    int in, out;
  };

  void build_layout();
  void touch();
  Eigen::MatrixXd head_backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output) const;

  NetSpec spec_;
  Params params_;
  std::vector<LayerOffsets> layers_;
  std::uint64_t generation_ = 0;
};

/// Eval-mode forward pass over a large input, evaluated in row chunks.
Eigen::MatrixXd predict(const Network& net, const Eigen::MatrixXd& inputs, Eigen::Index chunk = 8192);

const char* to_string(Activation a);
const char* to_string(Head h);
Activation activation_from_string(const std::string& s);
Head head_from_string(const std::string& s);

void to_json(nlohmann::json& j, const NetSpec& spec);
void from_json(const nlohmann::json& j, NetSpec& spec);
void to_json(nlohmann::json& j, const Network& net);
void from_json(const nlohmann::json& j, Network& net);

}  // namespace dgmsm::nn
