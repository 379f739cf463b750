#include "dgmsm/nn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "dgmsm/errors.hpp"
#include "dgmsm/rng.hpp"

namespace dgmsm::nn {

namespace {

constexpr double kBatchNormEps = 1e-8;

std::uint64_t next_generation() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& u, Activation a) {
  if (a == Activation::relu) return u.cwiseMax(0.0);
  return u.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& u, Activation a) {
  if (a == Activation::relu) return u.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
  return u.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
}

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = z.colwise() - z.rowwise().maxCoeff();
  out = out.array().exp();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

}  // namespace

void NetSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("network dimensions must be >= 1");
  for (int w : hidden) {
    if (w < 1) throw ConfigError("hidden layer widths must be >= 1");
  }
}

std::size_t NetSpec::parameter_count() const {
  std::size_t count = 0;
  int in = input_dim;
  for (int w : hidden) {
    count += static_cast<std::size_t>(w) * (in + 1) + (batch_norm ? 2u * w : 0u);
    in = w;
  }
  return count + static_cast<std::size_t>(output_dim) * (in + 1);
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state) {
  if (grad.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw OptimizerError("Adam shapes do not align");
  }
  if (!grad.allFinite()) throw OptimizerError("non-finite gradient");
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= state.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

Network::Network(NetSpec spec, Rng& rng) : spec_(std::move(spec)) {
  build_layout();
  for (const auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / layer.in);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(layer.in) * layer.out; ++k) {
      params_.values(layer.weight + k) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
}

Network Network::zeros(NetSpec spec) {
  Network net;
  net.spec_ = std::move(spec);
  net.build_layout();
  return net;
}

void Network::build_layout() {
  spec_.validate();
  layers_.clear();
  Eigen::Index offset = 0;
  int in = spec_.input_dim;
  const auto n_hidden = spec_.hidden.size();
  for (std::size_t l = 0; l <= n_hidden; ++l) {
    const bool is_head = l == n_hidden;
    const int out = is_head ? spec_.output_dim : spec_.hidden[l];
    LayerOffsets lo{};
    lo.in = in;
    lo.out = out;
    lo.weight = offset;
    offset += static_cast<Eigen::Index>(in) * out;
    lo.bias = offset;
    offset += out;
    lo.scale = lo.shift = -1;
    if (!is_head && spec_.batch_norm) {
      lo.scale = offset;
      offset += out;
      lo.shift = offset;
      offset += out;
    }
    layers_.push_back(lo);
    in = out;
  }
  params_.values = Eigen::VectorXd::Zero(offset);
  params_.running_mean.clear();
  params_.running_var.clear();
  for (std::size_t l = 0; l < n_hidden; ++l) {
    if (!spec_.batch_norm) break;
    params_.values.segment(layers_[l].scale, layers_[l].out).setOnes();
    params_.running_mean.push_back(Eigen::VectorXd::Zero(layers_[l].out));
    params_.running_var.push_back(Eigen::VectorXd::Ones(layers_[l].out));
  }
  touch();
}

void Network::touch() { generation_ = next_generation(); }

void Network::set_params(Params params) {
  if (params.values.size() != params_.values.size()) throw DataError("parameter vector has the wrong length");
  const std::size_t n_bn = spec_.batch_norm ? spec_.hidden.size() : 0;
  if (params.running_mean.size() != n_bn || params.running_var.size() != n_bn) {
    throw DataError("running statistics missing or mis-sized");
  }
  for (std::size_t l = 0; l < n_bn; ++l) {
    if (params.running_mean[l].size() != layers_[l].out || params.running_var[l].size() != layers_[l].out) {
      throw DataError("running statistics mis-sized");
    }
    if ((params.running_var[l].array() <= 0.0).any()) throw DataError("running variances must be > 0");
  }
  params_ = std::move(params);
  touch();
}

void Network::set_values(const Eigen::VectorXd& values) {
  if (values.size() != params_.values.size()) throw DataError("parameter vector has the wrong length");
  params_.values = values;
  touch();
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& batch, Mode mode, ForwardCache* cache) const {
  if (batch.cols() != spec_.input_dim) {
    throw DomainError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                      std::to_string(spec_.input_dim));
  }
  if (batch.rows() < 1) throw DomainError("empty batch");
  if (mode == Mode::train && spec_.batch_norm && batch.rows() < 2) {
    throw DomainError("batch normalization in train mode needs at least 2 samples");
  }
  const auto B = static_cast<double>(batch.rows());
  const auto& v = params_.values;
  if (cache) {
    *cache = ForwardCache{};
    cache->generation = generation_;
    cache->mode = mode;
  }

  Eigen::MatrixXd a = batch;
  const std::size_t n_hidden = spec_.hidden.size();
  for (std::size_t l = 0; l <= n_hidden; ++l) {
    const auto& lay = layers_[l];
    Eigen::Map<const Eigen::MatrixXd> W(v.data() + lay.weight, lay.out, lay.in);
    Eigen::Map<const Eigen::RowVectorXd> b(v.data() + lay.bias, lay.out);
    Eigen::MatrixXd z = a * W.transpose();
    z.rowwise() += b;
    if (cache) cache->inputs.push_back(std::move(a));
    if (l == n_hidden) {
      Eigen::MatrixXd out;
      switch (spec_.head) {
        case Head::softmax: out = softmax_rows(z); break;
        case Head::softplus: out = z.unaryExpr([](double x) { return softplus(x); }); break;
        case Head::relu: out = z.cwiseMax(0.0); break;
        case Head::linear: out = z; break;
      }
      if (cache) {
        cache->logits = std::move(z);
        cache->output = out;
      }
      return out;
    }
    if (spec_.batch_norm) {
      Eigen::RowVectorXd mean;
      Eigen::RowVectorXd var;
      if (mode == Mode::train) {
        mean = z.colwise().mean();
        var = (z.rowwise() - mean).array().square().colwise().sum() / B;
      } else {
        mean = params_.running_mean[l].transpose();
        var = params_.running_var[l].transpose();
      }
      Eigen::RowVectorXd inv_std = (var.array() + kBatchNormEps).rsqrt();
      Eigen::MatrixXd xhat = (z.rowwise() - mean).array().rowwise() * inv_std.array();
      Eigen::Map<const Eigen::RowVectorXd> scale(v.data() + lay.scale, lay.out);
      Eigen::Map<const Eigen::RowVectorXd> shift(v.data() + lay.shift, lay.out);
      z = (xhat.array().rowwise() * scale.array()).rowwise() + shift.array();
      if (cache) {
        cache->xhat.push_back(std::move(xhat));
        cache->inv_std.push_back(std::move(inv_std));
        cache->batch_mean.push_back(std::move(mean));
        cache->batch_var.push_back(std::move(var));
      }
    }
    a = activate(z, spec_.activation);
    if (cache) cache->pre_activation.push_back(std::move(z));
  }
  return a;  // unreachable
}

Eigen::MatrixXd Network::head_backward(const ForwardCache& cache, const Eigen::MatrixXd& g) const {
  switch (spec_.head) {
    case Head::softmax: {
      const Eigen::MatrixXd& s = cache.output;
      const Eigen::VectorXd inner = (g.array() * s.array()).rowwise().sum();
      return s.array() * (g.colwise() - inner).array();
    }
    case Head::softplus:
      return g.array() * cache.logits.unaryExpr([](double x) { return sigmoid(x); }).array();
    case Head::relu:
      return g.array() * cache.logits.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }).array();
    case Head::linear:
      return g;
  }
  return g;
}

Eigen::VectorXd Network::backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output) const {
  if (cache.generation != generation_) throw StaleCacheError("forward cache predates a parameter update");
  if (grad_output.rows() != cache.output.rows() || grad_output.cols() != cache.output.cols()) {
    throw DomainError("upstream gradient shape mismatch");
  }
  return backward_logits(cache, head_backward(cache, grad_output));
}

Eigen::VectorXd Network::backward_logits(const ForwardCache& cache, const Eigen::MatrixXd& grad_logits) const {
  if (cache.generation != generation_) throw StaleCacheError("forward cache predates a parameter update");
  if (grad_logits.rows() != cache.logits.rows() || grad_logits.cols() != cache.logits.cols()) {
    throw DomainError("upstream gradient shape mismatch");
  }
  const auto& v = params_.values;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(v.size());
  const std::size_t n_hidden = spec_.hidden.size();
  const auto B = static_cast<double>(grad_logits.rows());

  Eigen::MatrixXd dz = grad_logits;
  for (std::size_t step = 0; step <= n_hidden; ++step) {
    const std::size_t l = n_hidden - step;
    const auto& lay = layers_[l];
    const Eigen::MatrixXd& input = cache.inputs[l];
    Eigen::Map<Eigen::MatrixXd>(grad.data() + lay.weight, lay.out, lay.in) = dz.transpose() * input;
    Eigen::Map<Eigen::RowVectorXd>(grad.data() + lay.bias, lay.out) = dz.colwise().sum();
    if (l == 0) break;

    Eigen::Map<const Eigen::MatrixXd> W(v.data() + lay.weight, lay.out, lay.in);
    const std::size_t below = l - 1;
    const auto& below_lay = layers_[below];
    Eigen::MatrixXd du = (dz * W).cwiseProduct(activation_derivative(cache.pre_activation[below], spec_.activation));
    if (spec_.batch_norm) {
      const Eigen::MatrixXd& xhat = cache.xhat[below];
      Eigen::Map<const Eigen::RowVectorXd> scale(v.data() + below_lay.scale, below_lay.out);
      Eigen::Map<Eigen::RowVectorXd>(grad.data() + below_lay.scale, below_lay.out) =
          du.cwiseProduct(xhat).colwise().sum();
      Eigen::Map<Eigen::RowVectorXd>(grad.data() + below_lay.shift, below_lay.out) = du.colwise().sum();
      Eigen::MatrixXd dxhat = du.array().rowwise() * scale.array();
      const Eigen::RowVectorXd& inv_std = cache.inv_std[below];
      if (cache.mode == Mode::train) {
        const Eigen::RowVectorXd sum_dx = dxhat.colwise().sum();
        const Eigen::RowVectorXd sum_dx_xhat = dxhat.cwiseProduct(xhat).colwise().sum();
        Eigen::MatrixXd t = (B * dxhat).rowwise() - sum_dx;
        t -= (xhat.array().rowwise() * sum_dx_xhat.array()).matrix();
        dz = (t.array().rowwise() * (inv_std.array() / B)).matrix();
      } else {
        dz = (dxhat.array().rowwise() * inv_std.array()).matrix();
      }
    } else {
      dz = std::move(du);
    }
  }
  return grad;
}

void Network::update_running_stats(const ForwardCache& cache, double momentum) {
  if (!spec_.batch_norm) return;
  if (cache.mode != Mode::train) throw DomainError("running statistics need a train-mode cache");
  for (std::size_t l = 0; l < params_.running_mean.size(); ++l) {
    params_.running_mean[l] = (1.0 - momentum) * params_.running_mean[l] + momentum * cache.batch_mean[l].transpose();
    params_.running_var[l] = (1.0 - momentum) * params_.running_var[l] + momentum * cache.batch_var[l].transpose();
  }
}

void Network::freeze_running_stats(const ForwardCache& cache) { update_running_stats(cache, 1.0); }

void Network::adam_step(const Eigen::VectorXd& grad, AdamState& state) {
  nn::adam_step(params_.values, grad, state);
  touch();
}

Eigen::MatrixXd predict(const Network& net, const Eigen::MatrixXd& inputs, Eigen::Index chunk) {
  Eigen::MatrixXd out(inputs.rows(), net.spec().output_dim);
  for (Eigen::Index start = 0; start < inputs.rows(); start += chunk) {
    const Eigen::Index n = std::min(chunk, inputs.rows() - start);
    out.middleRows(start, n) = net.forward(inputs.middleRows(start, n), Mode::eval);
  }
  return out;
}

const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "elu"; }

const char* to_string(Head h) {
  switch (h) {
    case Head::softmax: return "softmax";
    case Head::softplus: return "softplus";
    case Head::relu: return "relu";
    case Head::linear: return "linear";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "elu") return Activation::elu;
  throw ConfigError("unknown activation '" + s + "'");
}

Head head_from_string(const std::string& s) {
  if (s == "softmax") return Head::softmax;
  if (s == "softplus") return Head::softplus;
  if (s == "relu") return Head::relu;
  if (s == "linear") return Head::linear;
  throw ConfigError("unknown head '" + s + "'");
}

void to_json(nlohmann::json& j, const NetSpec& spec) {
  j = {{"input_dim", spec.input_dim},   {"hidden", spec.hidden},
       {"activation", to_string(spec.activation)}, {"batch_norm", spec.batch_norm},
       {"head", to_string(spec.head)},    {"output_dim", spec.output_dim}};
}

void from_json(const nlohmann::json& j, NetSpec& spec) {
  spec.input_dim = j.at("input_dim").get<int>();
  spec.hidden = j.at("hidden").get<std::vector<int>>();
  spec.activation = activation_from_string(j.at("activation").get<std::string>());
  spec.batch_norm = j.at("batch_norm").get<bool>();
  spec.head = head_from_string(j.at("head").get<std::string>());
  spec.output_dim = j.at("output_dim").get<int>();
}

namespace {
nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }
Eigen::VectorXd json_vec(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}
}  // namespace

void to_json(nlohmann::json& j, const Network& net) {
  auto means = nlohmann::json::array();
  auto vars = nlohmann::json::array();
  for (const auto& m : net.params().running_mean) means.push_back(vec_json(m));
  for (const auto& v : net.params().running_var) vars.push_back(vec_json(v));
  j = {{"spec", net.spec()},
       {"weights", vec_json(net.params().values)},
       {"running_mean", means},
       {"running_var", vars}};
}

void from_json(const nlohmann::json& j, Network& net) {
  net = Network::zeros(j.at("spec").get<NetSpec>());
  Params p;
  p.values = json_vec(j.at("weights"));
  for (const auto& m : j.at("running_mean")) p.running_mean.push_back(json_vec(m));
  for (const auto& v : j.at("running_var")) p.running_var.push_back(json_vec(v));
  net.set_params(std::move(p));
}

}  // namespace dgmsm::nn
