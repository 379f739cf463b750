#include "dgmsm/resample_msm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dgmsm/csv.hpp"
#include "dgmsm/errors.hpp"

namespace dgmsm {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::RowVectorXd column_means(const Eigen::MatrixXd& m) { return m.colwise().mean(); }

void require_positive(const Eigen::RowVectorXd& gbar, const char* what) {
  for (Eigen::Index i = 0; i < gbar.size(); ++i) {
    if (!(gbar(i) > 0.0) || !std::isfinite(gbar(i))) {
      throw NumericError(std::string(what) + ": normalizer of state " + std::to_string(i) + " is not positive");
    }
  }
}

Frames rows_of(const Frames& src, std::span<const std::size_t> idx) {
  Frames out(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = src.row(static_cast<Eigen::Index>(idx[k]));
  return out;
}

double full_score(const ResampleModel& model, const PairDataset& data) {
  if (model.objective == ResampleObjective::vamp_e) return vamp_e_score(model, data);
  return log_likelihood(model, data) / static_cast<double>(data.size());
}

void check_compatible(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& chi_spec,
                      const nn::NetSpec& gamma_spec) {
  if (train.size() < 2 || validation.size() < 1) throw DataError("training needs at least 2 training and 1 validation pair");
  if (train.lag != validation.lag) throw DataError("training and validation pairs have different lags");
  if (train.dim() != validation.dim()) throw DataError("training and validation frames differ in dimension");
  if (chi_spec.head != nn::Head::softmax) throw ConfigError("chi needs a softmax head");
  if (gamma_spec.head != nn::Head::softplus && gamma_spec.head != nn::Head::relu) {
    throw ConfigError("gamma needs a nonnegative head (softplus or relu)");
  }
  if (chi_spec.output_dim != gamma_spec.output_dim) throw ConfigError("chi and gamma must have the same number of states");
  if (chi_spec.input_dim != train.dim() || gamma_spec.input_dim != train.dim()) {
    throw ConfigError("network input_dim does not match the data dimension");
  }
}

}  // namespace

void save_training_log(const TrainingLog& log, const std::filesystem::path& path, const std::string& comment) {
  auto out = open_csv(path, comment, "epoch,train_score,validation_score,wall_seconds");
  for (const auto& r : log.epochs) {
    out << r.epoch << ',' << r.train_score << ',' << r.validation_score << ',';
    out.precision(3);
    out << std::fixed << r.wall_seconds << '\n';
    out.unsetf(std::ios::floatfield);
    out.precision(17);
  }
}

ScoreGrad ml_score(const Eigen::MatrixXd& chi_x, const Eigen::MatrixXd& gamma_y) {
  const Eigen::Index B = chi_x.rows();
  if (B < 1 || gamma_y.rows() != B || gamma_y.cols() != chi_x.cols()) throw DomainError("ml_score: shape mismatch");
  const Eigen::RowVectorXd gbar = column_means(gamma_y);
  require_positive(gbar, "ml_score");
  const Eigen::MatrixXd ratio = gamma_y.array().rowwise() / gbar.array();
  const Eigen::VectorXd s = (chi_x.array() * ratio.array()).rowwise().sum();
  ScoreGrad out;
  for (Eigen::Index t = 0; t < B; ++t) {
    if (!(s(t) > 0.0)) throw LikelihoodError(static_cast<std::size_t>(t), "membership-weighting inner product is not positive");
    out.score += std::log(s(t));
  }
  const double inv_b = 1.0 / static_cast<double>(B);
  out.score *= inv_b;
  const Eigen::ArrayXd inv_s = s.array().inverse();
  out.d_chi = (ratio.array().colwise() * inv_s).matrix() * inv_b;
  // Direct term plus the dependence of every row on gbar.
  const Eigen::MatrixXd direct = (chi_x.array().colwise() * inv_s).rowwise() / gbar.array();
  const Eigen::RowVectorXd through_gbar =
      ((chi_x.array() * gamma_y.array()).colwise() * inv_s).colwise().sum() / gbar.array().square();
  out.d_gamma = (direct.rowwise() - through_gbar * inv_b) * inv_b;
  return out;
}

ScoreGrad vamp_e_score_grad(const Eigen::MatrixXd& chi_x, const Eigen::MatrixXd& gamma_y) {
  const Eigen::Index B = chi_x.rows();
  if (B < 1 || gamma_y.rows() != B || gamma_y.cols() != chi_x.cols()) throw DomainError("vamp_e: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(B);
  const Eigen::RowVectorXd g = column_means(gamma_y);
  require_positive(g, "vamp_e");
  const Eigen::MatrixXd C00 = chi_x.transpose() * chi_x * inv_b;
  const Eigen::MatrixXd C11 = gamma_y.transpose() * gamma_y * inv_b;
  const Eigen::MatrixXd C01 = chi_x.transpose() * gamma_y * inv_b;
  const Eigen::MatrixXd ggT = g.transpose() * g;
  const Eigen::MatrixXd A = C11.array() / ggT.array();
  const Eigen::MatrixXd Bm = C00.array() / ggT.array();

  ScoreGrad out;
  out.score = 2.0 * (C01.diagonal().array() / g.transpose().array()).sum() - (C00.array() * A.array()).sum();

  const Eigen::RowVectorXd inv_g = g.array().inverse();
  out.d_chi = 2.0 * inv_b * ((gamma_y.array().rowwise() * inv_g.array()).matrix() - chi_x * A);
  Eigen::RowVectorXd d_g(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    d_g(k) = -2.0 * C01(k, k) / (g(k) * g(k)) +
             2.0 * (C00.row(k).array() * C11.row(k).array() * inv_g.array()).sum() / (g(k) * g(k));
  }
  out.d_gamma = 2.0 * inv_b * ((chi_x.array().rowwise() * inv_g.array()).matrix() - gamma_y * Bm);
  out.d_gamma.rowwise() += d_g * inv_b;
  return out;
}

Eigen::MatrixXd ResampleModel::membership(const Frames& x) const { return nn::predict(chi, x); }
Eigen::MatrixXd ResampleModel::weighting(const Frames& y) const { return nn::predict(gamma, y); }

void ResampleModel::bind(const PairDataset& data) {
  if (data.size() < 1) throw DataError("cannot bind a model to an empty dataset");
  const Eigen::MatrixXd g = weighting(data.y);
  const Eigen::RowVectorXd gbar = column_means(g);
  require_positive(gbar, "bind");
  const auto n = static_cast<double>(data.size());
  gamma_bar = gbar.transpose();
  landing_frames = data.y;
  landing_weights = (g.array().rowwise() / (gbar.array() * n)).matrix();
  landing_chi = membership(data.y);
  data_fingerprint = data.fingerprint();
  landing_cdf_.resize(landing_weights.rows(), landing_weights.cols());
  for (Eigen::Index i = 0; i < landing_weights.cols(); ++i) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < landing_weights.rows(); ++t) {
      acc += landing_weights(t, i);
      landing_cdf_(t, i) = acc;
    }
    landing_cdf_.col(i) /= acc;
  }
}

double log_likelihood(const ResampleModel& model, const PairDataset& data) {
  if (data.size() < 1) throw DataError("log-likelihood of an empty dataset");
  const Eigen::MatrixXd chi_x = model.membership(data.x);
  const Eigen::MatrixXd g = model.weighting(data.y);
  const Eigen::RowVectorXd gbar = column_means(g);
  require_positive(gbar, "log_likelihood");
  const Eigen::VectorXd s = (chi_x.array() * (g.array().rowwise() / gbar.array())).rowwise().sum();
  double ll = 0.0;
  for (Eigen::Index t = 0; t < s.size(); ++t) {
    if (!(s(t) > 0.0)) throw LikelihoodError(static_cast<std::size_t>(t), "membership-weighting inner product is not positive");
    ll += std::log(s(t));
  }
  return ll;
}

double vamp_e_score(const ResampleModel& model, const PairDataset& data) {
  if (data.size() < 1) throw DataError("VAMP-E score of an empty dataset");
  const Eigen::MatrixXd chi_x = model.membership(data.x);
  const Eigen::MatrixXd g = model.weighting(data.y);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  const Eigen::RowVectorXd gbar = column_means(g);
  require_positive(gbar, "vamp_e_score");
  const Eigen::MatrixXd C00 = chi_x.transpose() * chi_x * inv_n;
  const Eigen::MatrixXd C11 = g.transpose() * g * inv_n;
  const Eigen::MatrixXd C01 = chi_x.transpose() * g * inv_n;
  const Eigen::MatrixXd ggT = gbar.transpose() * gbar;
  return 2.0 * (C01.diagonal().array() / gbar.transpose().array()).sum() -
         (C00.array() * C11.array() / ggT.array()).sum();
}

ResampleTraining train_resample(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& chi_spec,
                                const nn::NetSpec& gamma_spec, const TrainHyper& hyper, ResampleObjective objective,
                                const nn::Network* frozen_chi) {
  const nn::NetSpec& cs = frozen_chi ? frozen_chi->spec() : chi_spec;
  check_compatible(train, validation, cs, gamma_spec);
  if (hyper.batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (hyper.max_epochs < 0 || hyper.patience < 1) throw ConfigError("max_epochs must be >= 0 and patience >= 1");

  const auto start = Clock::now();
  Rng init_rng(derive_seed(hyper.seed, 0));
  Rng order_rng(derive_seed(hyper.seed, 1));

  ResampleTraining result;
  ResampleModel& model = result.model;
  model.chi = frozen_chi ? *frozen_chi : nn::Network(chi_spec, init_rng);
  model.gamma = nn::Network(gamma_spec, init_rng);
  model.lag = train.lag;
  model.objective = objective;
  const bool train_chi = frozen_chi == nullptr;

  nn::AdamState chi_opt(model.chi.parameter_count(), hyper.learning_rate);
  nn::AdamState gamma_opt(model.gamma.parameter_count(), hyper.learning_rate);

  auto seconds = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  auto record = [&](int epoch) {
    EpochRecord r;
    r.epoch = epoch;
    r.train_score = full_score(model, train);
    r.validation_score = full_score(model, validation);
    r.wall_seconds = seconds();
    result.log.epochs.push_back(r);
    return r.validation_score;
  };

  double best = record(0);
  nn::Params best_chi = model.chi.params();
  nn::Params best_gamma = model.gamma.params();
  int stale = 0;

  const auto n = static_cast<std::size_t>(train.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bsz = static_cast<std::size_t>(hyper.batch_size);

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    long batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += bsz, ++batch_index) {
      const std::size_t end = std::min(n, begin + bsz);
      if (end - begin < 2) break;  // batch statistics need two samples
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Frames xb = rows_of(train.x, idx);
      const Frames yb = rows_of(train.y, idx);

      nn::ForwardCache chi_cache;
      nn::ForwardCache gamma_cache;
      const Eigen::MatrixXd chi_x =
          train_chi ? model.chi.forward(xb, nn::Mode::train, &chi_cache) : model.chi.forward(xb, nn::Mode::eval);
      const Eigen::MatrixXd g = model.gamma.forward(yb, nn::Mode::train, &gamma_cache);

      ScoreGrad sg;
      try {
        sg = objective == ResampleObjective::ml ? ml_score(chi_x, g) : vamp_e_score_grad(chi_x, g);
      } catch (const NumericError& e) {
        throw TrainingError(epoch, batch_index, e.what());
      }
      if (!std::isfinite(sg.score)) throw TrainingError(epoch, batch_index, "non-finite batch score");

      try {
        // Ascent: Adam minimizes, so feed the negated gradient.
        if (train_chi) {
          const Eigen::VectorXd grad = -model.chi.backward(chi_cache, sg.d_chi);
          model.chi.update_running_stats(chi_cache);
          model.chi.adam_step(grad, chi_opt);
        }
        const Eigen::VectorXd grad = -model.gamma.backward(gamma_cache, sg.d_gamma);
        model.gamma.update_running_stats(gamma_cache);
        model.gamma.adam_step(grad, gamma_opt);
      } catch (const OptimizerError& e) {
        throw TrainingError(epoch, batch_index, e.what());
      }
    }

    double val = 0.0;
    try {
      val = record(epoch);
    } catch (const NumericError& e) {
      throw TrainingError(epoch, batch_index, std::string("evaluation failed: ") + e.what());
    }
    if (!std::isfinite(val)) throw TrainingError(epoch, batch_index, "non-finite validation score");
    if (val > best) {
      best = val;
      best_chi = model.chi.params();
      best_gamma = model.gamma.params();
      result.log.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= hyper.patience) {
      result.log.early_stopped = true;
      break;
    }
  }

  model.chi.set_params(best_chi);
  model.gamma.set_params(best_gamma);
  model.bind(train);
  return result;
}

ResampleTraining train_ml(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& chi_spec,
                          const nn::NetSpec& gamma_spec, const TrainHyper& hyper) {
  return train_resample(train, validation, chi_spec, gamma_spec, hyper, ResampleObjective::ml);
}

ResampleTraining train_vamp_e(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& chi_spec,
                              const nn::NetSpec& gamma_spec, const TrainHyper& hyper) {
  return train_resample(train, validation, chi_spec, gamma_spec, hyper, ResampleObjective::vamp_e);
}

TransitionMatrix estimate_K_resample(const ResampleModel& model, const PairDataset& data) {
  if (data.size() < 1) throw DataError("cannot estimate K from an empty dataset");
  const Eigen::MatrixXd g = model.weighting(data.y);
  const Eigen::RowVectorXd gbar = column_means(g);
  require_positive(gbar, "estimate_K_resample");
  const Eigen::MatrixXd w = g.array().rowwise() / (gbar.array() * static_cast<double>(data.size()));
  TransitionMatrix T;
  T.K = w.transpose() * model.membership(data.y);
  T.lag = data.lag;
  T.source = MatrixSource::resample;
  T.validate();
  return T;
}

Eigen::Index sample_landing_index(const ResampleModel& model, int state, Rng& rng) {
  if (!model.bound()) throw DataError("resampling needs a model bound to its dataset");
  if (state < 0 || state >= model.states()) throw DomainError("state index out of range");
  const auto col = model.landing_cdf_.col(state);
  const double u = rng.uniform();
  const auto* first = col.data();
  const auto* last = first + col.size();
  const auto* it = std::upper_bound(first, last, u);
  return std::min<Eigen::Index>(it - first, col.size() - 1);
}

Eigen::RowVectorXd resample_step(const ResampleModel& model, const Eigen::RowVectorXd& x, Rng& rng) {
  const Eigen::RowVectorXd chi = model.membership(x);
  const auto i = static_cast<int>(rng.categorical(std::span<const double>(chi.data(), static_cast<std::size_t>(chi.size()))));
  return model.landing_frames.row(sample_landing_index(model, i, rng));
}

Trajectory resample_trajectory(const ResampleModel& model, const Eigen::RowVectorXd& x0, std::int64_t n_steps,
                               Rng& rng) {
  if (n_steps < 0) throw DomainError("n_steps must be >= 0");
  if (!model.bound()) throw DataError("resampling needs a model bound to its dataset");
  if (x0.size() != model.landing_frames.cols()) throw DomainError("x0 has the wrong dimension");
  Trajectory traj;
  traj.stride = model.lag;
  traj.frames.resize(n_steps + 1, x0.size());
  traj.frames.row(0) = x0;
  Eigen::RowVectorXd chi = model.membership(x0);
  for (std::int64_t k = 1; k <= n_steps; ++k) {
    const auto i = static_cast<int>(rng.categorical(std::span<const double>(chi.data(), static_cast<std::size_t>(chi.size()))));
    const Eigen::Index t = sample_landing_index(model, i, rng);
    traj.frames.row(k) = model.landing_frames.row(t);
    chi = model.landing_chi.row(t);  // landing frames already carry their memberships
  }
  return traj;
}

nlohmann::json to_json(const ResampleModel& model) {
  nlohmann::json j;
  j["kind"] = "resample";
  j["lag"] = model.lag;
  j["states"] = model.states();
  j["objective"] = model.objective == ResampleObjective::ml ? "ml" : "vamp_e";
  j["gamma_bar"] = std::vector<double>(model.gamma_bar.data(), model.gamma_bar.data() + model.gamma_bar.size());
  j["data_fingerprint"] = model.data_fingerprint;
  j["chi"] = model.chi;
  j["gamma"] = model.gamma;
  return j;
}

ResampleModel resample_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "resample") throw DataError("not a resample model");
    ResampleModel m;
    m.lag = j.at("lag").get<int>();
    const auto obj = j.at("objective").get<std::string>();
    if (obj != "ml" && obj != "vamp_e") throw DataError("unknown objective '" + obj + "'");
    m.objective = obj == "ml" ? ResampleObjective::ml : ResampleObjective::vamp_e;
    const auto gb = j.at("gamma_bar").get<std::vector<double>>();
    m.gamma_bar = Eigen::Map<const Eigen::VectorXd>(gb.data(), static_cast<Eigen::Index>(gb.size()));
    m.data_fingerprint = j.at("data_fingerprint").get<std::uint64_t>();
    j.at("chi").get_to(m.chi);
    j.at("gamma").get_to(m.gamma);
    if (m.states() != j.at("states").get<int>() || m.gamma.spec().output_dim != m.states() ||
        m.gamma_bar.size() != m.states()) {
      throw DataError("resample model has inconsistent state counts");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed resample model: ") + e.what());
  }
}

}  // namespace dgmsm
