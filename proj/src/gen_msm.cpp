#include "dgmsm/gen_msm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dgmsm/errors.hpp"

namespace dgmsm {

namespace {

using Clock = std::chrono::steady_clock;
constexpr Eigen::Index kChunk = 8192;

Eigen::MatrixXd normals(Eigen::Index rows, int cols, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  // Row-major fill so the draw order does not depend on the storage order.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = rng.normal();
  }
  return out;
}

int draw_state(const Eigen::RowVectorXd& chi, Rng& rng) {
  return static_cast<int>(rng.categorical(std::span<const double>(chi.data(), static_cast<std::size_t>(chi.size()))));
}

Frames rows_of(const Frames& src, std::span<const std::size_t> idx) {
  Frames out(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = src.row(static_cast<Eigen::Index>(idx[k]));
  }
  return out;
}

}  // namespace

const char* to_string(GenMode m) { return m == GenMode::joint_ed ? "joint_ed" : "ml_ed"; }

void GeneratorModel::validate() const {
  if (chi.spec().head != nn::Head::softmax) throw ConfigError("score-function gradients need a softmax chi head");
  if (noise_dim < 1) throw ConfigError("noise_dim must be >= 1");
  if (gen.spec().input_dim != states() + noise_dim) {
    throw ConfigError("generator input_dim must equal states + noise_dim = " + std::to_string(states() + noise_dim));
  }
  if (gen.spec().head != nn::Head::linear) throw ConfigError("generator needs a linear head");
  if (gen.spec().output_dim != chi.spec().input_dim) throw ConfigError("generator output must match chi's input dimension");
}

std::uint64_t network_fingerprint(const nn::Network& net) {
  Fnv1a h;
  const auto& p = net.params();
  h.update(p.values.data(), static_cast<std::size_t>(p.values.size()) * sizeof(double));
  for (const auto& v : p.running_mean) h.update(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
  for (const auto& v : p.running_var) h.update(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
  return h.digest();
}

Eigen::MatrixXd generator_inputs(int states, std::span<const int> state, const Eigen::MatrixXd& noise) {
  const auto n = static_cast<Eigen::Index>(state.size());
  if (noise.rows() != n) throw DomainError("one noise row per state index is required");
  Eigen::MatrixXd in = Eigen::MatrixXd::Zero(n, states + noise.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    const int s = state[static_cast<std::size_t>(k)];
    if (s < 0 || s >= states) throw DomainError("state index out of range");
    in(k, s) = 1.0;
  }
  in.rightCols(noise.cols()) = noise;
  return in;
}

Eigen::RowVectorXd sample_generator(const GeneratorModel& model, int state, Rng& rng) {
  const int s[1] = {state};
  const Eigen::MatrixXd in = generator_inputs(model.states(), s, normals(1, model.noise_dim, rng));
  return model.gen.forward(in, nn::Mode::eval);
}

EdDraws draw_ed(const Eigen::MatrixXd& chi_x, int noise_dim, Rng& rng) {
  EdDraws d;
  const Eigen::Index B = chi_x.rows();
  d.I.resize(static_cast<std::size_t>(B));
  d.I2.resize(static_cast<std::size_t>(B));
  for (Eigen::Index n = 0; n < B; ++n) {
    const Eigen::RowVectorXd row = chi_x.row(n);
    d.I[static_cast<std::size_t>(n)] = draw_state(row, rng);
    d.I2[static_cast<std::size_t>(n)] = draw_state(row, rng);
  }
  d.eps = normals(B, noise_dim, rng);
  d.eps2 = normals(B, noise_dim, rng);
  return d;
}

EdTerms ed_terms(const GeneratorModel& model, EdDraws draws, const Frames& y, nn::Mode mode,
                 nn::ForwardCache* gen_cache) {
  const Eigen::Index B = y.rows();
  if (static_cast<Eigen::Index>(draws.I.size()) != B || static_cast<Eigen::Index>(draws.I2.size()) != B) {
    throw DomainError("draws do not match the batch");
  }
  std::vector<int> states(draws.I);
  states.insert(states.end(), draws.I2.begin(), draws.I2.end());
  Eigen::MatrixXd noise(2 * B, model.noise_dim);
  noise << draws.eps, draws.eps2;
  const Eigen::MatrixXd out = model.gen.forward(generator_inputs(model.states(), states, noise), mode, gen_cache);
  EdTerms t;
  t.a = out.topRows(B);
  t.a2 = out.bottomRows(B);
  t.d = (t.a - y).rowwise().norm() + (t.a2 - y).rowwise().norm() - (t.a - t.a2).rowwise().norm();
  t.draws = std::move(draws);
  return t;
}

EdTerms batch_ed_terms(const GeneratorModel& model, const Eigen::MatrixXd& chi_x, const Frames& y, Rng& rng,
                       nn::Mode mode, nn::ForwardCache* gen_cache) {
  return ed_terms(model, draw_ed(chi_x, model.noise_dim, rng), y, mode, gen_cache);
}

EdGradients ed_gradients(const GeneratorModel& model, const nn::ForwardCache& gen_cache, const EdTerms& terms,
                         const Frames& y, const nn::ForwardCache* chi_cache) {
  const Eigen::Index B = y.rows();
  const double inv_b = 1.0 / static_cast<double>(B);
  auto unit = [](const Eigen::MatrixXd& v) {
    Eigen::MatrixXd u = v;
    for (Eigen::Index n = 0; n < v.rows(); ++n) {
      const double norm = v.row(n).norm();
      if (norm > 0.0) u.row(n) /= norm;
      else u.row(n).setZero();  // subgradient at a kink
    }
    return u;
  };
  const Eigen::MatrixXd u = unit(terms.a - y);
  const Eigen::MatrixXd v = unit(terms.a2 - y);
  const Eigen::MatrixXd w = unit(terms.a - terms.a2);
  Eigen::MatrixXd grad_out(2 * B, y.cols());
  grad_out << (u - w) * inv_b, (v + w) * inv_b;

  EdGradients g;
  g.gen = model.gen.backward(gen_cache, grad_out);
  if (chi_cache) {
    if (model.chi.spec().head != nn::Head::softmax) throw ConfigError("score-function gradients need a softmax chi head");
    const Eigen::MatrixXd& chi = chi_cache->output;
    Eigen::MatrixXd grad_logits = -2.0 * chi;
    for (Eigen::Index n = 0; n < B; ++n) {
      grad_logits(n, terms.draws.I[static_cast<std::size_t>(n)]) += 1.0;
      grad_logits(n, terms.draws.I2[static_cast<std::size_t>(n)]) += 1.0;
    }
    grad_logits = (grad_logits.array().colwise() * terms.d.array()).matrix() * inv_b;
    g.chi = model.chi.backward_logits(*chi_cache, grad_logits);
  }
  return g;
}

double mean_energy_distance(const GeneratorModel& model, const PairDataset& data, std::uint64_t seed) {
  if (data.size() < 1) throw DataError("energy distance of an empty dataset");
  Rng rng(seed);
  const Eigen::MatrixXd chi_x = nn::predict(model.chi, data.x);
  double total = 0.0;
  for (Eigen::Index start = 0; start < data.size(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, data.size() - start);
    const EdTerms t = batch_ed_terms(model, chi_x.middleRows(start, n), data.y.middleRows(start, n), rng);
    total += t.d.sum();
  }
  return total / static_cast<double>(data.size());
}

GenTraining train_ed(const PairDataset& train, const PairDataset& validation, const nn::NetSpec& gen_spec,
                     const nn::NetSpec& chi_spec, const GenHyper& hyper, GenMode mode,
                     const nn::Network* frozen_chi) {
  if (mode == GenMode::ml_ed && !frozen_chi) throw ConfigError("ML-ED training needs a trained chi network");
  if (train.size() < 2 || validation.size() < 1) throw DataError("training needs at least 2 training and 1 validation pair");
  if (train.lag != validation.lag || train.dim() != validation.dim()) {
    throw DataError("training and validation pairs differ in lag or dimension");
  }
  if (hyper.batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (hyper.max_epochs < 0 || hyper.patience < 1) throw ConfigError("max_epochs must be >= 0 and patience >= 1");

  const auto start = Clock::now();
  Rng init_rng(derive_seed(hyper.seed, 0));
  Rng order_rng(derive_seed(hyper.seed, 1));
  const std::uint64_t val_seed = derive_seed(hyper.seed, 2);
  Rng draw_rng(derive_seed(hyper.seed, 3));

  GenTraining result;
  GeneratorModel& model = result.model;
  model.noise_dim = hyper.noise_dim;
  model.lag = train.lag;
  model.mode = mode;
  model.gen = nn::Network(gen_spec, init_rng);
  model.chi = mode == GenMode::ml_ed ? *frozen_chi : nn::Network(chi_spec, init_rng);
  model.validate();
  if (model.dim() != train.dim()) throw ConfigError("generator output does not match the data dimension");
  const bool train_chi = mode == GenMode::joint_ed;

  nn::AdamState gen_opt(model.gen.parameter_count(), hyper.learning_rate_gen);
  nn::AdamState chi_opt(model.chi.parameter_count(), hyper.learning_rate_chi);

  Eigen::MatrixXd chi_train;
  if (!train_chi) chi_train = nn::predict(model.chi, train.x);

  auto seconds = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  auto validation_score = [&](int epoch, long batch) {
    const double v = mean_energy_distance(model, validation, val_seed);
    if (!std::isfinite(v)) throw TrainingError(epoch, batch, "non-finite validation energy distance");
    return v;
  };

  double best = validation_score(0, 0);
  result.log.epochs.push_back({0, mean_energy_distance(model, train, derive_seed(hyper.seed, 4)), best, seconds()});
  nn::Params best_gen = model.gen.params();
  nn::Params best_chi = model.chi.params();
  int stale = 0;

  const auto n = static_cast<std::size_t>(train.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bsz = static_cast<std::size_t>(hyper.batch_size);

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    long batch_index = 0;
    double d_sum = 0.0;
    std::size_t d_count = 0;
    for (std::size_t begin = 0; begin < n; begin += bsz, ++batch_index) {
      const std::size_t end = std::min(n, begin + bsz);
      if (end - begin < 2) break;
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Frames yb = rows_of(train.y, idx);

      nn::ForwardCache chi_cache;
      const Eigen::MatrixXd chi_x =
          train_chi ? model.chi.forward(rows_of(train.x, idx), nn::Mode::train, &chi_cache) : rows_of(chi_train, idx);
      nn::ForwardCache gen_cache;
      const EdTerms terms = batch_ed_terms(model, chi_x, yb, draw_rng, nn::Mode::train, &gen_cache);
      const double mean_d = terms.d.mean();
      if (!std::isfinite(mean_d)) throw TrainingError(epoch, batch_index, "non-finite energy distance");
      d_sum += terms.d.sum();
      d_count += idx.size();

      try {
        const EdGradients g = ed_gradients(model, gen_cache, terms, yb, train_chi ? &chi_cache : nullptr);
        model.gen.update_running_stats(gen_cache);
        model.gen.adam_step(g.gen, gen_opt);
        if (train_chi) {
          model.chi.update_running_stats(chi_cache);
          model.chi.adam_step(g.chi, chi_opt);
        }
      } catch (const OptimizerError& e) {
        throw TrainingError(epoch, batch_index, e.what());
      }
    }

    const double val = validation_score(epoch, batch_index);
    result.log.epochs.push_back({epoch, d_count ? d_sum / static_cast<double>(d_count) : 0.0, val, seconds()});
    if (val < best) {
      best = val;
      best_gen = model.gen.params();
      best_chi = model.chi.params();
      result.log.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= hyper.patience) {
      result.log.early_stopped = true;
      break;
    }
  }

  model.gen.set_params(best_gen);
  model.chi.set_params(best_chi);
  model.chi_fingerprint = network_fingerprint(model.chi);
  return result;
}

TransitionMatrix estimate_K_generative(const GeneratorModel& model, int samples_per_state, Rng& rng) {
  if (samples_per_state < 1) throw DomainError("samples_per_state must be >= 1");
  const int m = model.states();
  TransitionMatrix T;
  T.K = Eigen::MatrixXd::Zero(m, m);
  T.lag = model.lag;
  T.source = MatrixSource::generative;
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index done = 0; done < samples_per_state; done += kChunk) {
      const Eigen::Index n = std::min<Eigen::Index>(kChunk, samples_per_state - done);
      const std::vector<int> states(static_cast<std::size_t>(n), i);
      const Eigen::MatrixXd y =
          model.gen.forward(generator_inputs(m, states, normals(n, model.noise_dim, rng)), nn::Mode::eval);
      if (!y.allFinite()) throw NumericError("generator produced a non-finite sample for state " + std::to_string(i));
      T.K.row(i) += model.chi.forward(y, nn::Mode::eval).colwise().sum();
    }
    T.K.row(i) /= T.K.row(i).sum();
  }
  T.validate();
  return T;
}

Trajectory generate_trajectory(const GeneratorModel& model, const Eigen::RowVectorXd& x0, std::int64_t n_steps,
                               Rng& rng) {
  if (n_steps < 0) throw DomainError("n_steps must be >= 0");
  if (x0.size() != model.dim()) throw DomainError("x0 has the wrong dimension");
  Trajectory traj;
  traj.stride = model.lag;
  traj.frames.resize(n_steps + 1, x0.size());
  traj.frames.row(0) = x0;
  Eigen::RowVectorXd x = x0;
  for (std::int64_t k = 1; k <= n_steps; ++k) {
    const Eigen::RowVectorXd chi = model.chi.forward(x, nn::Mode::eval);
    x = sample_generator(model, draw_state(chi, rng), rng);
    if (!x.allFinite()) throw NumericError("generator produced a non-finite frame at step " + std::to_string(k));
    traj.frames.row(k) = x;
  }
  return traj;
}

Frames sample_stationary(const GeneratorModel& model, const Eigen::VectorXd& pi, Eigen::Index n, Rng& rng) {
  if (pi.size() != model.states()) throw DomainError("pi has the wrong length");
  std::vector<int> states(static_cast<std::size_t>(n));
  for (auto& s : states) s = static_cast<int>(rng.categorical(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size()))));
  const Eigen::MatrixXd noise = normals(n, model.noise_dim, rng);
  return nn::predict(model.gen, generator_inputs(model.states(), states, noise));
}

nlohmann::json to_json(const GeneratorModel& model) {
  nlohmann::json j;
  j["kind"] = "generator";
  j["lag"] = model.lag;
  j["states"] = model.states();
  j["noise_dim"] = model.noise_dim;
  j["mode"] = to_string(model.mode);
  j["chi_fingerprint"] = model.chi_fingerprint;
  j["gen"] = model.gen;
  j["chi"] = model.chi;
  return j;
}

GeneratorModel generator_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "generator") throw DataError("not a generator model");
    GeneratorModel m;
    m.lag = j.at("lag").get<int>();
    m.noise_dim = j.at("noise_dim").get<int>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode != "joint_ed" && mode != "ml_ed") throw DataError("unknown generator mode '" + mode + "'");
    m.mode = mode == "joint_ed" ? GenMode::joint_ed : GenMode::ml_ed;
    m.chi_fingerprint = j.at("chi_fingerprint").get<std::uint64_t>();
    j.at("gen").get_to(m.gen);
    j.at("chi").get_to(m.chi);
    if (m.states() != j.at("states").get<int>()) throw DataError("generator model has inconsistent state counts");
    if (network_fingerprint(m.chi) != m.chi_fingerprint) throw DataError("chi does not match its recorded fingerprint");
    try {
      m.validate();
    } catch (const ConfigError& e) {
      throw DataError(e.what());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed generator model: ") + e.what());
  }
}

HoldoutReport holdout_region_experiment(std::span<const Trajectory> train_trajs, std::span<const Trajectory> val_trajs,
                                        int lag, const Interval& region, const Interval& domain,
                                        const HoldoutSetup& setup) {
  HoldoutReport report;
  report.region = region;
  report.region_empty = region.empty();
  if (!report.region_empty && region.lo <= domain.lo && region.hi >= domain.hi) {
    throw DomainError("holdout region covers the whole domain");
  }
  auto drop = [&](const PairDataset& all) {
    if (report.region_empty) return all;
    std::vector<std::size_t> keep;
    for (Eigen::Index t = 0; t < all.size(); ++t) {
      if (!region.contains(all.x(t, 0)) && !region.contains(all.y(t, 0))) keep.push_back(static_cast<std::size_t>(t));
    }
    return all.subset(keep);
  };
  const PairDataset full_train = make_pairs(train_trajs, lag, Split::train);
  const PairDataset train = drop(full_train);
  const PairDataset validation = drop(make_pairs(val_trajs, lag, Split::validation));
  report.pairs_total = static_cast<std::size_t>(full_train.size());
  report.pairs_kept = static_cast<std::size_t>(train.size());
  if (train.size() < 1000) {
    throw DataError("holdout leaves " + std::to_string(train.size()) + " training pairs, at least 1000 are needed");
  }
  if (validation.size() < 1) throw DataError("holdout leaves no validation pairs");

  TrainHyper rh = setup.resample_hyper;
  rh.seed = setup.seed;
  const ResampleTraining ml = train_ml(train, validation, setup.chi_spec, setup.gamma_spec, rh);
  GenHyper gh = setup.gen_hyper;
  gh.seed = derive_seed(setup.seed, 10);
  const GenTraining gen = train_ed(train, validation, setup.gen_spec, setup.chi_spec, gh, GenMode::ml_ed, &ml.model.chi);
  report.resample_best_epoch = ml.log.best_epoch;
  report.generator_best_epoch = gen.log.best_epoch;

  Rng rng(derive_seed(setup.seed, 11));
  const Trajectory generated = generate_trajectory(gen.model, train.x.row(0), setup.generate_steps, rng);
  const Trajectory resampled = resample_trajectory(ml.model, train.x.row(0), setup.generate_steps, rng);
  report.generated_frames = generated.size() - 1;
  for (Eigen::Index k = 1; k < generated.size(); ++k) {
    if (!report.region_empty && region.contains(generated.frames(k, 0))) ++report.generated_in_region;
    if (!report.region_empty && region.contains(resampled.frames(k, 0))) ++report.resampled_in_region;
  }
  report.generated_in_region_fraction =
      report.generated_frames > 0 ? static_cast<double>(report.generated_in_region) / static_cast<double>(report.generated_frames)
                                  : 0.0;
  report.generated_histogram = histogram(generated.frames.col(0).tail(report.generated_frames), setup.binning);
  report.training_histogram = histogram(train.y.col(0), setup.binning);
  return report;
}

}  // namespace dgmsm
