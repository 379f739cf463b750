#include "dgmsm/pipeline.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "dgmsm/csv.hpp"
#include "dgmsm/errors.hpp"
#include "dgmsm/oracle.hpp"

namespace dgmsm {

namespace fs = std::filesystem;

namespace {

const std::vector<Trajectory>& nonempty(const std::vector<Trajectory>& trajs, const char* what) {
  if (trajs.empty()) throw DataError(std::string("no ") + what + " trajectories");
  return trajs;
}

PairDataset train_pairs(const DataSplit& data, int lag) {
  PairDataset p = make_pairs(nonempty(data.train, "training"), lag, Split::train);
  if (p.size() < 1) throw DataError("no training pairs at lag " + std::to_string(lag));
  return p;
}

PairDataset validation_pairs(const DataSplit& data, int lag) {
  PairDataset p = make_pairs(nonempty(data.validation, "validation"), lag, Split::validation);
  if (p.size() < 1) throw DataError("no validation pairs at lag " + std::to_string(lag));
  return p;
}

/// The last `fraction` of every trajectory becomes validation data.
DataSplit split_tail(std::vector<Trajectory> trajs, double fraction) {
  DataSplit d;
  for (auto& t : trajs) {
    const auto n_val = static_cast<Eigen::Index>(static_cast<double>(t.size()) * fraction);
    Trajectory tail = t;
    tail.frames = t.frames.bottomRows(n_val);
    t.frames = Frames(t.frames.topRows(t.size() - n_val));
    d.train.push_back(std::move(t));
    d.validation.push_back(std::move(tail));
  }
  return d;
}

int data_dim(const DataSplit& data) { return static_cast<int>(nonempty(data.train, "training").front().dim()); }

/// Memoized re-estimation at other lags (shared by the timescale scan and the CK test).
class LagCache {
 public:
  LagCache(const TransitionMatrix& base, std::function<TransitionMatrix(int)> fit) : fit_(std::move(fit)) {
    cache_.emplace(base.lag, base);
  }
  const TransitionMatrix& at(int lag) {
    auto it = cache_.find(lag);
    if (it == cache_.end()) it = cache_.emplace(lag, fit_(lag)).first;
    return it->second;
  }

 private:
  std::function<TransitionMatrix(int)> fit_;
  std::map<int, TransitionMatrix> cache_;
};

/// Fills everything derived from K and the lag cache.
void fill_kinetics(KineticsReport& r, const TransitionMatrix& K, LagCache& cache, const AnalysisContext& ctx) {
  r.lag = K.lag;
  r.states = K.states();
  r.pi = stationary_vector(K);
  r.slowest_timescale = implied_timescales(K).front();
  for (int lag : ctx.cfg->analysis.timescale_lags) {
    const std::vector<double> ts = implied_timescales(cache.at(lag));
    for (std::size_t k = 0; k < ts.size(); ++k) r.timescales.push_back({lag, static_cast<int>(k) + 2, ts[k]});
  }
  r.ck = ck_test(K, ctx.cfg->analysis.ck_steps, [&](int n) { return cache.at(n * K.lag); });
  r.binning = ctx.cfg->analysis.binning;
  r.probe_points = ctx.oracle ? ctx.probes : std::vector<double>{};
  r.has_oracle = ctx.oracle.has_value();
  if (ctx.oracle) {
    r.oracle_histogram = ctx.oracle->pi_hist;
    r.oracle_slowest_timescale = ctx.oracle->slowest_timescale(static_cast<long>(K.lag) * ctx.stride) / ctx.stride;
  } else {
    r.oracle_histogram = Eigen::VectorXd::Zero(r.binning.bins);
  }
}

/// KL of the model's stationary and transition histograms against the oracle.
void score_against_oracle(KineticsReport& r, const AnalysisContext& ctx,
                          const std::function<Frames(double, int)>& transition_draws) {
  if (!ctx.oracle) return;
  r.kl_stationary = kl_divergence(r.stationary_histogram, ctx.oracle->pi_hist);
  for (double x : ctx.probes) {
    const Frames draws = transition_draws(x, ctx.cfg->analysis.transition_samples);
    const Eigen::VectorXd model_hist = histogram(draws.col(0), r.binning);
    const Eigen::VectorXd exact = ctx.oracle->transition_hist(x, static_cast<long>(r.lag) * ctx.stride);
    r.kl_transition.push_back(kl_divergence(model_hist, exact));
  }
}

Eigen::RowVectorXd point(double x, int dim) {
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(dim);
  p(0) = x;
  return p;
}

Frames concatenate(const std::vector<Trajectory>& trajs) {
  Eigen::Index n = 0;
  for (const auto& t : trajs) n += t.size();
  Frames out(n, nonempty(trajs, "training").front().dim());
  Eigen::Index row = 0;
  for (const auto& t : trajs) {
    out.middleRows(row, t.size()) = t.frames;
    row += t.size();
  }
  return out;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_relative() && !base.empty() ? base / p : p; }

DataSplit data_for(const CommandOptions& opt) {
  if (opt.train_files.empty()) return simulate_data(opt.config, opt.config.potential(opt.config_dir), opt.replicate);
  return load_data(opt.config, opt.train_files, opt.validation_files);
}

nlohmann::json model_envelope(const CommandOptions& opt, ModelFamily family, nlohmann::json body) {
  return {{"dgmsm_version", kVersion},
          {"config_hash", opt.config.hash()},
          {"family", to_string(family)},
          {"replicate", opt.replicate},
          {"model", std::move(body)}};
}

ResampleModel load_resample_chi_source(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  if (!j.contains("family") || j.at("family") != to_string(ModelFamily::resample)) {
    throw ConfigError(path.string() + " is not a resample model");
  }
  return resample_model_from_json(j.at("model"));
}

}  // namespace

DataSplit simulate_data(const ExperimentConfig& cfg, const PotentialSpec& spec, int replicate) {
  const auto& s = cfg.simulate;
  const std::uint64_t seed = cfg.data_seed(replicate);
  SimulateOptions so;
  so.stride = s.stride;
  DataSplit d;
  d.train.push_back(simulate(spec, s.x0, s.train_steps, s.dt, seed, so));
  if (cfg.dataset.split == "fraction") return split_tail(std::move(d.train), cfg.dataset.validation_fraction);
  d.validation.push_back(simulate(spec, s.x0, s.validation_steps, s.dt, derive_seed(seed, 1), so));
  return d;
}

DataSplit load_data(const ExperimentConfig& cfg, const std::vector<fs::path>& train_files,
                    const std::vector<fs::path>& validation_files) {
  DataSplit d;
  for (const auto& f : train_files) d.train.push_back(load_trajectory(f));
  if (d.train.empty()) throw DataError("no training trajectories given");
  for (const auto& t : d.train) {
    t.validate();
    if (t.dim() != d.train.front().dim()) throw DataError("training trajectories differ in dimension");
  }
  if (cfg.dataset.split == "fraction") return split_tail(std::move(d.train), cfg.dataset.validation_fraction);
  for (const auto& f : validation_files) d.validation.push_back(load_trajectory(f));
  if (d.validation.empty()) throw DataError("dataset.split = separate needs validation trajectories");
  for (const auto& t : d.validation) {
    t.validate();
    if (t.dim() != d.train.front().dim()) throw DataError("validation trajectories differ in dimension from training");
  }
  return d;
}

AnalysisContext make_analysis_context(const ExperimentConfig& cfg, const PotentialSpec& spec, int dim,
                                      std::uint64_t seed) {
  AnalysisContext ctx;
  ctx.cfg = &cfg;
  ctx.seed = seed;
  ctx.stride = cfg.simulate.stride;
  if (dim == 1) {
    ctx.oracle = make_reference(spec, cfg.analysis.grid_bins, cfg.simulate.dt, cfg.analysis.binning);
    ctx.probes = cfg.analysis.probes.empty() ? local_minima(spec) : cfg.analysis.probes;
  }
  return ctx;
}

TrainHyper resample_hyper(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainHyper h;
  h.learning_rate = cfg.model.learning_rate;
  h.batch_size = cfg.model.batch_size;
  h.max_epochs = cfg.model.max_epochs;
  h.patience = cfg.model.patience;
  h.seed = seed;
  return h;
}

GenHyper generator_hyper(const ExperimentConfig& cfg, std::uint64_t seed) {
  GenHyper h;
  h.learning_rate_gen = cfg.model.generator_learning_rate;
  h.learning_rate_chi = cfg.model.learning_rate;
  h.batch_size = cfg.model.batch_size;
  h.max_epochs = cfg.model.max_epochs;
  h.patience = cfg.model.patience;
  h.noise_dim = cfg.model.noise_dim;
  h.seed = seed;
  return h;
}

TransitionMatrix resample_K_at(const ResampleModel& model, const DataSplit& data, int lag, const ExperimentConfig& cfg,
                               std::uint64_t seed) {
  const PairDataset train = train_pairs(data, lag);
  if (lag == model.lag && model.bound()) return estimate_K_resample(model, train);
  const int d = data_dim(data);
  const ResampleTraining fit = train_resample(train, validation_pairs(data, lag), cfg.chi_spec(d), cfg.gamma_spec(d),
                                              resample_hyper(cfg, seed), model.objective, &model.chi);
  return estimate_K_resample(fit.model, train);
}

TransitionMatrix generative_K_at(const GeneratorModel& model, const DataSplit& data, int lag,
                                 const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  if (lag == model.lag) {
    TransitionMatrix K = estimate_K_generative(model, cfg.model.samples_per_state, rng);
    K.lag = lag;
    return K;
  }
  GenHyper h = generator_hyper(cfg, seed);
  h.noise_dim = model.noise_dim;
  const GenTraining fit = train_ed(train_pairs(data, lag), validation_pairs(data, lag), model.gen.spec(),
                                   model.chi.spec(), h, GenMode::ml_ed, &model.chi);
  TransitionMatrix K = estimate_K_generative(fit.model, cfg.model.samples_per_state, rng);
  K.lag = lag;
  return K;
}

KineticsReport analyze_resample(const ResampleModel& model_in, const DataSplit& data, const AnalysisContext& ctx) {
  ResampleModel model = model_in;
  const PairDataset train = train_pairs(data, model.lag);
  if (!model.bound()) {
    const std::uint64_t recorded = model.data_fingerprint;
    model.bind(train);
    if (recorded != 0 && recorded != model.data_fingerprint) {
      throw DataError("model was trained on different data (fingerprint mismatch)");
    }
  }
  const TransitionMatrix K = estimate_K_resample(model, train);
  LagCache cache(K, [&](int lag) { return resample_K_at(model, data, lag, *ctx.cfg, derive_seed(ctx.seed, 100 + lag)); });

  KineticsReport r;
  r.model_tag = model.objective == ResampleObjective::ml ? "resample" : "resample-vamp_e";
  r.seed = ctx.seed;
  fill_kinetics(r, K, cache, ctx);
  r.stationary_histogram = histogram(model.landing_frames.col(0), r.binning,
                                     stationary_density_weights(r.pi, model.landing_weights));
  Rng rng(derive_seed(ctx.seed, 2));
  score_against_oracle(r, ctx, [&](double x, int n) {
    const Eigen::RowVectorXd x0 = point(x, data_dim(data));
    Frames out(n, x0.size());
    for (int k = 0; k < n; ++k) out.row(k) = resample_step(model, x0, rng);
    return out;
  });
  r.validate();
  return r;
}

KineticsReport analyze_generator(const GeneratorModel& model, const DataSplit& data, const AnalysisContext& ctx) {
  const TransitionMatrix K = generative_K_at(model, data, model.lag, *ctx.cfg, derive_seed(ctx.seed, 100 + model.lag));
  LagCache cache(K, [&](int lag) { return generative_K_at(model, data, lag, *ctx.cfg, derive_seed(ctx.seed, 100 + lag)); });

  KineticsReport r;
  r.model_tag = model.mode == GenMode::ml_ed ? "gen-ml-ed" : "gen-ed";
  r.seed = ctx.seed;
  fill_kinetics(r, K, cache, ctx);
  Rng rng(derive_seed(ctx.seed, 2));
  const Trajectory traj =
      generate_trajectory(model, nonempty(data.train, "training").front().frames.row(0), ctx.cfg->analysis.generate_steps, rng);
  r.stationary_histogram = histogram(traj.frames.col(0).tail(traj.size() - 1), r.binning);
  score_against_oracle(r, ctx, [&](double x, int n) {
    const Eigen::MatrixXd chi_x = predict(model.chi, point(x, model.dim()));
    std::vector<int> states(static_cast<std::size_t>(n));
    Eigen::MatrixXd noise(n, model.noise_dim);
    for (int k = 0; k < n; ++k) {
      states[static_cast<std::size_t>(k)] = static_cast<int>(
          rng.categorical(std::span<const double>(chi_x.data(), static_cast<std::size_t>(chi_x.size()))));
      for (int c = 0; c < model.noise_dim; ++c) noise(k, c) = rng.normal();
    }
    return Frames(predict(model.gen, generator_inputs(model.states(), states, noise)));
  });
  r.validate();
  return r;
}

KineticsReport analyze_baseline(const KMeansModel& model, const DataSplit& data, int lag, const AnalysisContext& ctx) {
  if (model.centers.cols() != data_dim(data)) throw DataError("cluster centers do not match the data dimension");
  const TransitionMatrix K = count_transition_matrix(model, data.train, lag);
  LagCache cache(K, [&](int l) { return count_transition_matrix(model, data.train, l); });

  KineticsReport r;
  r.model_tag = "baseline";
  r.seed = ctx.seed;
  fill_kinetics(r, K, cache, ctx);
  const ClusterPools pools = build_pools(model, data.train);
  r.stationary_histogram = histogram(pools.frames.col(0), r.binning, baseline_mixture_weights(pools, model, r.pi));
  Rng rng(derive_seed(ctx.seed, 2));
  score_against_oracle(r, ctx, [&](double x, int n) {
    const Eigen::RowVectorXd x0 = point(x, data_dim(data));
    Frames out(n, x0.size());
    for (int k = 0; k < n; ++k) out.row(k) = baseline_resample_step(model, K, pools, x0, rng);
    return out;
  });
  r.validate();
  return r;
}

KineticsReport analyze_oracle(int lag, const AnalysisContext& ctx) {
  if (!ctx.oracle) throw DataError("no oracle for this data");
  const auto& ref = *ctx.oracle;
  const int m = ctx.cfg->model.states;
  KineticsReport r;
  r.model_tag = "oracle";
  r.seed = ctx.seed;
  r.lag = lag;
  r.states = ref.kernel.n_bins();
  r.pi = ref.pi_grid;
  for (int l : ctx.cfg->analysis.timescale_lags) {
    const std::vector<double> ts = oracle_timescales(ref.kernel, static_cast<long>(l) * ctx.stride, m);
    for (std::size_t k = 0; k < ts.size(); ++k) r.timescales.push_back({l, static_cast<int>(k) + 2, ts[k] / ctx.stride});
  }
  for (int n : ctx.cfg->analysis.ck_steps) r.ck.push_back({n, 0.0});  // exact semigroup
  r.binning = ctx.cfg->analysis.binning;
  r.stationary_histogram = ref.pi_hist;
  r.oracle_histogram = ref.pi_hist;
  r.kl_stationary = 0.0;
  r.probe_points = ctx.probes;
  r.kl_transition.assign(ctx.probes.size(), 0.0);
  r.slowest_timescale = ref.slowest_timescale(static_cast<long>(lag) * ctx.stride) / ctx.stride;
  r.oracle_slowest_timescale = r.slowest_timescale;
  r.validate();
  return r;
}

std::string CommandOptions::comment() const { return std::string("dgmsm ") + kVersion + " config " + config.hash(); }

void cmd_simulate(const CommandOptions& opt) {
  const auto& cfg = opt.config;
  const PotentialSpec spec = cfg.potential(opt.config_dir);
  const DataSplit d = simulate_data(cfg, spec, opt.replicate);
  fs::create_directories(opt.out_dir);
  const std::string ext = cfg.simulate.format == "csv" ? ".csv" : ".bin";
  save_trajectory(d.train.front(), opt.out_dir / ("train" + ext));
  save_trajectory(d.validation.front(), opt.out_dir / ("validation" + ext));
  nlohmann::json meta = {{"dgmsm_version", kVersion},
                         {"config_hash", cfg.hash()},
                         {"replicate", opt.replicate},
                         {"train_seed", d.train.front().seed},
                         {"validation_seed", d.validation.front().seed},
                         {"split", cfg.dataset.split},
                         {"dt", cfg.simulate.dt},
                         {"stride", cfg.simulate.stride},
                         {"x0", cfg.simulate.x0},
                         {"train_frames", d.train.front().size()},
                         {"validation_frames", d.validation.front().size()},
                         {"potential", spec}};
  write_json(meta, opt.out_dir / "metadata.json");
}

void cmd_train(const CommandOptions& opt) {
  const auto& cfg = opt.config;
  const DataSplit data = data_for(opt);
  const int d = data_dim(data);
  const int lag = cfg.dataset.lag;
  const std::uint64_t seed = cfg.init_seed(opt.replicate);
  fs::create_directories(opt.out_dir);
  const std::string comment = opt.comment();

  switch (cfg.model.family) {
    case ModelFamily::resample: {
      const auto objective = cfg.model.objective == "vamp_e" ? ResampleObjective::vamp_e : ResampleObjective::ml;
      const ResampleTraining fit = train_resample(train_pairs(data, lag), validation_pairs(data, lag), cfg.chi_spec(d),
                                                  cfg.gamma_spec(d), resample_hyper(cfg, seed), objective);
      write_json(model_envelope(opt, cfg.model.family, to_json(fit.model)), opt.out_dir / "model.json");
      save_training_log(fit.log, opt.out_dir / "training_log.csv", comment);
      return;
    }
    case ModelFamily::gen_ed:
    case ModelFamily::gen_ml_ed: {
      const bool ml = cfg.model.family == ModelFamily::gen_ml_ed;
      std::optional<ResampleModel> source;
      if (ml) {
        const fs::path chi_path = !opt.chi_model.empty() ? opt.chi_model
                                  : !cfg.model.chi_model.empty() ? resolve(cfg.model.chi_model, opt.config_dir)
                                                                 : fs::path();
        if (chi_path.empty()) throw ConfigError("gen-ml-ed needs a chi model (--chi-model or model.chi_model)");
        source = load_resample_chi_source(chi_path);
        if (source->chi.spec().input_dim != d) throw ConfigError("chi model input dimension does not match the data");
      }
      const GenTraining fit = train_ed(train_pairs(data, lag), validation_pairs(data, lag), cfg.generator_spec(d),
                                       cfg.chi_spec(d), generator_hyper(cfg, seed), ml ? GenMode::ml_ed : GenMode::joint_ed,
                                       ml ? &source->chi : nullptr);
      write_json(model_envelope(opt, cfg.model.family, to_json(fit.model)), opt.out_dir / "model.json");
      save_training_log(fit.log, opt.out_dir / "training_log.csv", comment);
      return;
    }
    case ModelFamily::baseline: {
      const KMeansModel km = kmeans_fit(concatenate(data.train), cfg.model.states, seed, cfg.model.kmeans_max_iterations);
      save_centers_csv(km, opt.out_dir / "centers.csv", comment);
      save_matrix_csv(count_transition_matrix(km, data.train, lag), opt.out_dir / "K.csv", comment);
      auto out = open_csv(opt.out_dir / "kmeans_log.csv", comment, "iteration,inertia");
      for (std::size_t k = 0; k < km.inertia_history.size(); ++k) out << k + 1 << ',' << km.inertia_history[k] << '\n';
      return;
    }
  }
}

void cmd_analyze(const CommandOptions& opt) {
  const auto& cfg = opt.config;
  if (opt.model_path.empty()) throw ConfigError("analyze needs --model (a model.json, centers.csv or 'oracle')");
  const PotentialSpec spec = cfg.potential(opt.config_dir);
  const std::uint64_t seed = cfg.data_seed(opt.replicate);
  KineticsReport report;
  if (opt.model_path == "oracle") {
    const AnalysisContext ctx = make_analysis_context(cfg, spec, 1, seed);
    report = analyze_oracle(cfg.dataset.lag, ctx);
  } else {
    const DataSplit data = data_for(opt);
    const AnalysisContext ctx = make_analysis_context(cfg, spec, data_dim(data), seed);
    if (opt.model_path.extension() == ".csv") {
      report = analyze_baseline(load_centers_csv(opt.model_path), data, cfg.dataset.lag, ctx);
    } else {
      const nlohmann::json j = read_json(opt.model_path);
      if (!j.contains("family") || !j.contains("model")) throw DataError(opt.model_path.string() + ": not a dgmsm model");
      const std::string family = j.at("family").get<std::string>();
      if (family == to_string(ModelFamily::resample)) {
        report = analyze_resample(resample_model_from_json(j.at("model")), data, ctx);
      } else if (family == to_string(ModelFamily::gen_ed) || family == to_string(ModelFamily::gen_ml_ed)) {
        report = analyze_generator(generator_model_from_json(j.at("model")), data, ctx);
      } else {
        throw DataError(opt.model_path.string() + ": unknown model family '" + family + "'");
      }
    }
  }
  save_report(report, opt.out_dir, opt.comment());
}

void cmd_compare(const CommandOptions& opt) {
  std::vector<KineticsReport> reports;
  for (const auto& p : opt.reports) reports.push_back(load_report(p));
  const std::vector<CompareRow> rows = compare_reports(reports);
  fs::create_directories(opt.out_dir);
  save_comparison(rows, opt.out_dir / "comparison.csv", opt.comment());
  std::cout.precision(6);
  for (const auto& r : rows) {
    std::cout << r.model_tag << " (n=" << r.replicates << ")  KL_pi " << r.kl_stationary.mean << " +- "
              << r.kl_stationary.stddev << "  KL_trans " << r.kl_transition.mean << " +- " << r.kl_transition.stddev
              << "  t2 rel.err " << r.timescale_relative_error.mean << " +- " << r.timescale_relative_error.stddev << '\n';
  }
}

void cmd_holdout(const CommandOptions& opt) {
  const auto& cfg = opt.config;
  const Interval region = opt.region.value_or(Interval{cfg.holdout.region_lo, cfg.holdout.region_hi});
  const DataSplit data = data_for(opt);
  const int d = data_dim(data);
  const std::uint64_t seed = cfg.init_seed(opt.replicate);
  HoldoutSetup setup;
  setup.chi_spec = cfg.chi_spec(d);
  setup.gamma_spec = cfg.gamma_spec(d);
  setup.gen_spec = cfg.generator_spec(d);
  setup.resample_hyper = resample_hyper(cfg, seed);
  setup.gen_hyper = generator_hyper(cfg, seed);
  setup.generate_steps = cfg.analysis.generate_steps;
  setup.seed = seed;
  setup.binning = cfg.analysis.binning;
  const HoldoutReport h =
      holdout_region_experiment(data.train, data.validation, cfg.dataset.lag, region, cfg.potential(opt.config_dir).domain, setup);

  fs::create_directories(opt.out_dir);
  nlohmann::json j = {{"dgmsm_version", kVersion},
                      {"config_hash", cfg.hash()},
                      {"region", {{"lo", region.lo}, {"hi", region.hi}}},
                      {"region_empty", h.region_empty},
                      {"pairs_total", h.pairs_total},
                      {"pairs_kept", h.pairs_kept},
                      {"generated_frames", h.generated_frames},
                      {"generated_in_region", h.generated_in_region},
                      {"generated_in_region_fraction", h.generated_in_region_fraction},
                      {"resampled_in_region", h.resampled_in_region},
                      {"resample_best_epoch", h.resample_best_epoch},
                      {"generator_best_epoch", h.generator_best_epoch}};
  write_json(j, opt.out_dir / "holdout.json");
  auto out = open_csv(opt.out_dir / "holdout_histogram.csv", opt.comment(), "bin_center,generated,training");
  const Eigen::VectorXd c = setup.binning.centers();
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    out << c(i) << ',' << h.generated_histogram(i) << ',' << h.training_histogram(i) << '\n';
  }
}

}  // namespace dgmsm
