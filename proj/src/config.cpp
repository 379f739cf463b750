#include "dgmsm/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dgmsm/errors.hpp"
#include "dgmsm/rng.hpp"

namespace dgmsm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError("config key '" + key + "': '" + value + "' is not " + expected);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, raw, std::is_integral_v<T> ? "an integer" : "a number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad_value(key, raw, "a boolean");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  if (trim(raw).empty()) return out;
  std::istringstream ss(raw);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number<T>(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

ModelFamily family_from_string(const std::string& key, const std::string& s) {
  if (s == "resample") return ModelFamily::resample;
  if (s == "gen-ed") return ModelFamily::gen_ed;
  if (s == "gen-ml-ed") return ModelFamily::gen_ml_ed;
  if (s == "baseline") return ModelFamily::baseline;
  bad_value(key, s, "one of resample, gen-ed, gen-ml-ed, baseline");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"simulate",
       {
           {"potential", [](auto& c, auto&, auto& v) { c.simulate.potential = trim(v); }},
           {"x0", [](auto& c, auto& k, auto& v) { c.simulate.x0 = parse_number<double>(k, v); }},
           {"dt", [](auto& c, auto& k, auto& v) { c.simulate.dt = parse_number<double>(k, v); }},
           {"train_steps", [](auto& c, auto& k, auto& v) { c.simulate.train_steps = parse_number<std::int64_t>(k, v); }},
           {"validation_steps",
            [](auto& c, auto& k, auto& v) { c.simulate.validation_steps = parse_number<std::int64_t>(k, v); }},
           {"stride", [](auto& c, auto& k, auto& v) { c.simulate.stride = parse_number<int>(k, v); }},
           {"format", [](auto& c, auto&, auto& v) { c.simulate.format = trim(v); }},
       }},
      {"dataset",
       {
           {"lag", [](auto& c, auto& k, auto& v) { c.dataset.lag = parse_number<int>(k, v); }},
           {"split", [](auto& c, auto&, auto& v) { c.dataset.split = trim(v); }},
           {"validation_fraction",
            [](auto& c, auto& k, auto& v) { c.dataset.validation_fraction = parse_number<double>(k, v); }},
       }},
      {"model",
       {
           {"family", [](auto& c, auto& k, auto& v) { c.model.family = family_from_string(k, trim(v)); }},
           {"objective", [](auto& c, auto&, auto& v) { c.model.objective = trim(v); }},
           {"states", [](auto& c, auto& k, auto& v) { c.model.states = parse_number<int>(k, v); }},
           {"hidden", [](auto& c, auto& k, auto& v) { c.model.hidden = parse_list<int>(k, v); }},
           {"activation",
            [](auto& c, auto& k, auto& v) {
              try {
                c.model.activation = nn::activation_from_string(trim(v));
              } catch (const Error&) {
                bad_value(k, v, "relu or elu");
              }
            }},
           {"batch_norm", [](auto& c, auto& k, auto& v) { c.model.batch_norm = parse_bool(k, v); }},
           {"gamma_head",
            [](auto& c, auto& k, auto& v) {
              const auto s = trim(v);
              if (s != "softplus" && s != "relu") bad_value(k, v, "softplus or relu");
              c.model.gamma_head = nn::head_from_string(s);
            }},
           {"learning_rate", [](auto& c, auto& k, auto& v) { c.model.learning_rate = parse_number<double>(k, v); }},
           {"generator_learning_rate",
            [](auto& c, auto& k, auto& v) { c.model.generator_learning_rate = parse_number<double>(k, v); }},
           {"batch_size", [](auto& c, auto& k, auto& v) { c.model.batch_size = parse_number<int>(k, v); }},
           {"max_epochs", [](auto& c, auto& k, auto& v) { c.model.max_epochs = parse_number<int>(k, v); }},
           {"patience", [](auto& c, auto& k, auto& v) { c.model.patience = parse_number<int>(k, v); }},
           {"noise_dim", [](auto& c, auto& k, auto& v) { c.model.noise_dim = parse_number<int>(k, v); }},
           {"samples_per_state",
            [](auto& c, auto& k, auto& v) { c.model.samples_per_state = parse_number<int>(k, v); }},
           {"kmeans_max_iterations",
            [](auto& c, auto& k, auto& v) { c.model.kmeans_max_iterations = parse_number<int>(k, v); }},
           {"chi_model", [](auto& c, auto&, auto& v) { c.model.chi_model = trim(v); }},
       }},
      {"analysis",
       {
           {"ck_steps", [](auto& c, auto& k, auto& v) { c.analysis.ck_steps = parse_list<int>(k, v); }},
           {"timescale_lags", [](auto& c, auto& k, auto& v) { c.analysis.timescale_lags = parse_list<int>(k, v); }},
           {"bins", [](auto& c, auto& k, auto& v) { c.analysis.binning.bins = parse_number<int>(k, v); }},
           {"bin_lo", [](auto& c, auto& k, auto& v) { c.analysis.binning.lo = parse_number<double>(k, v); }},
           {"bin_hi", [](auto& c, auto& k, auto& v) { c.analysis.binning.hi = parse_number<double>(k, v); }},
           {"grid_bins", [](auto& c, auto& k, auto& v) { c.analysis.grid_bins = parse_number<int>(k, v); }},
           {"generate_steps",
            [](auto& c, auto& k, auto& v) { c.analysis.generate_steps = parse_number<std::int64_t>(k, v); }},
           {"transition_samples",
            [](auto& c, auto& k, auto& v) { c.analysis.transition_samples = parse_number<int>(k, v); }},
           {"probes", [](auto& c, auto& k, auto& v) { c.analysis.probes = parse_list<double>(k, v); }},
       }},
      {"replicates",
       {
           {"count", [](auto& c, auto& k, auto& v) { c.replicates.count = parse_number<int>(k, v); }},
           {"base_seed", [](auto& c, auto& k, auto& v) { c.replicates.base_seed = parse_number<std::uint64_t>(k, v); }},
       }},
      {"holdout",
       {
           {"region_lo", [](auto& c, auto& k, auto& v) { c.holdout.region_lo = parse_number<double>(k, v); }},
           {"region_hi", [](auto& c, auto& k, auto& v) { c.holdout.region_hi = parse_number<double>(k, v); }},
       }},
  };
  return s;
}

void check_ranges(const ExperimentConfig& c) {
  require(c.simulate.dt > 0.0, "simulate.dt", "must be > 0");
  require(c.simulate.train_steps >= 1, "simulate.train_steps", "must be >= 1");
  require(c.simulate.validation_steps >= 0, "simulate.validation_steps", "must be >= 0");
  require(c.simulate.stride >= 1, "simulate.stride", "must be >= 1");
  require(c.simulate.train_steps % c.simulate.stride == 0, "simulate.train_steps", "must be a multiple of stride");
  require(c.simulate.validation_steps % c.simulate.stride == 0, "simulate.validation_steps",
          "must be a multiple of stride");
  require(c.simulate.format == "binary" || c.simulate.format == "csv", "simulate.format", "must be binary or csv");
  require(c.dataset.lag >= 1, "dataset.lag", "must be >= 1");
  require(c.dataset.split == "separate" || c.dataset.split == "fraction", "dataset.split",
          "must be separate or fraction");
  require(c.dataset.validation_fraction > 0.0 && c.dataset.validation_fraction < 1.0, "dataset.validation_fraction",
          "must be in (0, 1)");
  require(c.model.objective == "ml" || c.model.objective == "vamp_e", "model.objective", "must be ml or vamp_e");
  require(c.model.states >= 1, "model.states", "must be >= 1");
  for (int w : c.model.hidden) require(w >= 1, "model.hidden", "widths must be >= 1");
  require(c.model.learning_rate > 0.0, "model.learning_rate", "must be > 0");
  require(c.model.generator_learning_rate > 0.0, "model.generator_learning_rate", "must be > 0");
  require(c.model.batch_size >= 2, "model.batch_size", "must be >= 2");
  require(c.model.max_epochs >= 0, "model.max_epochs", "must be >= 0");
  require(c.model.patience >= 1, "model.patience", "must be >= 1");
  require(c.model.noise_dim >= 1, "model.noise_dim", "must be >= 1");
  require(c.model.samples_per_state >= 1, "model.samples_per_state", "must be >= 1");
  require(c.model.kmeans_max_iterations >= 1, "model.kmeans_max_iterations", "must be >= 1");
  for (int n : c.analysis.ck_steps) require(n >= 1, "analysis.ck_steps", "entries must be >= 1");
  for (int n : c.analysis.timescale_lags) require(n >= 1, "analysis.timescale_lags", "entries must be >= 1");
  require(c.analysis.binning.bins >= 1, "analysis.bins", "must be >= 1");
  require(c.analysis.binning.hi > c.analysis.binning.lo, "analysis.bin_hi", "must exceed analysis.bin_lo");
  require(c.analysis.grid_bins >= 2, "analysis.grid_bins", "must be >= 2");
  require(c.analysis.generate_steps >= 1, "analysis.generate_steps", "must be >= 1");
  require(c.analysis.transition_samples >= 1, "analysis.transition_samples", "must be >= 1");
  require(c.replicates.count >= 1, "replicates.count", "must be >= 1");
}

}  // namespace

const char* to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::resample: return "resample";
    case ModelFamily::gen_ed: return "gen-ed";
    case ModelFamily::gen_ml_ed: return "gen-ml-ed";
    case ModelFamily::baseline: return "baseline";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig cfg;
  const auto& sch = schema();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' is outside any section");
    const auto sec = sch.find(section);
    if (sec == sch.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ConfigError("unknown config key '" + full + "'");
      setter->second(cfg, full, value.data());
    }
  }
  check_ranges(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  o.precision(17);
  o << "simulate.potential = " << simulate.potential << '\n'
    << "simulate.x0 = " << simulate.x0 << '\n'
    << "simulate.dt = " << simulate.dt << '\n'
    << "simulate.train_steps = " << simulate.train_steps << '\n'
    << "simulate.validation_steps = " << simulate.validation_steps << '\n'
    << "simulate.stride = " << simulate.stride << '\n'
    << "simulate.format = " << simulate.format << '\n'
    << "dataset.lag = " << dataset.lag << '\n'
    << "dataset.split = " << dataset.split << '\n'
    << "dataset.validation_fraction = " << dataset.validation_fraction << '\n'
    << "model.family = " << to_string(model.family) << '\n'
    << "model.objective = " << model.objective << '\n'
    << "model.states = " << model.states << '\n'
    << "model.hidden = " << join(model.hidden) << '\n'
    << "model.activation = " << nn::to_string(model.activation) << '\n'
    << "model.batch_norm = " << (model.batch_norm ? "true" : "false") << '\n'
    << "model.gamma_head = " << nn::to_string(model.gamma_head) << '\n'
    << "model.learning_rate = " << model.learning_rate << '\n'
    << "model.generator_learning_rate = " << model.generator_learning_rate << '\n'
    << "model.batch_size = " << model.batch_size << '\n'
    << "model.max_epochs = " << model.max_epochs << '\n'
    << "model.patience = " << model.patience << '\n'
    << "model.noise_dim = " << model.noise_dim << '\n'
    << "model.samples_per_state = " << model.samples_per_state << '\n'
    << "model.kmeans_max_iterations = " << model.kmeans_max_iterations << '\n'
    << "model.chi_model = " << model.chi_model << '\n'
    << "analysis.ck_steps = " << join(analysis.ck_steps) << '\n'
    << "analysis.timescale_lags = " << join(analysis.timescale_lags) << '\n'
    << "analysis.bins = " << analysis.binning.bins << '\n'
    << "analysis.bin_lo = " << analysis.binning.lo << '\n'
    << "analysis.bin_hi = " << analysis.binning.hi << '\n'
    << "analysis.grid_bins = " << analysis.grid_bins << '\n'
    << "analysis.generate_steps = " << analysis.generate_steps << '\n'
    << "analysis.transition_samples = " << analysis.transition_samples << '\n'
    << "analysis.probes = " << join(analysis.probes) << '\n'
    << "replicates.count = " << replicates.count << '\n'
    << "replicates.base_seed = " << replicates.base_seed << '\n'
    << "holdout.region_lo = " << holdout.region_lo << '\n'
    << "holdout.region_hi = " << holdout.region_hi << '\n';
  return o.str();
}

std::string ExperimentConfig::hash() const {
  const std::string text = canonical();
  Fnv1a h;
  h.update(text.data(), text.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

PotentialSpec ExperimentConfig::potential(const std::filesystem::path& base_dir) const {
  if (simulate.potential == "prinz") return PotentialSpec::prinz();
  std::filesystem::path p(simulate.potential);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  std::ifstream in(p);
  if (!in) throw ConfigError("config key 'simulate.potential': cannot read " + p.string());
  try {
    nlohmann::json j;
    in >> j;
    return j.get<PotentialSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key 'simulate.potential': " + std::string(e.what()));
  }
}

nn::NetSpec ExperimentConfig::chi_spec(int input_dim) const {
  nn::NetSpec s;
  s.input_dim = input_dim;
  s.hidden = model.hidden;
  s.activation = model.activation;
  s.batch_norm = model.batch_norm;
  s.head = nn::Head::softmax;
  s.output_dim = model.states;
  return s;
}

nn::NetSpec ExperimentConfig::gamma_spec(int input_dim) const {
  nn::NetSpec s = chi_spec(input_dim);
  s.head = model.gamma_head;
  return s;
}

nn::NetSpec ExperimentConfig::generator_spec(int output_dim) const {
  nn::NetSpec s = chi_spec(model.states + model.noise_dim);
  s.head = nn::Head::linear;
  s.output_dim = output_dim;
  return s;
}

}  // namespace dgmsm
