// dgmsm: simulate, train, analyze, compare and holdout commands.
//
// Exit codes: 0 success, 1 usage or config error, 2 data error,
// 3 numeric or training failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dgmsm/config.hpp"
#include "dgmsm/errors.hpp"
#include "dgmsm/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int replicate = 0;
  std::vector<std::string> data;
  std::vector<std::string> validation;
  std::string model;
  std::string chi_model;
  std::vector<std::string> reports;
  std::vector<double> region;
};

int exit_code(dgmsm::Error::Category c) {
  switch (c) {
    case dgmsm::Error::Category::usage:
      return 1;
    case dgmsm::Error::Category::data:
      return 2;
    case dgmsm::Error::Category::numeric:
      return 3;
  }
  return 3;
}

dgmsm::CommandOptions options_from(const Args& a, bool needs_config) {
  dgmsm::CommandOptions opt;
  if (!a.config.empty()) {
    opt.config = dgmsm::load_config(a.config);
    opt.config_dir = fs::path(a.config).parent_path();
  } else if (needs_config) {
    throw dgmsm::ConfigError("--config is required");
  }
  if (a.seed) opt.config.replicates.base_seed = *a.seed;
  if (a.replicate < 0) throw dgmsm::ConfigError("--replicate must be >= 0");
  opt.replicate = a.replicate;
  opt.out_dir = a.out;
  for (const auto& f : a.data) opt.train_files.emplace_back(f);
  for (const auto& f : a.validation) opt.validation_files.emplace_back(f);
  opt.model_path = a.model;
  opt.chi_model = a.chi_model;
  for (const auto& r : a.reports) opt.reports.emplace_back(r);
  if (!a.region.empty()) {
    if (a.region.size() != 2) throw dgmsm::ConfigError("--region takes two numbers: LO HI");
    opt.region = dgmsm::Interval{a.region[0], a.region[1]};
  }
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep probabilistic Markov state models"};
  app.set_version_flag("--version", dgmsm::kVersion);
  app.require_subcommand(1);
  Args a;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", a.config, "Experiment config (INI)");
    sub->add_option("--seed", a.seed, "Override replicates.base_seed");
    sub->add_option("--out", a.out, "Output directory")->capture_default_str();
    sub->add_option("--replicate", a.replicate, "Replicate index r (seeds base+r, base+1000+r)")->capture_default_str();
  };
  auto data_opts = [&](CLI::App* sub) {
    sub->add_option("--data", a.data, "Training trajectory files; simulated from the config when omitted");
    sub->add_option("--validation", a.validation, "Validation trajectory files");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate training and validation trajectories");
  common(simulate);
  auto* train = app.add_subcommand("train", "Train a model");
  common(train);
  data_opts(train);
  train->add_option("--chi-model", a.chi_model, "Resample model.json whose chi gen-ml-ed reuses");
  auto* analyze = app.add_subcommand("analyze", "Kinetic analysis of a model against the oracle");
  common(analyze);
  data_opts(analyze);
  analyze->add_option("--model", a.model, "model.json, centers.csv or 'oracle'")->required();
  auto* compare = app.add_subcommand("compare", "Compare analysis reports");
  common(compare);
  compare->add_option("reports", a.reports, "report.json files or report directories")->required();
  auto* holdout = app.add_subcommand("holdout", "Train without a region and count generated frames inside it");
  common(holdout);
  data_opts(holdout);
  holdout->add_option("--region", a.region, "LO HI (overrides [holdout])")->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) dgmsm::cmd_simulate(options_from(a, true));
    if (train->parsed()) dgmsm::cmd_train(options_from(a, true));
    if (analyze->parsed()) dgmsm::cmd_analyze(options_from(a, true));
    if (compare->parsed()) dgmsm::cmd_compare(options_from(a, false));
    if (holdout->parsed()) dgmsm::cmd_holdout(options_from(a, true));
  } catch (const dgmsm::Error& e) {
    std::cerr << "dgmsm: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "dgmsm: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
