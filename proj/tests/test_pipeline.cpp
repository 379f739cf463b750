#include "doctest.h"
#include "dgmsm/errors.hpp"
#include "dgmsm/pipeline.hpp"
#include "helpers.hpp"

using namespace dgmsm;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"([simulate]
train_steps = 20000
validation_steps = 8000
[model]
hidden = 16, 16
max_epochs = 2
samples_per_state = 500
[analysis]
timescale_lags = 1, 5
ck_steps = 2
generate_steps = 2000
transition_samples = 2000
)";

CommandOptions small_options(const std::string& name) {
  CommandOptions opt;
  opt.config = parse_config(kSmall);
  opt.out_dir = testing::scratch(name);
  return opt;
}

KineticsReport dummy_report(const std::string& tag, double t2) {
  KineticsReport r;
  r.model_tag = tag;
  r.states = 2;
  r.pi = Eigen::Vector2d(0.4, 0.6);
  r.binning = Binning{-1, 1, 4};
  r.stationary_histogram = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4);
  r.oracle_histogram = Eigen::Vector4d(0.25, 0.25, 0.25, 0.25);
  r.kl_stationary = 0.1;
  r.probe_points = {0.0};
  r.kl_transition = {0.2};
  r.timescales = {{1, 2, t2}};
  r.slowest_timescale = t2;
  r.oracle_slowest_timescale = 10.0;
  return r;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("simulate writes both trajectories and is byte-identical across runs") {
    CommandOptions a = small_options("sim_a"), b = small_options("sim_b");
    cmd_simulate(a);
    cmd_simulate(b);
    for (const char* f : {"train.bin", "validation.bin", "metadata.json"}) {
      CHECK(testing::slurp(a.out_dir / f) == testing::slurp(b.out_dir / f));
    }
    CHECK(load_trajectory(a.out_dir / "train.bin").size() == 20001);
    CHECK(load_trajectory(a.out_dir / "validation.bin").size() == 8001);
  }

  TEST_CASE("replicates use distinct seeds") {
    const auto cfg = parse_config(kSmall);
    const DataSplit r0 = simulate_data(cfg, PotentialSpec::prinz(), 0);
    const DataSplit r1 = simulate_data(cfg, PotentialSpec::prinz(), 1);
    CHECK(r0.train.front().frames != r1.train.front().frames);
    CHECK(r0.train.front().seed == cfg.data_seed(0));
    CHECK(r0.validation.front().seed == derive_seed(cfg.data_seed(0), 1));
  }

  TEST_CASE("fraction split holds out the tail") {
    const auto cfg = parse_config(std::string(kSmall) + "[dataset]\nsplit = fraction\nvalidation_fraction = 0.25\n");
    const DataSplit d = simulate_data(cfg, PotentialSpec::prinz(), 0);
    CHECK(d.train.front().size() + d.validation.front().size() == 20001);
    CHECK(d.validation.front().size() == 5000);
  }

  TEST_CASE("oracle analysis compares to itself with zero divergence") {
    CommandOptions opt = small_options("oracle");
    opt.model_path = "oracle";
    cmd_analyze(opt);
    const KineticsReport r = load_report(opt.out_dir);
    CHECK(r.kl_stationary == 0.0);
    for (double v : r.kl_transition) CHECK(v == 0.0);
    CHECK(r.slowest_timescale == doctest::Approx(44.296).epsilon(1e-4));
    CHECK(testing::slurp(opt.out_dir / "pi.csv").rfind("# dgmsm ", 0) == 0);
  }

  TEST_CASE("train and analyze the resample and baseline families") {
    CommandOptions sim = small_options("data");
    cmd_simulate(sim);
    for (const char* family : {"resample", "baseline"}) {
      CAPTURE(family);
      CommandOptions train = small_options(std::string("train_") + family);
      train.config.model.family = std::string(family) == "resample" ? ModelFamily::resample : ModelFamily::baseline;
      train.train_files = {sim.out_dir / "train.bin"};
      train.validation_files = {sim.out_dir / "validation.bin"};
      cmd_train(train);

      CommandOptions an = train;
      an.model_path = std::string(family) == "resample" ? train.out_dir / "model.json" : train.out_dir / "centers.csv";
      an.out_dir = testing::scratch(std::string("an1_") + family);
      cmd_analyze(an);
      CommandOptions an2 = an;
      an2.out_dir = testing::scratch(std::string("an2_") + family);
      cmd_analyze(an2);
      for (const char* f : {"report.json", "pi.csv", "timescales.csv", "ck.csv", "kl.csv", "histogram.csv"}) {
        CHECK(testing::slurp(an.out_dir / f) == testing::slurp(an2.out_dir / f));
      }
      const KineticsReport r = load_report(an.out_dir);
      CHECK(r.states == 4);
      CHECK(r.timescales.size() == 6);
      CHECK(r.kl_transition.size() == 4);
      CHECK(r.has_oracle);
    }
    const fs::path tmp = fs::temp_directory_path();
    CHECK(fs::exists(tmp / "dgmsm_test_train_baseline" / "K.csv"));
    CHECK(fs::exists(tmp / "dgmsm_test_train_resample" / "training_log.csv"));
  }

  TEST_CASE("resample model analyzed against other data is refused") {
    CommandOptions train = small_options("fp_train");
    cmd_train(train);
    CommandOptions an = train;
    an.replicate = 1;
    an.model_path = train.out_dir / "model.json";
    an.out_dir = testing::scratch("fp_an");
    CHECK_THROWS_WITH_AS(cmd_analyze(an), doctest::Contains("different data"), DataError);
  }

  TEST_CASE("gen-ml-ed needs a chi model") {
    CommandOptions opt = small_options("genml");
    opt.config.model.family = ModelFamily::gen_ml_ed;
    CHECK_THROWS_AS(cmd_train(opt), ConfigError);
  }

  TEST_CASE("holdout over the whole domain is an error") {
    CommandOptions opt = small_options("holdout_full");
    opt.region = Interval{-1.0, 1.0};
    CHECK_THROWS_AS(cmd_holdout(opt), DomainError);
  }

  TEST_CASE("compare") {
    const KineticsReport a = dummy_report("a", 8.0);
    const auto self = compare_reports({a, a});
    REQUIRE(self.size() == 1);
    CHECK(self[0].replicates == 2);
    CHECK(self[0].delta_kl_stationary == 0.0);
    CHECK(self[0].timescale_relative_error.mean == doctest::Approx(0.2));

    const auto two = compare_reports({a, dummy_report("b", 9.0)});
    REQUIRE(two.size() == 2);
    CHECK(two[1].delta_timescale_relative_error == doctest::Approx(-0.1));

    KineticsReport c = dummy_report("c", 9.0);
    c.binning.bins = 5;
    CHECK_THROWS_AS(compare_reports({a, c}), DataError);
    CHECK_THROWS_AS(compare_reports({a}), DataError);
  }

  TEST_CASE("report json round trip") {
    const KineticsReport a = dummy_report("a", 8.0);
    const KineticsReport b = report_from_json(to_json(a));
    CHECK(to_json(b) == to_json(a));
    CHECK_THROWS_AS(report_from_json(nlohmann::json{{"model_tag", "x"}}), DataError);
  }
}
