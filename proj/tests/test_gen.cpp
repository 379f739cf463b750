#include <cmath>

#include "doctest.h"
#include "dgmsm/errors.hpp"
#include "dgmsm/gen_msm.hpp"
#include "dgmsm/potential.hpp"
#include "gradcheck.hpp"

using namespace dgmsm;

TEST_SUITE("generator") {
  TEST_CASE("pathwise generator gradient at fixed draws") {
    CHECK(testing::generator_gradient_error(false, 21) < 1e-4);
    CHECK(testing::generator_gradient_error(true, 21) < 1e-4);
  }

  TEST_CASE("score-function chi gradient matches the derivative of the expectation on a two-state toy") {
    CHECK(testing::chi_score_function_error(100000, 31) < 0.05);
  }

  TEST_CASE("generative transition matrices are row-stochastic") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      GeneratorModel model = testing::toy_generator(4, 1, true, seed);
      Rng rng(seed);
      const TransitionMatrix K = estimate_K_generative(model, 500, rng);
      CHECK_NOTHROW(K.validate(1e-9));
    }
  }

  TEST_CASE("mismatched networks are rejected") {
    GeneratorModel model = testing::toy_generator(3, 1, false, 4);
    model.noise_dim = 2;
    CHECK_THROWS_AS(model.validate(), ConfigError);
  }

  TEST_CASE("ml-ed needs a chi network") {
    const auto trajs = std::vector<Trajectory>{simulate(PotentialSpec::prinz(), 0.0, 2000, 0.01, 1)};
    const PairDataset p = make_pairs(trajs, 5);
    const GeneratorModel model = testing::toy_generator(4, 1, true, 5);
    CHECK_THROWS_AS(train_ed(p, p, model.gen.spec(), model.chi.spec(), GenHyper{}, GenMode::ml_ed), ConfigError);
  }

  TEST_CASE("short training run, trajectory generation and json") {
    const auto train = make_pairs(std::vector<Trajectory>{simulate(PotentialSpec::prinz(), 0.0, 20000, 0.01, 2)}, 5);
    const auto val =
        make_pairs(std::vector<Trajectory>{simulate(PotentialSpec::prinz(), 0.0, 5000, 0.01, 3)}, 5, Split::validation);
    const GeneratorModel shape = testing::toy_generator(4, 1, true, 6);
    GenHyper h;
    h.max_epochs = 2;
    h.learning_rate_gen = 1e-3;
    const GenTraining fit = train_ed(train, val, shape.gen.spec(), shape.chi.spec(), h, GenMode::joint_ed);
    CHECK(fit.log.epochs.size() >= 2);
    Rng rng(7);
    const Trajectory t = generate_trajectory(fit.model, train.x.row(0), 200, rng);
    CHECK(t.size() == 201);
    CHECK(t.frames.allFinite());
    const GeneratorModel back = generator_model_from_json(to_json(fit.model));
    CHECK(back.gen.params().values == fit.model.gen.params().values);
    CHECK(back.mode == GenMode::joint_ed);
  }
}
