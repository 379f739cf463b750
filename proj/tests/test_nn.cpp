#include <cmath>

#include "doctest.h"
#include "dgmsm/errors.hpp"
#include "dgmsm/nn.hpp"
#include "gradcheck.hpp"

using namespace dgmsm;
using namespace dgmsm::nn;

TEST_SUITE("nn") {
  TEST_CASE("backward matches central differences") {
    for (Head head : {Head::softmax, Head::softplus, Head::linear}) {
      for (bool bn : {false, true}) {
        for (Mode mode : {Mode::train, Mode::eval}) {
          NetSpec s;
          s.input_dim = 3;
          s.hidden = {6, 5};
          s.activation = Activation::elu;
          s.batch_norm = bn;
          s.head = head;
          s.output_dim = 4;
          CAPTURE(to_string(head));
          CAPTURE(bn);
          CHECK(testing::backprop_error(s, mode, 11) < 1e-4);
        }
      }
    }
  }

  TEST_CASE("relu networks away from kinks") {
    NetSpec s;
    s.input_dim = 2;
    s.hidden = {8, 8};
    s.head = Head::softplus;
    s.output_dim = 3;
    CHECK(testing::backprop_error(s, Mode::train, 5) < 1e-4);
  }

  TEST_CASE("softmax rows lie on the simplex") {
    Rng rng(1);
    Network net(NetSpec{}, rng);
    const Eigen::MatrixXd out = net.forward(testing::random_matrix(50, 1, rng, 3.0), Mode::train);
    CHECK((out.array() >= 0.0).all());
    CHECK((out.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("nonnegative heads") {
    Rng rng(2);
    NetSpec s;
    s.head = Head::softplus;
    const Eigen::MatrixXd sp = Network(s, rng).forward(testing::random_matrix(50, 1, rng, 3.0), Mode::eval);
    CHECK((sp.array() > 0.0).all());
    s.head = Head::relu;
    const Eigen::MatrixXd re = Network(s, rng).forward(testing::random_matrix(50, 1, rng, 3.0), Mode::eval);
    CHECK((re.array() >= 0.0).all());
  }

  TEST_CASE("first adam step moves every weight by the learning rate") {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd g(3);
    g << 2.0, -0.5, 1e-3;
    AdamState st(3, 0.01);
    adam_step(p, g, st);
    CHECK(p(0) == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(p(1) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(p(2) == doctest::Approx(-0.01).epsilon(1e-3));
  }

  TEST_CASE("non-finite gradients are rejected") {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 1.0, std::nan("");
    AdamState st(2, 0.01);
    CHECK_THROWS_AS(adam_step(p, g, st), OptimizerError);
  }

  TEST_CASE("stale caches are refused") {
    Rng rng(3);
    NetSpec s;
    s.hidden = {4};
    Network net(s, rng);
    ForwardCache cache;
    const Eigen::MatrixXd X = testing::random_matrix(4, 1, rng);
    net.forward(X, Mode::train, &cache);
    net.set_values(net.params().values * 1.01);
    CHECK_THROWS_AS(net.backward(cache, Eigen::MatrixXd::Ones(4, 4)), StaleCacheError);
  }

  TEST_CASE("json round trip keeps outputs bit-identical") {
    Rng rng(4);
    Network net(NetSpec{}, rng);
    ForwardCache cache;
    const Eigen::MatrixXd X = testing::random_matrix(30, 1, rng);
    net.forward(X, Mode::train, &cache);
    net.update_running_stats(cache);
    nlohmann::json j = net;
    const Network back = j.get<Network>();
    CHECK(back.forward(X, Mode::eval) == net.forward(X, Mode::eval));
    CHECK((predict(net, X, 7) - net.forward(X, Mode::eval)).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("invalid specs") {
    NetSpec s;
    s.output_dim = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
}
