#include <cmath>

#include "doctest.h"
#include "dgmsm/analysis.hpp"
#include "dgmsm/errors.hpp"

using namespace dgmsm;

namespace {

TransitionMatrix two_state() {
  TransitionMatrix K;
  K.K.resize(2, 2);
  K.K << 0.9, 0.1, 0.2, 0.8;
  return K;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("stationary vector of a two-state chain") {
    const Eigen::VectorXd pi = stationary_vector(two_state());
    CHECK(pi(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(pi(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  }

  TEST_CASE("implied timescale of a two-state chain") {
    // lambda_2 = 0.7
    const auto ts = implied_timescales(two_state());
    REQUIRE(ts.size() == 1);
    CHECK(ts[0] == doctest::Approx(-1.0 / std::log(0.7)).epsilon(1e-12));
    CHECK(ts[0] == doctest::Approx(2.8037).epsilon(1e-4));
    TransitionMatrix K = two_state();
    K.lag = 5;
    CHECK(implied_timescales(K)[0] == doctest::Approx(5 * ts[0]));
  }

  TEST_CASE("reducible chains are rejected") {
    TransitionMatrix K;
    K.K = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(stationary_vector(K), DegeneracyError);
  }

  TEST_CASE("validate") {
    TransitionMatrix K = two_state();
    CHECK_NOTHROW(K.validate());
    K.K(0, 0) = 0.95;
    CHECK_THROWS_AS(K.validate(), NumericError);
  }

  TEST_CASE("ck test of an exact semigroup is zero") {
    const TransitionMatrix K = two_state();
    const int ns[] = {1, 2, 3, 5};
    const auto rows = ck_test(K, ns, [&](int n) {
      TransitionMatrix Kn = K;
      Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
      for (int i = 0; i < n; ++i) P *= K.K;
      Kn.K = P;
      Kn.lag = n;
      return Kn;
    });
    for (const auto& r : rows) CHECK(r.max_abs_deviation < 1e-14);
  }

  TEST_CASE("kl divergence") {
    Eigen::VectorXd p(2), q(2);
    p << 1, 0;
    q << 0.5, 0.5;
    CHECK(kl_divergence(p, q) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(kl_divergence(q, q) == doctest::Approx(0.0));
  }

  TEST_CASE("kl with an empty reference bin throws") {
    Eigen::VectorXd p(2), z(2);
    p << 1, 0;
    z << 0, 1;
    CHECK_THROWS_AS(kl_divergence(p, z, 0.0), NumericError);
  }

  TEST_CASE("histogram clamps into the edge bins and normalizes") {
    Binning b{-1, 1, 4};
    Eigen::VectorXd v(4);
    v << -5, -0.9, 0.1, 9;
    const Eigen::VectorXd h = histogram(v, b);
    CHECK(h.sum() == doctest::Approx(1.0));
    CHECK(h(0) == doctest::Approx(0.5));
    CHECK(h(2) == doctest::Approx(0.25));
    CHECK(h(3) == doctest::Approx(0.25));
    CHECK(b.bin_of(1.0) == 3);
    CHECK(b.bin_of(-1.0) == 0);
  }

  TEST_CASE("rebin conserves mass") {
    Binning fine{-1, 1, 7};
    Eigen::VectorXd mass = Eigen::VectorXd::LinSpaced(7, 1, 7);
    mass /= mass.sum();
    const Eigen::VectorXd out = rebin(fine.edges(), mass, Binning{-1, 1, 3});
    CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-14));
    const Eigen::VectorXd same = rebin(fine.edges(), mass, fine);
    CHECK((same - mass).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("replicate statistics") {
    const double v[] = {1.0, 2.0, 3.0};
    const auto s = replicate_stats(v);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.stddev == doctest::Approx(1.0));
    const double one[] = {4.0};
    CHECK(replicate_stats(one).stddev == 0.0);
  }
}
