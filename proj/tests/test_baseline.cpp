#include "doctest.h"
#include "dgmsm/baseline.hpp"
#include "dgmsm/errors.hpp"
#include "helpers.hpp"

using namespace dgmsm;

namespace {

Trajectory from_values(std::initializer_list<double> v) {
  Trajectory t;
  t.frames.resize(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) t.frames(i++, 0) = x;
  return t;
}

KMeansModel fixed_centers(std::initializer_list<double> c) {
  KMeansModel m;
  m.centers = from_values(c).frames;
  return m;
}

}  // namespace

TEST_SUITE("baseline") {
  TEST_CASE("k-means separates two blobs") {
    Rng rng(1);
    Frames data(400, 2);
    for (Eigen::Index i = 0; i < 400; ++i) {
      const double cx = i < 200 ? -5.0 : 5.0;
      data(i, 0) = cx + 0.1 * rng.normal();
      data(i, 1) = 0.1 * rng.normal();
    }
    const KMeansModel m = kmeans_fit(data, 2, 3);
    const double lo = std::min(m.centers(0, 0), m.centers(1, 0));
    const double hi = std::max(m.centers(0, 0), m.centers(1, 0));
    CHECK(lo == doctest::Approx(-5.0).epsilon(0.02));
    CHECK(hi == doctest::Approx(5.0).epsilon(0.02));
    for (std::size_t k = 1; k < m.inertia_history.size(); ++k) CHECK(m.inertia_history[k] <= m.inertia_history[k - 1] + 1e-9);
  }

  TEST_CASE("k-means is seeded") {
    Rng rng(2);
    const Frames data = testing::random_matrix(300, 1, rng);
    CHECK(kmeans_fit(data, 4, 9).centers == kmeans_fit(data, 4, 9).centers);
  }

  TEST_CASE("too few distinct frames") {
    Frames data = Eigen::MatrixXd::Ones(10, 1);
    CHECK_THROWS_AS(kmeans_fit(data, 2, 1), DataError);
  }

  TEST_CASE("ties go to the lower index") {
    const KMeansModel m = fixed_centers({0.0, 1.0});
    CHECK(m.assign_one(Eigen::RowVectorXd::Constant(1, 0.5)) == 0);
  }

  TEST_CASE("count matrix by hand") {
    const KMeansModel m = fixed_centers({0.0, 1.0});
    const Trajectory t[] = {from_values({0, 0, 1, 1, 0})};
    const TransitionMatrix K = count_transition_matrix(m, t, 1);
    CHECK((K.K.array() - 0.5).abs().maxCoeff() < 1e-15);
    const Eigen::MatrixXd C = transition_counts(m, t, 2);
    // pairs (0,1) (0,1) (1,0)
    CHECK(C(0, 1) == 2.0);
    CHECK(C(1, 0) == 1.0);
    CHECK(C.sum() == 3.0);
  }

  TEST_CASE("a cluster that is never left is reported") {
    const KMeansModel m = fixed_centers({0.0, 1.0});
    const Trajectory t[] = {from_values({0, 0, 0, 1})};
    CHECK_THROWS_WITH_AS(count_transition_matrix(m, t, 1), doctest::Contains("cluster 1"), EstimationError);
  }

  TEST_CASE("pools, resampling and mixture weights") {
    const KMeansModel m = fixed_centers({0.0, 1.0});
    const Trajectory t[] = {from_values({0.1, -0.1, 0.9, 1.1, 0.05, 0.95})};
    const ClusterPools pools = build_pools(m, t);
    CHECK(pools.members[0].size() == 3);
    CHECK(pools.members[1].size() == 3);
    const TransitionMatrix K = count_transition_matrix(m, t, 1);
    Rng rng(4);
    const Trajectory r = baseline_resample_trajectory(m, K, pools, t[0].frames.row(0), 50, rng);
    for (Eigen::Index k = 1; k < r.size(); ++k) {
      CHECK(((t[0].frames.col(0).array() - r.frames(k, 0)).abs() == 0.0).any());
    }
    Eigen::VectorXd pi(2);
    pi << 0.25, 0.75;
    const Eigen::VectorXd w = baseline_mixture_weights(pools, m, pi);
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(w(0) == doctest::Approx(0.25 / 3));
  }

  TEST_CASE("centers csv round trip") {
    const auto dir = testing::scratch("centers");
    KMeansModel m;
    m.centers.resize(3, 2);
    m.centers << 0.1, 0.2, -1.0 / 3.0, 4, 5e-9, 6;
    save_centers_csv(m, dir / "c.csv", "a comment");
    CHECK(load_centers_csv(dir / "c.csv").centers == m.centers);
    CHECK(testing::slurp(dir / "c.csv").rfind("# a comment\ncluster,x0,x1\n", 0) == 0);
  }
}
