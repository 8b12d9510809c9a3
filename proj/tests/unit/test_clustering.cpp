#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "featprop/clustering.hpp"
#include "featprop/random.hpp"
#include "oracles.hpp"

using namespace featprop;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Matrix random_points(NodeId n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (NodeId i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) m(i, k) = rng.normal();
  return m;
}

// Gaussian blobs so that K-Means has a well-defined answer.
Matrix blobs(int per_blob, int n_blobs, int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(per_blob * n_blobs, d);
  for (int b = 0; b < n_blobs; ++b)
    for (int i = 0; i < per_blob; ++i)
      for (int k = 0; k < d; ++k) m(b * per_blob + i, k) = (k == b % d ? 10.0 * (b + 1) : 0) + rng.normal();
  return m;
}

bool all_distinct(const NodeSet& s) {
  return std::set<NodeId>(s.begin(), s.end()).size() == s.size();
}

}  // namespace

TEST_CASE("kmeans on two obvious clusters") {
  const Matrix m = column({0.0, 0.1, 9.9, 10.0});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ClusterResult r = kmeans(m, 2, seed);
    std::vector<double> c{r.centroids(0, 0), r.centroids(1, 0)};
    std::sort(c.begin(), c.end());
    CHECK(c[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(9.95).epsilon(1e-12));
    CHECK(r.objective == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(r.assignment[0] == r.assignment[1]);
    CHECK(r.assignment[2] == r.assignment[3]);
    CHECK(r.assignment[0] != r.assignment[2]);
  }
}

TEST_CASE("kmeans with b equal to the distinct count has zero objective") {
  const Matrix m = column({3, 1, 3, 2, 1});
  const ClusterResult r = kmeans(m, 3, 4);
  CHECK(r.objective == 0.0);
  CHECK_THROWS_AS(kmeans(m, 4, 4), InfeasibleError);
  CHECK_THROWS_AS(kmeans(m, 0, 4), InfeasibleError);
}

TEST_CASE("kmeans is deterministic and its inertia never increases") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix m = random_points(120, 5, seed);
    const ClusterResult a = kmeans(m, 7, seed);
    const ClusterResult b = kmeans(m, 7, seed);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignment == b.assignment);
    CHECK(!a.inertia_trace.empty());
    for (std::size_t t = 1; t < a.inertia_trace.size(); ++t)
      CHECK(a.inertia_trace[t] <= a.inertia_trace[t - 1] * (1 + 1e-12));
    // Every point sits in its nearest centroid's cluster at convergence.
    for (NodeId i = 0; i < m.rows(); ++i) {
      const double own = (m.row(i) - a.centroids.row(a.assignment[i])).norm();
      for (Eigen::Index c = 0; c < a.centroids.rows(); ++c)
        CHECK(own <= (m.row(i) - a.centroids.row(c)).norm() + 1e-9);
    }
  }
}

TEST_CASE("kmeans keeps the best of its restarts") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix m = random_points(60, 3, seed);
    KMeansOptions single;
    single.n_init = 1;
    const ClusterResult best = kmeans(m, 6, seed);
    const ClusterResult first = kmeans(m, 6, seed, single);
    CHECK(best.inertia_trace.back() <= first.inertia_trace.back());
    CHECK(best.inertia_trace.back() <= kmeans(m, 6, derive_seed(seed, 3), single).inertia_trace.back());
  }
  KMeansOptions none;
  none.n_init = 0;
  CHECK_THROWS_AS(kmeans(random_points(5, 2, 0), 2, 0, none), InfeasibleError);
}

TEST_CASE("kmeans sparse wide input matches the dense rule") {
  // Mostly-zero rows wide enough for the sparse product path.
  Rng rng(4);
  Matrix m = Matrix::Zero(90, 100);
  for (Eigen::Index i = 0; i < 90; ++i)
    for (int w = 0; w < 8; ++w) m(i, (i % 3) * 30 + static_cast<Eigen::Index>(rng.below(30))) = 1.0;
  const ClusterResult r = kmeans(m, 3, 2);
  for (NodeId i = 0; i < m.rows(); ++i) {
    const double own = (m.row(i) - r.centroids.row(r.assignment[i])).squaredNorm();
    for (Eigen::Index c = 0; c < 3; ++c)
      CHECK(own <= (m.row(i) - r.centroids.row(c)).squaredNorm() + 1e-9);
  }
}

TEST_CASE("kmeans wide input uses the same assignments as the direct rule") {
  // Wide enough to take the matrix-product path.
  const Matrix m = blobs(20, 4, 80, 3);
  const ClusterResult r = kmeans(m, 4, 1);
  for (int b = 0; b < 4; ++b)
    for (int i = 1; i < 20; ++i) CHECK(r.assignment[b * 20 + i] == r.assignment[b * 20]);
  for (NodeId i = 0; i < m.rows(); ++i) {
    const double own = (m.row(i) - r.centroids.row(r.assignment[i])).squaredNorm();
    for (Eigen::Index c = 0; c < 4; ++c)
      CHECK(own <= (m.row(i) - r.centroids.row(c)).squaredNorm() + 1e-9);
  }
}

TEST_CASE("kmedoids examples") {
  SUBCASE("four points in the plane") {
    Matrix m(4, 2);
    m << 0, 0, 0, 1, 10, 10, 10, 11;
    const ClusterResult r = kmedoids_approx(m, 2, 0);
    CHECK(r.centers.size() == 2);
    CHECK(r.objective == doctest::Approx(0.5).epsilon(1e-12));
    const std::set<NodeId> c(r.centers.begin(), r.centers.end());
    CHECK((c.count(0) + c.count(1)) == 1);
    CHECK((c.count(2) + c.count(3)) == 1);
  }
  SUBCASE("single medoid of a line") {
    const ClusterResult r = kmedoids_approx(column({0, 1, 2}), 1, 5);
    CHECK(r.centers == NodeSet{1});
    CHECK(r.objective == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("all rows equal still yields b distinct nodes") {
    const Matrix m = Matrix::Constant(6, 3, 1.5);
    const ClusterResult r = kmedoids_approx(m, 4, 2);
    CHECK(r.centers.size() == 4);
    CHECK(all_distinct(r.centers));
    CHECK(r.objective == 0.0);
  }
  SUBCASE("excluded nodes are never picked") {
    const Matrix m = random_points(30, 3, 9);
    const NodeSet excluded{0, 1, 2, 3, 4};
    const ClusterResult r = kmedoids_approx(m, 6, 1, excluded);
    CHECK(r.centers.size() == 6);
    CHECK(all_distinct(r.centers));
    for (NodeId c : r.centers) CHECK(std::find(excluded.begin(), excluded.end(), c) == excluded.end());
  }
  SUBCASE("medoids are distinct and deterministic") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix m = random_points(50, 4, seed);
      const ClusterResult a = kmedoids_approx(m, 9, seed);
      CHECK(all_distinct(a.centers));
      CHECK(a.centers == kmedoids_approx(m, 9, seed).centers);
      CHECK(a.objective == doctest::Approx(oracle::mean_min(oracle::to_points(m), a.centers)));
    }
  }
}

TEST_CASE("kcenter examples") {
  const Matrix m = column({0, 1, 10});
  const NodeSet init{0};
  SUBCASE("farthest first") {
    const ClusterResult r = kcenter_greedy(m, init, 2, 0);
    CHECK(r.centers == NodeSet{2, 1});
    CHECK(r.objective == 0.0);
    const ClusterResult one = kcenter_greedy(m, init, 1, 0);
    CHECK(one.centers == NodeSet{2});
    CHECK(one.objective == 1.0);
  }
  SUBCASE("nothing to add") {
    const NodeSet all{0, 1, 2};
    const ClusterResult r = kcenter_greedy(m, all, 0, 0);
    CHECK(r.centers.empty());
    CHECK(r.objective == 0.0);
  }
  SUBCASE("ties go to the lowest index") {
    const ClusterResult r = kcenter_greedy(column({-1, 0, 1}), NodeSet{1}, 1, 0);
    CHECK(r.centers == NodeSet{0});
  }
  SUBCASE("empty initial set draws the first center from the seed") {
    const Matrix p = random_points(40, 2, 1);
    const ClusterResult a = kcenter_greedy(p, {}, 5, 3);
    CHECK(a.centers.size() == 5);
    CHECK(all_distinct(a.centers));
    CHECK(a.centers == kcenter_greedy(p, {}, 5, 3).centers);
    CHECK(a.objective == doctest::Approx(oracle::max_min(oracle::to_points(p), a.centers)));
  }
}

TEST_CASE("objectives on a line") {
  const Matrix m = column({0, 1, 2});
  const NodeSet mid{1};
  CHECK(kmedoids_objective(m, mid) == doctest::Approx(2.0 / 3.0));
  const NodeSet ends{0, 2};
  CHECK(kmedoids_objective(m, ends) == doctest::Approx(1.0 / 3.0));
  CHECK(kcenter_objective(m, ends) == 1.0);
  CHECK_THROWS_AS(kmedoids_objective(m, NodeSet{}), InfeasibleError);
}

TEST_CASE("count distinct rows") {
  CHECK(count_distinct_rows(column({1, 2, 1, 3, 2})) == 3);
  CHECK(count_distinct_rows(Matrix::Zero(4, 2)) == 1);
}

TEST_CASE("approximation quality against exhaustive search") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const NodeId n = 6 + static_cast<NodeId>(rng.below(7));  // 6..12
    const Matrix m = random_points(n, 2, seed + 1000);
    const auto pts = oracle::to_points(m);
    for (int b = 1; b <= 3; ++b) {
      const double opt_med = oracle::exact_kmedoids(pts, b);
      const double opt_cen = oracle::exact_kcenter(pts, b);
      const ClusterResult kc = kcenter_greedy(m, {}, b, seed);
      CHECK(kc.objective <= 2.0 * opt_cen + 1e-12);
      CHECK(opt_med <= opt_cen + 1e-12);
      const ClusterResult km = kmedoids_approx(m, b, seed);
      CHECK(km.objective >= opt_med - 1e-12);
      CHECK(km.objective <= 2.0 * opt_med + 1e-12);
    }
  }
}
