#include <doctest.h>

#include <Eigen/Dense>
#include <set>

#include "dslga/clustering.hpp"
#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"
#include "dslga/rng.hpp"
#include "oracles.hpp"

using namespace dslga;

namespace {

Eigen::MatrixXd random_unit_rows(SplitRng& rng, int n, int d) {
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
  }
  return l2_normalize(m);
}

// Points scattered around unit prototypes by small angular noise.
Eigen::MatrixXd bundles(SplitRng& rng, const Eigen::MatrixXd& protos,
                        int per_bundle, double noise) {
  const int k = static_cast<int>(protos.rows());
  Eigen::MatrixXd m(k * per_bundle, protos.cols());
  int row = 0;
  for (int c = 0; c < k; ++c) {
    for (int s = 0; s < per_bundle; ++s, ++row) {
      Eigen::RowVectorXd x = protos.row(c);
      for (int j = 0; j < protos.cols(); ++j) x(j) += noise * rng.next_gaussian();
      m.row(row) = x / x.norm();
    }
  }
  return m;
}

}  // namespace

TEST_CASE("dbscan separates two tight bundles") {
  // prototypes at 90 degrees: angular (cosine) distance 1.0 > 0.8
  Eigen::MatrixXd protos(2, 4);
  protos << 1, 0, 0, 0, 0, 1, 0, 0;
  SplitRng rng(11);
  const Eigen::MatrixXd f = bundles(rng, protos, 8, 0.03);
  const ClusterSet cs = dbscan(f, 0.3, 4);
  CHECK(cs.size() == 2);
  CHECK(cs.noise.empty());
  const auto ref = oracles::reference_dbscan(f, 0.3, 4);
  CHECK(oracles::same_partition(cs.labels(), ref.cluster_of));
}

TEST_CASE("dbscan with huge eps and min_pts 1 is one cluster") {
  SplitRng rng(12);
  const Eigen::MatrixXd f = random_unit_rows(rng, 20, 5);
  const ClusterSet cs = dbscan(f, 2.5, 1);
  CHECK(cs.size() == 1);
  CHECK(cs.clusters[0].size() == 20);
  CHECK(cs.noise.empty());
}

TEST_CASE("isolated point becomes noise at min_pts 2") {
  Eigen::MatrixXd f(5, 3);
  f << 1, 0, 0, 0.99, 0.1, 0, 0.98, 0.15, 0, 0.99, 0.05, 0.05, -1, 0, 0;
  f = l2_normalize(f);
  const ClusterSet cs = dbscan(f, 0.2, 2);
  CHECK(cs.size() == 1);
  REQUIRE(cs.noise.size() == 1);
  CHECK(cs.noise[0] == 4);
}

TEST_CASE("dbscan on an empty set") {
  const ClusterSet cs = dbscan(Eigen::MatrixXd(0, 4), 0.3, 4);
  CHECK(cs.size() == 0);
  CHECK(cs.noise.empty());
  CHECK(cs.n_samples == 0);
}

TEST_CASE("dbscan equals the union-find reference on random instances") {
  SplitRng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 120);
    const int d = 2 + static_cast<int>(rng.next_u64() % 15);
    const int min_pts = 1 + static_cast<int>(rng.next_u64() % 5);
    const double eps = 0.05 + 0.6 * rng.next_double();
    const Eigen::MatrixXd f = random_unit_rows(rng, n, d);
    const ClusterSet cs = dbscan(f, eps, min_pts);
    const auto ref = oracles::reference_dbscan(f, eps, min_pts);
    CAPTURE(trial);
    CAPTURE(n);
    CAPTURE(eps);
    REQUIRE(oracles::same_partition(cs.labels(), ref.cluster_of));
  }
}

TEST_CASE("dbscan core points are permutation invariant") {
  SplitRng rng(20);
  const int n = 40;
  const Eigen::MatrixXd f = random_unit_rows(rng, n, 6);
  const double eps = 0.45;
  const int min_pts = 3;

  auto core_flags = [&](const Eigen::MatrixXd& m) {
    std::vector<bool> core(static_cast<std::size_t>(n), false);
    const Eigen::MatrixXd sim = cosine_similarity_matrix(m, m);
    for (int i = 0; i < n; ++i) {
      int count = 0;
      for (int j = 0; j < n; ++j) count += (1.0 - sim(i, j) <= eps) ? 1 : 0;
      core[static_cast<std::size_t>(i)] = count >= min_pts;
    }
    return core;
  };

  // reverse the row order; the core property must follow each point
  Eigen::MatrixXd reversed = f.colwise().reverse();
  const std::vector<bool> base = core_flags(f);
  const std::vector<bool> rev = core_flags(reversed);
  const ClusterSet cs_base = dbscan(f, eps, min_pts);
  const ClusterSet cs_rev = dbscan(reversed, eps, min_pts);
  std::vector<int> base_labels = cs_base.labels();
  std::vector<int> rev_labels_unshuffled(static_cast<std::size_t>(n));
  const std::vector<int> rev_labels = cs_rev.labels();
  for (int i = 0; i < n; ++i) {
    CHECK(base[static_cast<std::size_t>(i)] == rev[static_cast<std::size_t>(n - 1 - i)]);
    rev_labels_unshuffled[static_cast<std::size_t>(i)] =
        rev_labels[static_cast<std::size_t>(n - 1 - i)];
  }
  // cluster membership is the same partition up to relabeling; border
  // attachment stays deterministic under its own index order, so only
  // core points are compared here
  std::map<int, int> fwd;
  for (int i = 0; i < n; ++i) {
    if (!base[static_cast<std::size_t>(i)]) continue;
    const int a = base_labels[static_cast<std::size_t>(i)];
    const int b = rev_labels_unshuffled[static_cast<std::size_t>(i)];
    auto it = fwd.find(a);
    if (it == fwd.end()) {
      fwd[a] = b;
    } else {
      CHECK(it->second == b);
    }
  }
}

TEST_CASE("dbscan is invariant to positive feature scaling") {
  SplitRng rng(14);
  Eigen::MatrixXd protos(3, 6);
  protos = random_unit_rows(rng, 3, 6);
  const Eigen::MatrixXd f = bundles(rng, protos, 6, 0.05);
  const ClusterSet a = dbscan(f, 0.25, 3);
  const ClusterSet b = dbscan(37.5 * f, 0.25, 3);
  CHECK(oracles::same_partition(a.labels(), b.labels()));
}

TEST_CASE("cluster_centroids midpoint and singleton") {
  Eigen::MatrixXd f(3, 2);
  f << 0, 2, 2, 0, 0, 1;
  ClusterSet cs;
  cs.n_samples = 3;
  cs.clusters = {{0, 1}, {2}};
  const Eigen::MatrixXd c = cluster_centroids(cs, f);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(c(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(c(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(c(1, 0) == doctest::Approx(0.0));
  CHECK(c(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("cluster_centroids equals a loop mean") {
  SplitRng rng(15);
  const Eigen::MatrixXd f = random_unit_rows(rng, 30, 5);
  const ClusterSet cs = dbscan(f, 1.2, 1);
  const Eigen::MatrixXd c = cluster_centroids(cs, f);
  for (int k = 0; k < cs.size(); ++k) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(5);
    for (int i : cs.clusters[static_cast<std::size_t>(k)]) mean += f.row(i);
    mean /= static_cast<double>(cs.clusters[static_cast<std::size_t>(k)].size());
    mean /= mean.norm();
    CHECK((c.row(k) - mean).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("crmr rejects eps1 <= eps2") {
  Eigen::MatrixXd f(2, 2);
  f << 1, 0, 0, 1;
  CHECK_THROWS_AS(crmr_refine(f, 0.3, 0.3, 1), ParameterError);
  CHECK_THROWS_AS(crmr_refine(f, 0.2, 0.3, 1), ParameterError);
}

TEST_CASE("crmr with nearly equal radii keeps the eps1 partition") {
  SplitRng rng(16);
  Eigen::MatrixXd protos(4, 8);
  protos = random_unit_rows(rng, 4, 8);
  const Eigen::MatrixXd f = bundles(rng, protos, 10, 0.02);
  const double eps = 0.3;
  const CrmrResult res = crmr_refine(f, eps, eps - 1e-9, 3);
  const ClusterSet base = dbscan(f, eps, 3);
  REQUIRE(res.refined.size() == base.size());
  for (int k = 0; k < base.size(); ++k) {
    CHECK(res.refined.clusters[static_cast<std::size_t>(k)] ==
          base.clusters[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("crmr refined clusters are intersections of both partitions") {
  SplitRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd protos = random_unit_rows(rng, 10, 12);
    const Eigen::MatrixXd f = bundles(rng, protos, 8, 0.06);
    const CrmrResult res = crmr_refine(f, 0.35, 0.2, 3);

    const ClusterSet coarse = dbscan(f, 0.35, 3);
    const ClusterSet fine = dbscan(f, 0.2, 3);
    const std::vector<int> coarse_of = coarse.labels();
    const std::vector<int> fine_of = fine.labels();

    for (const auto& members : res.refined.clusters) {
      REQUIRE(!members.empty());
      // one eps1 cluster and one eps2 cluster cover each refined cluster
      std::set<int> coarse_ids, fine_ids;
      for (int i : members) {
        coarse_ids.insert(coarse_of[static_cast<std::size_t>(i)]);
        fine_ids.insert(fine_of[static_cast<std::size_t>(i)]);
      }
      CHECK(coarse_ids.size() == 1);
      CHECK(fine_ids.size() == 1);
      CHECK(*coarse_ids.begin() != -1);
      CHECK(*fine_ids.begin() != -1);
    }
  }
}

TEST_CASE("crmr labels agree with refined membership") {
  SplitRng rng(18);
  Eigen::MatrixXd protos = random_unit_rows(rng, 6, 10);
  const Eigen::MatrixXd f = bundles(rng, protos, 7, 0.05);
  const CrmrResult res = crmr_refine(f, 0.35, 0.25, 3);
  std::vector<int> expect(static_cast<std::size_t>(f.rows()), -1);
  for (int k = 0; k < res.refined.size(); ++k) {
    for (int i : res.refined.clusters[static_cast<std::size_t>(k)]) {
      expect[static_cast<std::size_t>(i)] = k;
    }
  }
  CHECK(res.labels == expect);
  // noise + clusters partition all samples
  std::size_t covered = res.refined.noise.size();
  for (const auto& c : res.refined.clusters) covered += c.size();
  CHECK(covered == static_cast<std::size_t>(f.rows()));
}

TEST_CASE("crmr min_cluster_size drops small intersections") {
  Eigen::MatrixXd protos(2, 6);
  SplitRng rng(19);
  protos = random_unit_rows(rng, 2, 6);
  Eigen::MatrixXd f = bundles(rng, protos, 5, 0.02);
  const CrmrResult keep = crmr_refine(f, 0.3, 0.2, 2, 1);
  const CrmrResult drop = crmr_refine(f, 0.3, 0.2, 2, 6);
  CHECK(keep.refined.size() >= drop.refined.size());
  CHECK(drop.refined.size() == 0);
  CHECK(drop.dropped_small == keep.refined.size());
}
