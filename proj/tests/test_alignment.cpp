#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "dslga/alignment.hpp"
#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"
#include "dslga/rng.hpp"
#include "dslga/synth.hpp"
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

void check_partial_bijection(const Assignment& a, int p, int q) {
  std::set<int> rows, cols;
  for (const auto& [r, c] : a.pairs) {
    CHECK(rows.insert(r).second);
    CHECK(cols.insert(c).second);
    CHECK(r >= 0);
    CHECK(r < p);
    CHECK(c >= 0);
    CHECK(c < q);
  }
  CHECK(static_cast<int>(a.pairs.size()) == std::min(p, q));
  CHECK(static_cast<int>(a.unmatched_visible.size()) == p - std::min(p, q));
  CHECK(static_cast<int>(a.unmatched_infrared.size()) == q - std::min(p, q));
}

}  // namespace

TEST_CASE("hungarian identity cost picks the diagonal") {
  Eigen::MatrixXd cost = Eigen::MatrixXd::Ones(3, 3);
  cost.diagonal().setZero();
  const Assignment a = hungarian(cost);
  CHECK(a.total_cost == 0.0);
  REQUIRE(a.pairs.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.pairs[static_cast<std::size_t>(i)].first == i);
    CHECK(a.pairs[static_cast<std::size_t>(i)].second == i);
  }
}

TEST_CASE("hungarian unique optimum 2x2") {
  Eigen::MatrixXd cost(2, 2);
  cost << 1, 2, 2, 1;
  const Assignment a = hungarian(cost);
  CHECK(a.total_cost == 2.0);
  CHECK(a.pairs[0] == std::pair<int, int>(0, 0));
  CHECK(a.pairs[1] == std::pair<int, int>(1, 1));
}

TEST_CASE("hungarian rejects non-finite entries") {
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(2, 2);
  cost(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(hungarian(cost), CostMatrixError);
  cost(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(hungarian(cost), CostMatrixError);
}

TEST_CASE("hungarian equals brute force on 200 random rectangles") {
  SplitRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 1 + static_cast<int>(rng.next_u64() % 7);
    const int q = 1 + static_cast<int>(rng.next_u64() % 7);
    Eigen::MatrixXd cost(p, q);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < q; ++j) {
        // occasional negatives and ties
        cost(i, j) = std::floor(20.0 * rng.next_double()) - 4.0;
      }
    }
    const Assignment a = hungarian(cost);
    const double expect = oracles::brute_force_assignment_cost(cost);
    CAPTURE(trial);
    REQUIRE(a.total_cost == doctest::Approx(expect).epsilon(1e-12));
    check_partial_bijection(a, p, q);
  }
}

TEST_CASE("hungarian handles empty matrices") {
  const Assignment a = hungarian(Eigen::MatrixXd(0, 3));
  CHECK(a.pairs.empty());
  CHECK(a.total_cost == 0.0);
  CHECK(a.unmatched_infrared.size() == 3);
}

TEST_CASE("inter_modality_match of identical memories is the identity") {
  SplitRng rng(22);
  CenterMemory mem{random_unit_rows(rng, 5, 6), 0.5};
  const Assignment a = inter_modality_match(mem, mem);
  CHECK(a.total_cost == doctest::Approx(0.0).epsilon(1e-9));
  for (int i = 0; i < 5; ++i) {
    CHECK(a.pairs[static_cast<std::size_t>(i)].first == i);
    CHECK(a.pairs[static_cast<std::size_t>(i)].second == i);
  }
}

TEST_CASE("inter_modality_match rectangular sizes") {
  SplitRng rng(23);
  CenterMemory mem_v{random_unit_rows(rng, 5, 6), 0.5};
  CenterMemory mem_i{random_unit_rows(rng, 3, 6), 0.5};
  const Assignment a = inter_modality_match(mem_v, mem_i);
  CHECK(a.pairs.size() == 3);
  CHECK(a.unmatched_visible.size() == 2);
  CHECK(a.unmatched_infrared.empty());
  CHECK_THROWS_AS(inter_modality_match(CenterMemory{}, mem_i), EmptyMemoryError);
}

TEST_CASE("inter_modality_match recovers planted pairs under offset noise") {
  SplitRng rng(24);
  int correct_runs = 0;
  const int runs = 100;
  for (int run = 0; run < runs; ++run) {
    SplitRng inner = rng.split(std::to_string(run));
    const Eigen::MatrixXd protos = random_unit_rows(inner, 8, 16);
    Eigen::MatrixXd shifted = protos;
    for (int i = 0; i < shifted.rows(); ++i) {
      for (int j = 0; j < shifted.cols(); ++j) {
        shifted(i, j) += 0.05 * inner.next_gaussian();
      }
    }
    CenterMemory mem_v{protos, 0.5};
    CenterMemory mem_i{l2_normalize(shifted), 0.5};
    const Assignment a = inter_modality_match(mem_v, mem_i);
    bool all_match = true;
    for (const auto& [r, c] : a.pairs) all_match = all_match && (r == c);
    correct_runs += all_match ? 1 : 0;
  }
  CHECK(correct_runs >= 95);
}

TEST_CASE("k_reciprocal_jaccard of identical twins is zero at k=1") {
  Eigen::MatrixXd centers(3, 4);
  centers << 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0;  // rows 0,1 identical
  const Eigen::VectorXd d = k_reciprocal_jaccard(0, centers, 1);
  CHECK(d(0) == 0.0);
  CHECK(d(1) == 0.0);
  CHECK(d(2) == 1.0);  // disjoint reciprocal sets
}

TEST_CASE("k_reciprocal_jaccard validates k") {
  Eigen::MatrixXd centers = Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(k_reciprocal_jaccard(0, centers, 0), ParameterError);
  CHECK_THROWS_AS(k_reciprocal_jaccard(0, centers, 5), ParameterError);
}

TEST_CASE("k_reciprocal_jaccard equals the set-algebra oracle") {
  SplitRng rng(25);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::MatrixXd centers = random_unit_rows(rng, 20, 8);
    const int k = 1 + static_cast<int>(rng.next_u64() % 10);
    const int query = static_cast<int>(rng.next_u64() % 20);
    const Eigen::VectorXd ours = k_reciprocal_jaccard(query, centers, k);
    const Eigen::VectorXd ref = oracles::set_algebra_jaccard(query, centers, k);
    CAPTURE(trial);
    REQUIRE((ours - ref).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("supplementary_assign absorbs an identical center at zero cost") {
  SplitRng rng(26);
  CenterMemory matched{random_unit_rows(rng, 4, 6), 0.5};
  CenterMemory unmatched{matched.centers.row(2), 0.5};
  const std::vector<int> labels{10, 11, 12, 13};
  const std::vector<int> out =
      supplementary_assign(unmatched, matched, labels, 0.2, 20, 0.3);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 12);
}

TEST_CASE("supplementary_assign rejects an orthogonal outlier") {
  // matched centers live in the first three axes; the query sits on axis 5
  Eigen::MatrixXd centers(3, 6);
  centers << 1, 0, 0, 0, 0, 0,
             0, 1, 0, 0, 0, 0,
             0, 0, 1, 0, 0, 0;
  CenterMemory matched{centers, 0.5};
  Eigen::MatrixXd lone(1, 6);
  lone << 0, 0, 0, 0, 0, 1;
  CenterMemory unmatched{lone, 0.5};
  const std::vector<int> labels{0, 1, 2};
  // beta*(1-0) + (1-beta)*1 = 1 >= rho for any rho <= 1
  const std::vector<int> out =
      supplementary_assign(unmatched, matched, labels, 0.2, 2, 0.3);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == -1);
}

TEST_CASE("supplementary_assign never emits a cost >= rho label") {
  SplitRng rng(27);
  const double beta = 0.2, rho = 0.3;
  for (int trial = 0; trial < 30; ++trial) {
    const int n_matched = 2 + static_cast<int>(rng.next_u64() % 8);
    const int n_um = 1 + static_cast<int>(rng.next_u64() % 5);
    CenterMemory matched{random_unit_rows(rng, n_matched, 8), 0.5};
    CenterMemory unmatched{random_unit_rows(rng, n_um, 8), 0.5};
    std::vector<int> labels;
    for (int m = 0; m < n_matched; ++m) labels.push_back(100 + m);
    const std::vector<int> out =
        supplementary_assign(unmatched, matched, labels, beta, 5, rho);
    for (int u = 0; u < n_um; ++u) {
      const int l = out[static_cast<std::size_t>(u)];
      if (l == -1) continue;
      CHECK(std::count(labels.begin(), labels.end(), l) == 1);
      // recompute the winning cost and check the threshold held
      Eigen::MatrixXd pool(n_matched + 1, 8);
      pool.topRows(n_matched) = matched.centers;
      pool.row(n_matched) = unmatched.centers.row(u);
      const Eigen::VectorXd dj = k_reciprocal_jaccard(
          n_matched, pool, std::min(5, n_matched));
      double best = std::numeric_limits<double>::infinity();
      for (int m = 0; m < n_matched; ++m) {
        const double cos_um = matched.centers.row(m).dot(unmatched.centers.row(u));
        best = std::min(best, beta * (1.0 - cos_um) + (1.0 - beta) * dj(m));
      }
      CHECK(best < rho);
    }
  }
}

TEST_CASE("supplementary_assign parameter validation") {
  SplitRng rng(28);
  CenterMemory matched{random_unit_rows(rng, 3, 4), 0.5};
  CenterMemory unmatched{random_unit_rows(rng, 1, 4), 0.5};
  const std::vector<int> labels{0, 1, 2};
  CHECK_THROWS_AS(supplementary_assign(unmatched, CenterMemory{}, {}, 0.2, 3, 0.3),
                  EmptyMemoryError);
  CHECK_THROWS_AS(supplementary_assign(unmatched, matched, labels, -0.1, 3, 0.3),
                  ParameterError);
  CHECK_THROWS_AS(supplementary_assign(unmatched, matched, labels, 0.2, 3, 0.0),
                  ParameterError);
}

namespace {

SgmParams synth_params() {
  SgmParams p;
  p.eps1_v = p.eps1_i = 0.25;
  p.eps2_v = p.eps2_i = 0.2;
  p.min_pts = 4;
  return p;
}

EmbeddingSet modality_slice(const EmbeddingSet& set, Modality m) {
  return select_rows(set, rows_with_modality(set, m));
}

}  // namespace

TEST_CASE("sgm_pipeline recovers ground truth on low-noise synthetic data") {
  SynthConfig cfg;
  cfg.n_identities = 20;
  cfg.samples_per_modality = 8;
  cfg.dim = 16;
  cfg.noise_std = 0.02;
  cfg.modality_offset_scale = 0.2;
  cfg.seed = 9001;
  const SynthData data = generate_synthetic(cfg);
  const EmbeddingSet tv = modality_slice(data.target, Modality::visible);
  const EmbeddingSet ti = modality_slice(data.target, Modality::infrared);
  const SgmResult res = sgm_pipeline(tv, ti, synth_params());

  CHECK(res.joint_identity_count == 20);

  // joint labels must be consistent with ground truth across modalities
  const std::vector<int> truth_v =
      [&] {
        std::vector<int> t;
        for (int r : rows_with_modality(data.target, Modality::visible)) {
          t.push_back(data.target_truth[static_cast<std::size_t>(r)]);
        }
        return t;
      }();
  const std::vector<int> truth_i =
      [&] {
        std::vector<int> t;
        for (int r : rows_with_modality(data.target, Modality::infrared)) {
          t.push_back(data.target_truth[static_cast<std::size_t>(r)]);
        }
        return t;
      }();

  // same joint label <=> same true identity, across the modality split
  std::map<int, int> joint_to_truth;
  int mismatches = 0;
  for (std::size_t i = 0; i < res.labels_v.size(); ++i) {
    if (res.labels_v[i] == -1) continue;
    auto [it, fresh] = joint_to_truth.try_emplace(res.labels_v[i], truth_v[i]);
    if (!fresh && it->second != truth_v[i]) ++mismatches;
  }
  for (std::size_t i = 0; i < res.labels_i.size(); ++i) {
    if (res.labels_i[i] == -1) continue;
    auto [it, fresh] = joint_to_truth.try_emplace(res.labels_i[i], truth_i[i]);
    if (!fresh && it->second != truth_i[i]) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("sgm_pipeline throws when a modality is all noise") {
  SplitRng rng(29);
  EmbeddingSet tv, ti;
  tv.data = random_unit_rows(rng, 30, 8);
  tv.domain.assign(30, Domain::target);
  tv.modality.assign(30, Modality::visible);
  tv.label.assign(30, -1);
  // far-flung singletons cannot reach min_pts density
  ti.data = random_unit_rows(rng, 5, 8);
  ti.domain.assign(5, Domain::target);
  ti.modality.assign(5, Modality::infrared);
  ti.label.assign(5, -1);
  SgmParams p = synth_params();
  p.min_pts = 6;
  CHECK_THROWS_AS(sgm_pipeline(tv, ti, p), DegenerateStageError);
}

TEST_CASE("sgm_pipeline caps joint identities by the smaller modality") {
  // visible carries identities 0..9, infrared 0..19
  SynthConfig cfg;
  cfg.n_identities = 20;
  cfg.samples_per_modality = 6;
  cfg.dim = 16;
  cfg.noise_std = 0.02;
  cfg.modality_offset_scale = 0.2;
  cfg.seed = 777;
  const SynthData data = generate_synthetic(cfg);
  EmbeddingSet tv = modality_slice(data.target, Modality::visible);
  const EmbeddingSet ti = modality_slice(data.target, Modality::infrared);
  std::vector<int> tv_truth;
  for (int r : rows_with_modality(data.target, Modality::visible)) {
    tv_truth.push_back(data.target_truth[static_cast<std::size_t>(r)]);
  }
  std::vector<int> keep;
  for (int i = 0; i < tv.n(); ++i) {
    if (tv_truth[static_cast<std::size_t>(i)] < 10) keep.push_back(i);
  }
  tv = select_rows(tv, keep);

  const SgmResult res = sgm_pipeline(tv, ti, synth_params());
  CHECK(res.joint_identity_count <= 10);
  CHECK(static_cast<std::size_t>(res.joint_identity_count) == res.kept_pairs.size());
}

TEST_CASE("sgm joint labels trace back to paired or absorbed clusters") {
  SynthConfig cfg;
  cfg.n_identities = 15;
  cfg.samples_per_modality = 6;
  cfg.dim = 16;
  cfg.noise_std = 0.04;
  cfg.modality_offset_scale = 0.25;
  cfg.seed = 4321;
  const SynthData data = generate_synthetic(cfg);
  const EmbeddingSet tv = modality_slice(data.target, Modality::visible);
  const EmbeddingSet ti = modality_slice(data.target, Modality::infrared);
  const SgmResult res = sgm_pipeline(tv, ti, synth_params());

  // every sample label must equal its cluster's joint id
  for (std::size_t i = 0; i < res.labels_v.size(); ++i) {
    const int c = res.crmr_v.labels[i];
    const int expect = c == -1 ? -1 : res.cluster_joint_v[static_cast<std::size_t>(c)];
    CHECK(res.labels_v[i] == expect);
  }
  for (std::size_t i = 0; i < res.labels_i.size(); ++i) {
    const int c = res.crmr_i.labels[i];
    const int expect = c == -1 ? -1 : res.cluster_joint_i[static_cast<std::size_t>(c)];
    CHECK(res.labels_i[i] == expect);
  }

  // each joint id owns exactly one paired cluster per side; any extra
  // cluster carrying the id was absorbed by the supplementary step
  std::vector<int> paired_v(static_cast<std::size_t>(res.joint_identity_count), 0);
  std::vector<int> paired_i(static_cast<std::size_t>(res.joint_identity_count), 0);
  for (const auto& [vc, ic] : res.kept_pairs) {
    CHECK(res.cluster_joint_v[static_cast<std::size_t>(vc)] != -1);
    CHECK(res.cluster_joint_i[static_cast<std::size_t>(ic)] != -1);
    ++paired_v[static_cast<std::size_t>(res.cluster_joint_v[static_cast<std::size_t>(vc)])];
    ++paired_i[static_cast<std::size_t>(res.cluster_joint_i[static_cast<std::size_t>(ic)])];
  }
  for (int j = 0; j < res.joint_identity_count; ++j) {
    CHECK(paired_v[static_cast<std::size_t>(j)] == 1);
    CHECK(paired_i[static_cast<std::size_t>(j)] == 1);
  }
  int extra_v = 0, extra_i = 0;
  for (int c = 0; c < static_cast<int>(res.cluster_joint_v.size()); ++c) {
    if (res.cluster_joint_v[static_cast<std::size_t>(c)] == -1) continue;
    bool is_paired = false;
    for (const auto& [vc, ic] : res.kept_pairs) is_paired = is_paired || vc == c;
    extra_v += is_paired ? 0 : 1;
  }
  for (int c = 0; c < static_cast<int>(res.cluster_joint_i.size()); ++c) {
    if (res.cluster_joint_i[static_cast<std::size_t>(c)] == -1) continue;
    bool is_paired = false;
    for (const auto& [vc, ic] : res.kept_pairs) is_paired = is_paired || ic == c;
    extra_i += is_paired ? 0 : 1;
  }
  CHECK(extra_v == res.supplementary_v);
  CHECK(extra_i == res.supplementary_i);
}

TEST_CASE("sgm joint labels are scale invariant") {
  SynthConfig cfg;
  cfg.n_identities = 8;
  cfg.samples_per_modality = 6;
  cfg.dim = 12;
  cfg.noise_std = 0.03;
  cfg.seed = 555;
  const SynthData data = generate_synthetic(cfg);
  EmbeddingSet tv = modality_slice(data.target, Modality::visible);
  EmbeddingSet ti = modality_slice(data.target, Modality::infrared);
  const SgmResult base = sgm_pipeline(tv, ti, synth_params());
  tv.data *= 12.75;
  ti.data *= 0.003;
  const SgmResult scaled = sgm_pipeline(tv, ti, synth_params());
  CHECK(base.labels_v == scaled.labels_v);
  CHECK(base.labels_i == scaled.labels_i);
  CHECK(base.kept_pairs == scaled.kept_pairs);
}
