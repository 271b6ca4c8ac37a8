#include "dslga/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"

namespace dslga {

Assignment inter_modality_match(const CenterMemory& mem_v,
                                const CenterMemory& mem_i) {
  if (mem_v.size() == 0 || mem_i.size() == 0) {
    throw EmptyMemoryError("cannot match against an empty center memory");
  }
  const Eigen::MatrixXd cost =
      Eigen::MatrixXd::Ones(mem_v.size(), mem_i.size()) -
      cosine_similarity_matrix(mem_v.centers, mem_i.centers);
  return hungarian(cost);
}

Eigen::VectorXd k_reciprocal_jaccard(int query_idx,
                                     const Eigen::MatrixXd& centers, int k) {
  const int m = static_cast<int>(centers.rows());
  if (k < 1 || k > m) throw ParameterError("k must lie in [1, M]");
  if (query_idx < 0 || query_idx >= m) {
    throw ParameterError("query index out of range");
  }

  const Eigen::MatrixXd sim = cosine_similarity_matrix(centers, centers);

  // N_k per center: k nearest others by (distance, index)
  std::vector<std::vector<bool>> in_nk(
      static_cast<std::size_t>(m), std::vector<bool>(static_cast<std::size_t>(m), false));
  std::vector<int> order(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    order.clear();
    for (int b = 0; b < m; ++b) {
      if (b != a) order.push_back(b);
    }
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      const double dx = 1.0 - sim(a, x);
      const double dy = 1.0 - sim(a, y);
      if (dx != dy) return dx < dy;
      return x < y;
    });
    const int take = std::min<int>(k, static_cast<int>(order.size()));
    for (int t = 0; t < take; ++t) {
      in_nk[static_cast<std::size_t>(a)][static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = true;
    }
  }

  // R(a) = {a} + mutual k-neighbors
  std::vector<std::vector<bool>> recip(
      static_cast<std::size_t>(m), std::vector<bool>(static_cast<std::size_t>(m), false));
  for (int a = 0; a < m; ++a) {
    recip[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = true;
    for (int b = 0; b < m; ++b) {
      if (b != a && in_nk[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] &&
          in_nk[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]) {
        recip[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
      }
    }
  }

  Eigen::VectorXd dist(m);
  const auto& rq = recip[static_cast<std::size_t>(query_idx)];
  for (int b = 0; b < m; ++b) {
    const auto& rb = recip[static_cast<std::size_t>(b)];
    int inter = 0, uni = 0;
    for (int t = 0; t < m; ++t) {
      const bool x = rq[static_cast<std::size_t>(t)];
      const bool y = rb[static_cast<std::size_t>(t)];
      inter += (x && y) ? 1 : 0;
      uni += (x || y) ? 1 : 0;
    }
    dist(b) = uni == 0 ? 1.0 : 1.0 - static_cast<double>(inter) / uni;
  }
  return dist;
}

std::vector<int> supplementary_assign(const CenterMemory& unmatched,
                                      const CenterMemory& matched,
                                      const std::vector<int>& matched_labels,
                                      double beta, int k, double rho) {
  if (matched.size() == 0) {
    throw EmptyMemoryError("no matched clusters to assign against");
  }
  if (matched_labels.size() != static_cast<std::size_t>(matched.size())) {
    throw ShapeError("matched label count does not match memory size");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in [0, 1]");
  if (!(rho > 0.0)) throw ParameterError("rho must be > 0");

  const int n_matched = matched.size();
  std::vector<int> labels(static_cast<std::size_t>(unmatched.size()), -1);

  // pool = matched centers plus the query as the last row
  Eigen::MatrixXd pool(n_matched + 1, matched.dim());
  pool.topRows(n_matched) = matched.centers;
  const int k_eff = std::min(k, n_matched);  // pool size - 1

  for (int u = 0; u < unmatched.size(); ++u) {
    pool.row(n_matched) = unmatched.centers.row(u);
    const Eigen::VectorXd jaccard =
        k_reciprocal_jaccard(n_matched, pool, k_eff);
    const Eigen::MatrixXd cos = cosine_similarity_matrix(
        unmatched.centers.row(u), matched.centers);

    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int m = 0; m < n_matched; ++m) {
      const double cost =
          beta * (1.0 - cos(0, m)) + (1.0 - beta) * jaccard(m);
      if (cost < best_cost) {
        best_cost = cost;
        best = m;
      }
    }
    if (best_cost < rho) {
      labels[static_cast<std::size_t>(u)] =
          matched_labels[static_cast<std::size_t>(best)];
    }
  }
  return labels;
}

namespace {

// Rows of `centers` picked by index.
Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& centers,
                            const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), centers.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = centers.row(rows[i]);
  }
  return out;
}

}  // namespace

SgmResult sgm_pipeline(const EmbeddingSet& target_v,
                       const EmbeddingSet& target_i, const SgmParams& params) {
  SgmResult res;

  // (1) intra-modality alignment
  res.crmr_v = crmr_refine(target_v.data, params.eps1_v, params.eps2_v,
                           params.min_pts, params.min_cluster_size);
  res.crmr_i = crmr_refine(target_i.data, params.eps1_i, params.eps2_i,
                           params.min_pts, params.min_cluster_size);
  const int n_clusters_v = res.crmr_v.refined.size();
  const int n_clusters_i = res.crmr_i.refined.size();
  if (n_clusters_v == 0 || n_clusters_i == 0) {
    throw DegenerateStageError(
        "a modality refined to zero clusters; nothing to align");
  }

  CenterMemory init_v = renormalized(memory_init(
      target_v.data, res.crmr_v.labels, n_clusters_v, params.alpha));
  CenterMemory init_i = renormalized(memory_init(
      target_i.data, res.crmr_i.labels, n_clusters_i, params.alpha));

  // (2) inter-modality alignment
  res.assignment = inter_modality_match(init_v, init_i);
  for (const auto& [vc, ic] : res.assignment.pairs) {
    const double pair_cost = 1.0 - cosine(init_v.centers.row(vc).transpose(),
                                          init_i.centers.row(ic).transpose());
    if (pair_cost <= params.max_pair_cost) res.kept_pairs.emplace_back(vc, ic);
  }
  if (res.kept_pairs.empty()) {
    throw DegenerateStageError("every matched pair exceeded max_pair_cost");
  }

  // joint ids densely indexed in visible-cluster order
  std::sort(res.kept_pairs.begin(), res.kept_pairs.end());
  res.joint_identity_count = static_cast<int>(res.kept_pairs.size());
  res.cluster_joint_v.assign(static_cast<std::size_t>(n_clusters_v), -1);
  res.cluster_joint_i.assign(static_cast<std::size_t>(n_clusters_i), -1);
  for (int j = 0; j < res.joint_identity_count; ++j) {
    res.cluster_joint_v[static_cast<std::size_t>(res.kept_pairs[static_cast<std::size_t>(j)].first)] = j;
    res.cluster_joint_i[static_cast<std::size_t>(res.kept_pairs[static_cast<std::size_t>(j)].second)] = j;
  }

  // (3) intra-modality supplementary alignment on leftover clusters
  auto supplement = [&](const CenterMemory& init, std::vector<int>& cluster_joint,
                        int& absorbed) {
    std::vector<int> leftover;
    std::vector<int> matched_rows;
    std::vector<int> matched_joint;
    for (int c = 0; c < static_cast<int>(cluster_joint.size()); ++c) {
      if (cluster_joint[static_cast<std::size_t>(c)] == -1) {
        leftover.push_back(c);
      } else {
        matched_rows.push_back(c);
        matched_joint.push_back(cluster_joint[static_cast<std::size_t>(c)]);
      }
    }
    if (leftover.empty()) return;
    CenterMemory mem_um{gather_rows(init.centers, leftover), params.alpha};
    CenterMemory mem_m{gather_rows(init.centers, matched_rows), params.alpha};
    const std::vector<int> assigned = supplementary_assign(
        mem_um, mem_m, matched_joint, params.beta, params.k_reciprocal, params.rho);
    for (std::size_t u = 0; u < leftover.size(); ++u) {
      if (assigned[u] != -1) {
        cluster_joint[static_cast<std::size_t>(leftover[u])] = assigned[u];
        ++absorbed;
      }
    }
  };
  supplement(init_v, res.cluster_joint_v, res.supplementary_v);
  supplement(init_i, res.cluster_joint_i, res.supplementary_i);
  for (int j : res.cluster_joint_v) res.discarded_v += (j == -1) ? 1 : 0;
  for (int j : res.cluster_joint_i) res.discarded_i += (j == -1) ? 1 : 0;

  // per-sample joint labels via cluster provenance
  auto emit_labels = [](const std::vector<int>& intra,
                        const std::vector<int>& cluster_joint) {
    std::vector<int> out(intra.size(), -1);
    for (std::size_t n = 0; n < intra.size(); ++n) {
      if (intra[n] != -1) out[n] = cluster_joint[static_cast<std::size_t>(intra[n])];
    }
    return out;
  };
  res.labels_v = emit_labels(res.crmr_v.labels, res.cluster_joint_v);
  res.labels_i = emit_labels(res.crmr_i.labels, res.cluster_joint_i);

  // memories over joint identities: EMA from the matched cluster's init
  // center toward the joint-identity mean, then renormalize
  auto joint_memory = [&](const CenterMemory& init, const std::vector<int>& labels,
                          const Eigen::MatrixXd& features, bool visible_side) {
    Eigen::MatrixXd old_centers(res.joint_identity_count, init.dim());
    for (int j = 0; j < res.joint_identity_count; ++j) {
      const auto& pair = res.kept_pairs[static_cast<std::size_t>(j)];
      old_centers.row(j) = init.centers.row(visible_side ? pair.first : pair.second);
    }
    const CenterMemory fresh = renormalized(
        memory_init(features, labels, res.joint_identity_count, params.alpha));
    const CenterMemory old{old_centers, params.alpha};
    return renormalized(memory_update(old, fresh.centers, params.alpha));
  };
  res.mem_v = joint_memory(init_v, res.labels_v, target_v.data, true);
  res.mem_i = joint_memory(init_i, res.labels_i, target_i.data, false);

  return res;
}

}  // namespace dslga
