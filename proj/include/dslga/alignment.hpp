#pragma once

// dslga/alignment.hpp
//
// Cross-modality cluster alignment (SGM): intra-modality refinement per
// modality, minimum-cost matching of visible/infrared cluster centers,
// then supplementary re-assignment of leftover clusters under a combined
// cosine / k-reciprocal-Jaccard cost.

#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

#include "dslga/assignment.hpp"
#include "dslga/clustering.hpp"
#include "dslga/memory.hpp"
#include "dslga/types.hpp"

namespace dslga {

// Hungarian matching on cost(v,i) = 1 - cosine(center_v, center_i).
// Throws EmptyMemoryError when either memory has no rows.
Assignment inter_modality_match(const CenterMemory& mem_v,
                                const CenterMemory& mem_i);

// Jaccard distance from centers[query_idx] to every center in the pool.
//
// Neighbor sets use cosine distance; N_k(a) is the k nearest centers
// other than a itself (ties by ascending index). The reciprocal set is
// R(a) = {a} + {b in N_k(a) : a in N_k(b)} and
// d_J(a,b) = 1 - |R(a) n R(b)| / |R(a) u R(b)|.
Eigen::VectorXd k_reciprocal_jaccard(int query_idx,
                                     const Eigen::MatrixXd& centers, int k);

// Per unmatched cluster u: cost K(u,m) = beta*(1 - cos) + (1-beta)*d_J
// against every matched cluster m; the argmin label is inherited when
// K < rho, otherwise -1. Jaccard neighbor sets are computed over the
// matched centers plus the query, with k clamped to the pool size - 1.
std::vector<int> supplementary_assign(const CenterMemory& unmatched,
                                      const CenterMemory& matched,
                                      const std::vector<int>& matched_labels,
                                      double beta, int k, double rho);

struct SgmParams {
  double eps1_v = 0.6;
  double eps2_v = 0.57;
  double eps1_i = 0.6;
  double eps2_i = 0.57;
  int min_pts = 4;
  int min_cluster_size = 1;
  double alpha = 0.5;  // memory EMA rate
  double beta = 0.2;
  int k_reciprocal = 20;
  double rho = 0.3;
  // optional filter on matched-pair cost; off by default
  double max_pair_cost = std::numeric_limits<double>::infinity();
};

struct SgmResult {
  std::vector<int> labels_v;  // per visible sample, joint ids or -1
  std::vector<int> labels_i;
  int joint_identity_count = 0;  // C_t

  CenterMemory mem_v;  // C_t x D, EMA-refreshed and renormalized
  CenterMemory mem_i;

  CrmrResult crmr_v;
  CrmrResult crmr_i;
  Assignment assignment;                       // over cluster indices
  std::vector<std::pair<int, int>> kept_pairs; // after max_pair_cost filter
  std::vector<int> cluster_joint_v;  // per visible cluster, joint id or -1
  std::vector<int> cluster_joint_i;
  int supplementary_v = 0;  // clusters absorbed via the supplementary step
  int supplementary_i = 0;
  int discarded_v = 0;  // clusters that ended at -1
  int discarded_i = 0;
};

// Full three-step alignment over one modality pair. Throws
// DegenerateStageError when either modality refines to zero clusters.
SgmResult sgm_pipeline(const EmbeddingSet& target_v,
                       const EmbeddingSet& target_i, const SgmParams& params);

}  // namespace dslga
