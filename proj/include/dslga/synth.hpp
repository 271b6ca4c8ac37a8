#pragma once

// dslga/synth.hpp
//
// Seeded synthetic cross-domain / cross-modality embedding generator with
// ground truth, plus the label-quality metrics the verification suites
// score pipeline stages with. Generation is bit-reproducible per seed.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dslga/assignment.hpp"
#include "dslga/types.hpp"

namespace dslga {

struct SynthConfig {
  int n_identities = 20;
  int samples_per_modality = 8;  // per identity, per modality, per domain
  int dim = 16;
  double modality_offset_scale = 0.3;  // 0 = identity, 1 = full rotation
  double domain_offset_scale = 0.2;
  double noise_std = 0.05;
  int identities_missing_in_infrared = 0;  // highest ids, target domain
  std::uint64_t seed = 0;
};

struct SynthData {
  EmbeddingSet source;            // labeled, both modalities
  EmbeddingSet target;            // labels all -1
  std::vector<int> target_truth;  // ground-truth identity per target row
  Eigen::MatrixXd prototypes;     // n_identities x dim unit vectors
};

// Identity prototypes are random unit vectors kept >= 0.5 apart in cosine
// distance by rejection resampling. Modality and domain discrepancies are
// fixed random rotations blended in by their offset scales; isotropic
// noise is added last and every sample is renormalized.
SynthData generate_synthetic(const SynthConfig& cfg);

struct QualityReport {
  double pairwise_precision = 0.0;
  double pairwise_recall = 0.0;
  double pairwise_f1 = 0.0;
  double matching_accuracy = 0.0;
  long long evaluated_pairs = 0;
  int n_discarded = 0;
};

// Pair-counting precision/recall/F1 over all sample pairs; pairs touching
// a -1 prediction are excluded. Metrics are 0 when undefined.
QualityReport pairwise_label_metrics(const std::vector<int>& pred,
                                     const std::vector<int>& truth);

// Majority ground-truth identity per cluster, -1 for an empty cluster.
std::vector<int> majority_identity(const std::vector<std::vector<int>>& clusters,
                                   const std::vector<int>& truth);

// Fraction of matched pairs whose majority identities agree.
double matching_accuracy(const Assignment& assignment,
                         const std::vector<int>& truth_visible,
                         const std::vector<int>& truth_infrared);

}  // namespace dslga
