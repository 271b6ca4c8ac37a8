#pragma once

// dslga/config.hpp
//
// Pipeline configuration. File format is flat `key = value` text with
// '#' comments; unknown keys are rejected. Command-line flags override
// file values, which override the defaults below.

#include <cstdint>
#include <limits>
#include <string>

#include "dslga/losses.hpp"

namespace dslga {

struct PipelineConfig {
  // dual-eps clustering radii per modality
  double eps1_v = 0.6;
  double eps2_v = 0.57;
  double eps1_i = 0.6;
  double eps2_i = 0.57;
  int min_pts = 4;
  int min_cluster_size = 1;

  double alpha = 0.5;  // memory EMA rate
  double beta = 0.2;   // cosine/Jaccard blend in the supplementary cost
  double rho = 0.3;    // supplementary acceptance threshold
  double tau = 0.05;   // holistic softmax temperature
  double psi = 0.5;    // consistency-term weight in the final loss

  int k_reciprocal = 20;
  double contrastive_temperature = 1.0;
  bool cmcc_active = true;
  CmccKlMode kl_mode = CmccKlMode::center_to_center;
  double max_pair_cost = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  // Throws ParameterError on any out-of-range value.
  void validate() const;
};

PipelineConfig load_config(const std::string& path);
std::string config_to_text(const PipelineConfig& cfg);
void save_config(const PipelineConfig& cfg, const std::string& path);

}  // namespace dslga
