#pragma once

// dslga/pipeline.hpp
//
// Stage orchestration over embedding sets: the pre-training stage
// (per-modality pseudo labels, four center memories, adversarial +
// contrastive loss breakdown) and the fine-tuning stage (joint
// cross-modality labels, holistic reference, consistency loss, final
// loss). Stages are pure given their inputs; reports list fields in a
// fixed order so identical runs serialize byte-identically.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dslga/alignment.hpp"
#include "dslga/config.hpp"
#include "dslga/losses.hpp"
#include "dslga/memory.hpp"
#include "dslga/types.hpp"

namespace dslga {

struct StageReport {
  std::vector<std::pair<std::string, std::string>> fields;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, long long value);
  std::string to_text() const;  // one "key\tvalue" line per field
};

// Deterministic stand-in probabilities for the (out-of-scope)
// discriminator network, uniform in (0.05, 0.95).
Eigen::VectorXd synthetic_discriminator_probs(std::uint64_t seed,
                                              std::string_view stage_tag,
                                              int count);

struct PretrainOutput {
  std::vector<int> target_labels;  // per target row, -1 where discarded
  CrmrResult crmr_v;
  CrmrResult crmr_i;
  CenterMemory mem_sv, mem_si, mem_tv, mem_ti;  // renormalized
  DsalTerms terms;
  double dsal = 0.0;
  StageReport report;
};

// Labeled source + unlabeled target. `probs` overrides the synthetic
// discriminator probabilities; order is all source rows then all target
// rows. Throws DegenerateStageError when a target modality clusters to
// nothing.
PretrainOutput run_pretrain_stage(const PipelineConfig& cfg,
                                  const EmbeddingSet& source,
                                  const EmbeddingSet& target,
                                  const Eigen::VectorXd* probs = nullptr);

struct FinetuneOutput {
  SgmResult sgm;
  std::vector<int> target_labels;  // joint ids per target row, -1 discards
  int joint_identity_count = 0;    // after bimodal filtering
  int excluded_identities = 0;     // joint ids that lost a modality
  CenterMemory mem_tv, mem_ti;     // joint memories actually used
  std::string memory_mode;         // "ema" or "reinit"
  UnifiedMemory reference;         // holistic reference bank
  CmccResult cmcc;
  DsalTerms terms;
  double dsal = 0.0;
  double final_value = 0.0;
  StageReport report;
};

// Fine-tuning stage over serialized stage-1 artifacts: the source
// memories come from stage 1; previous target memories, when given and
// size-compatible with the fresh joint count, are EMA-merged, otherwise
// the stage re-initializes (recorded in the report).
FinetuneOutput run_finetune_stage(const PipelineConfig& cfg,
                                  const EmbeddingSet& source,
                                  const EmbeddingSet& target,
                                  const CenterMemory& mem_sv,
                                  const CenterMemory& mem_si,
                                  const CenterMemory* prev_tv = nullptr,
                                  const CenterMemory* prev_ti = nullptr,
                                  const Eigen::VectorXd* probs = nullptr);

}  // namespace dslga
