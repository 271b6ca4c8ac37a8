#include "dslga/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"
#include "dslga/rng.hpp"

namespace dslga {

void StageReport::add(const std::string& key, const std::string& value) {
  fields.emplace_back(key, value);
}

void StageReport::add(const std::string& key, double value) {
  std::ostringstream ss;
  ss.precision(17);
  ss << value;
  fields.emplace_back(key, ss.str());
}

void StageReport::add(const std::string& key, long long value) {
  fields.emplace_back(key, std::to_string(value));
}

std::string StageReport::to_text() const {
  std::string out;
  for (const auto& [k, v] : fields) {
    out += k;
    out += '\t';
    out += v;
    out += '\n';
  }
  return out;
}

Eigen::VectorXd synthetic_discriminator_probs(std::uint64_t seed,
                                              std::string_view stage_tag,
                                              int count) {
  SplitRng rng = SplitRng(seed).split("discriminator-probs").split(stage_tag);
  Eigen::VectorXd probs(count);
  for (int i = 0; i < count; ++i) {
    probs(i) = 0.05 + 0.9 * rng.next_double();
  }
  return probs;
}

namespace {

struct ModalitySplit {
  EmbeddingSet visible;
  EmbeddingSet infrared;
  std::vector<int> visible_rows;  // original row indices
  std::vector<int> infrared_rows;
};

ModalitySplit split_modalities(const EmbeddingSet& set) {
  ModalitySplit split;
  split.visible_rows = rows_with_modality(set, Modality::visible);
  split.infrared_rows = rows_with_modality(set, Modality::infrared);
  split.visible = select_rows(set, split.visible_rows);
  split.infrared = select_rows(set, split.infrared_rows);
  return split;
}

// Adversarial pair on externally supplied (or synthetic) probabilities.
// Domain convention: 0 = source, 1 = target, source rows first.
void adversarial_terms(const Eigen::VectorXd& probs, int n_source, int n_target,
                       DsalTerms& terms) {
  if (probs.size() != n_source + n_target) {
    throw ShapeError("probability count does not match sample count");
  }
  std::vector<int> domains(static_cast<std::size_t>(n_source), 0);
  domains.insert(domains.end(), static_cast<std::size_t>(n_target), 1);
  terms.discriminator = discriminator_loss(probs, domains).value;
  terms.generator = generator_adversarial_loss(probs).value;
}

// Rows with label != -1, with the compacted label vector.
std::pair<Eigen::MatrixXd, std::vector<int>> labeled_subset(
    const Eigen::MatrixXd& features, const std::vector<int>& labels) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != -1) rows.push_back(static_cast<int>(i));
  }
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), features.cols());
  std::vector<int> sub_labels;
  sub_labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sub.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    sub_labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  return {std::move(sub), std::move(sub_labels)};
}

double contrastive_value(const Eigen::MatrixXd& features,
                         const std::vector<int>& labels,
                         const UnifiedMemory& umem, int offset, double t) {
  if (features.rows() == 0) return 0.0;
  return memory_contrastive_loss(features, labels, umem, offset, t).value;
}

}  // namespace

PretrainOutput run_pretrain_stage(const PipelineConfig& cfg,
                                  const EmbeddingSet& source,
                                  const EmbeddingSet& target,
                                  const Eigen::VectorXd* probs) {
  cfg.validate();
  source.check_consistent();
  target.check_consistent();

  EmbeddingSet src = source;
  EmbeddingSet tgt = target;
  src.data = l2_normalize(src.data);
  tgt.data = l2_normalize(tgt.data);

  const ModalitySplit s = split_modalities(src);
  const ModalitySplit t = split_modalities(tgt);
  const int c_s = identity_count(src.label);
  if (c_s == 0) throw DegenerateStageError("source domain carries no labels");

  PretrainOutput out;

  // intra-modality pseudo labels for the target
  out.crmr_v = crmr_refine(t.visible.data, cfg.eps1_v, cfg.eps2_v, cfg.min_pts,
                           cfg.min_cluster_size);
  out.crmr_i = crmr_refine(t.infrared.data, cfg.eps1_i, cfg.eps2_i, cfg.min_pts,
                           cfg.min_cluster_size);
  const int c_tv = out.crmr_v.refined.size();
  const int c_ti = out.crmr_i.refined.size();
  if (c_tv == 0 || c_ti == 0) {
    throw DegenerateStageError("target clustering produced no clusters");
  }

  out.mem_sv = renormalized(memory_init(s.visible, c_s, cfg.alpha));
  out.mem_si = renormalized(memory_init(s.infrared, c_s, cfg.alpha));
  out.mem_tv = renormalized(
      memory_init(t.visible.data, out.crmr_v.labels, c_tv, cfg.alpha));
  out.mem_ti = renormalized(
      memory_init(t.infrared.data, out.crmr_i.labels, c_ti, cfg.alpha));

  const Eigen::VectorXd p =
      probs ? *probs
            : synthetic_discriminator_probs(cfg.seed, "pretrain",
                                            src.n() + tgt.n());
  adversarial_terms(p, src.n(), tgt.n(), out.terms);

  const UnifiedMemory umem_v = unified_memory(out.mem_sv, out.mem_tv);
  const UnifiedMemory umem_i = unified_memory(out.mem_si, out.mem_ti);
  const double temp = cfg.contrastive_temperature;
  out.terms.source_visible =
      contrastive_value(s.visible.data, s.visible.label, umem_v, 0, temp);
  out.terms.source_infrared =
      contrastive_value(s.infrared.data, s.infrared.label, umem_i, 0, temp);
  out.terms.source_cross =
      contrastive_value(s.visible.data, s.visible.label, umem_i, 0, temp) +
      contrastive_value(s.infrared.data, s.infrared.label, umem_v, 0, temp);
  const auto [tv_feat, tv_labels] =
      labeled_subset(t.visible.data, out.crmr_v.labels);
  const auto [ti_feat, ti_labels] =
      labeled_subset(t.infrared.data, out.crmr_i.labels);
  out.terms.target_visible =
      contrastive_value(tv_feat, tv_labels, umem_v, c_s, temp);
  out.terms.target_infrared =
      contrastive_value(ti_feat, ti_labels, umem_i, c_s, temp);
  out.dsal = dsal_total(out.terms);

  // pseudo labels mapped back to original target rows
  out.target_labels.assign(static_cast<std::size_t>(tgt.n()), -1);
  for (std::size_t i = 0; i < t.visible_rows.size(); ++i) {
    out.target_labels[static_cast<std::size_t>(t.visible_rows[i])] =
        out.crmr_v.labels[i];
  }
  for (std::size_t i = 0; i < t.infrared_rows.size(); ++i) {
    out.target_labels[static_cast<std::size_t>(t.infrared_rows[i])] =
        out.crmr_i.labels[i];
  }

  StageReport& r = out.report;
  r.add("stage", std::string("pretrain"));
  r.add("seed", static_cast<long long>(cfg.seed));
  r.add("n_source", static_cast<long long>(src.n()));
  r.add("n_target", static_cast<long long>(tgt.n()));
  r.add("c_s", static_cast<long long>(c_s));
  r.add("c_t_visible", static_cast<long long>(c_tv));
  r.add("c_t_infrared", static_cast<long long>(c_ti));
  r.add("clusters_eps1_v", static_cast<long long>(out.crmr_v.clusters_eps1));
  r.add("clusters_eps2_v", static_cast<long long>(out.crmr_v.clusters_eps2));
  r.add("clusters_eps1_i", static_cast<long long>(out.crmr_i.clusters_eps1));
  r.add("clusters_eps2_i", static_cast<long long>(out.crmr_i.clusters_eps2));
  r.add("noise_v", static_cast<long long>(out.crmr_v.refined.noise.size()));
  r.add("noise_i", static_cast<long long>(out.crmr_i.refined.noise.size()));
  r.add("loss_discriminator", out.terms.discriminator);
  r.add("loss_generator", out.terms.generator);
  r.add("loss_source_visible", out.terms.source_visible);
  r.add("loss_source_infrared", out.terms.source_infrared);
  r.add("loss_source_cross", out.terms.source_cross);
  r.add("loss_target_visible", out.terms.target_visible);
  r.add("loss_target_infrared", out.terms.target_infrared);
  r.add("loss_dsal", out.dsal);
  return out;
}

namespace {

// Drop joint identities that lost a modality; relabel densely.
int filter_bimodal(std::vector<int>& labels_v, std::vector<int>& labels_i,
                   int n_ids, int& excluded) {
  std::vector<bool> has_v(static_cast<std::size_t>(n_ids), false);
  std::vector<bool> has_i(static_cast<std::size_t>(n_ids), false);
  for (int l : labels_v) {
    if (l >= 0) has_v[static_cast<std::size_t>(l)] = true;
  }
  for (int l : labels_i) {
    if (l >= 0) has_i[static_cast<std::size_t>(l)] = true;
  }
  std::vector<int> remap(static_cast<std::size_t>(n_ids), -1);
  int next = 0;
  excluded = 0;
  for (int id = 0; id < n_ids; ++id) {
    if (has_v[static_cast<std::size_t>(id)] && has_i[static_cast<std::size_t>(id)]) {
      remap[static_cast<std::size_t>(id)] = next++;
    } else {
      ++excluded;
    }
  }
  auto apply = [&](std::vector<int>& labels) {
    for (int& l : labels) {
      if (l >= 0) l = remap[static_cast<std::size_t>(l)];
    }
  };
  apply(labels_v);
  apply(labels_i);
  return next;
}

}  // namespace

FinetuneOutput run_finetune_stage(const PipelineConfig& cfg,
                                  const EmbeddingSet& source,
                                  const EmbeddingSet& target,
                                  const CenterMemory& mem_sv,
                                  const CenterMemory& mem_si,
                                  const CenterMemory* prev_tv,
                                  const CenterMemory* prev_ti,
                                  const Eigen::VectorXd* probs) {
  cfg.validate();
  source.check_consistent();
  target.check_consistent();
  if (mem_sv.size() == 0 || mem_si.size() == 0) {
    throw EmptyMemoryError("source memories are required for fine-tuning");
  }

  EmbeddingSet src = source;
  EmbeddingSet tgt = target;
  src.data = l2_normalize(src.data);
  tgt.data = l2_normalize(tgt.data);

  const ModalitySplit s = split_modalities(src);
  const ModalitySplit t = split_modalities(tgt);
  const int c_s = identity_count(src.label);
  if (c_s != mem_sv.size() || c_s != mem_si.size()) {
    throw ShapeError("source memory size disagrees with source label count");
  }

  FinetuneOutput out;

  SgmParams params;
  params.eps1_v = cfg.eps1_v;
  params.eps2_v = cfg.eps2_v;
  params.eps1_i = cfg.eps1_i;
  params.eps2_i = cfg.eps2_i;
  params.min_pts = cfg.min_pts;
  params.min_cluster_size = cfg.min_cluster_size;
  params.alpha = cfg.alpha;
  params.beta = cfg.beta;
  params.k_reciprocal = cfg.k_reciprocal;
  params.rho = cfg.rho;
  params.max_pair_cost = cfg.max_pair_cost;
  out.sgm = sgm_pipeline(t.visible, t.infrared, params);

  std::vector<int> labels_v = out.sgm.labels_v;
  std::vector<int> labels_i = out.sgm.labels_i;
  out.joint_identity_count = filter_bimodal(
      labels_v, labels_i, out.sgm.joint_identity_count, out.excluded_identities);
  if (out.joint_identity_count == 0) {
    throw DegenerateStageError("no joint identity kept both modalities");
  }

  // joint memories: EMA against the previous epoch when the identity
  // count is unchanged, re-initialize otherwise
  const bool can_ema = prev_tv && prev_ti &&
                       prev_tv->size() == out.joint_identity_count &&
                       prev_ti->size() == out.joint_identity_count;
  CenterMemory fresh_tv = renormalized(memory_init(
      t.visible.data, labels_v, out.joint_identity_count, cfg.alpha));
  CenterMemory fresh_ti = renormalized(memory_init(
      t.infrared.data, labels_i, out.joint_identity_count, cfg.alpha));
  if (can_ema) {
    out.memory_mode = "ema";
    out.mem_tv = renormalized(memory_update(*prev_tv, fresh_tv.centers, cfg.alpha));
    out.mem_ti = renormalized(memory_update(*prev_ti, fresh_ti.centers, cfg.alpha));
  } else {
    out.memory_mode = "reinit";
    out.mem_tv = (out.excluded_identities == 0) ? out.sgm.mem_v : fresh_tv;
    out.mem_ti = (out.excluded_identities == 0) ? out.sgm.mem_i : fresh_ti;
  }

  // holistic reference: all four banks stacked, source block first
  out.reference =
      unified_memory(merged(mem_sv, mem_si), merged(out.mem_tv, out.mem_ti));

  const Eigen::VectorXd p =
      probs ? *probs
            : synthetic_discriminator_probs(cfg.seed, "finetune",
                                            src.n() + tgt.n());
  adversarial_terms(p, src.n(), tgt.n(), out.terms);

  const UnifiedMemory umem_v = unified_memory(mem_sv, out.mem_tv);
  const UnifiedMemory umem_i = unified_memory(mem_si, out.mem_ti);
  const double temp = cfg.contrastive_temperature;
  out.terms.source_visible =
      contrastive_value(s.visible.data, s.visible.label, umem_v, 0, temp);
  out.terms.source_infrared =
      contrastive_value(s.infrared.data, s.infrared.label, umem_i, 0, temp);
  out.terms.source_cross =
      contrastive_value(s.visible.data, s.visible.label, umem_i, 0, temp) +
      contrastive_value(s.infrared.data, s.infrared.label, umem_v, 0, temp);
  const auto [tv_feat, tv_labels] = labeled_subset(t.visible.data, labels_v);
  const auto [ti_feat, ti_labels] = labeled_subset(t.infrared.data, labels_i);
  out.terms.target_visible =
      contrastive_value(tv_feat, tv_labels, umem_v, c_s, temp);
  out.terms.target_infrared =
      contrastive_value(ti_feat, ti_labels, umem_i, c_s, temp);
  out.dsal = dsal_total(out.terms);

  out.cmcc = cmcc_loss(t.visible.data, labels_v, t.infrared.data, labels_i,
                       out.reference, cfg.tau, cfg.kl_mode);
  out.final_value = final_loss(out.dsal, out.cmcc.value, cfg.psi, cfg.cmcc_active);

  // joint labels mapped back to original target rows
  out.target_labels.assign(static_cast<std::size_t>(tgt.n()), -1);
  for (std::size_t i = 0; i < t.visible_rows.size(); ++i) {
    out.target_labels[static_cast<std::size_t>(t.visible_rows[i])] = labels_v[i];
  }
  for (std::size_t i = 0; i < t.infrared_rows.size(); ++i) {
    out.target_labels[static_cast<std::size_t>(t.infrared_rows[i])] = labels_i[i];
  }

  double mean_confidence = 0.0;
  for (double c : out.cmcc.confidence) mean_confidence += c;
  if (!out.cmcc.confidence.empty()) {
    mean_confidence /= static_cast<double>(out.cmcc.confidence.size());
  }

  StageReport& r = out.report;
  r.add("stage", std::string("finetune"));
  r.add("seed", static_cast<long long>(cfg.seed));
  r.add("c_t_visible", static_cast<long long>(out.sgm.crmr_v.refined.size()));
  r.add("c_t_infrared", static_cast<long long>(out.sgm.crmr_i.refined.size()));
  r.add("c_t_joint", static_cast<long long>(out.joint_identity_count));
  r.add("matched_pairs", static_cast<long long>(out.sgm.kept_pairs.size()));
  r.add("supplementary_visible", static_cast<long long>(out.sgm.supplementary_v));
  r.add("supplementary_infrared", static_cast<long long>(out.sgm.supplementary_i));
  r.add("discarded_clusters_visible", static_cast<long long>(out.sgm.discarded_v));
  r.add("discarded_clusters_infrared", static_cast<long long>(out.sgm.discarded_i));
  r.add("excluded_identities", static_cast<long long>(out.excluded_identities));
  r.add("memory_mode", out.memory_mode);
  r.add("c_ref", static_cast<long long>(out.reference.centers.rows()));
  r.add("mean_confidence", mean_confidence);
  r.add("loss_discriminator", out.terms.discriminator);
  r.add("loss_generator", out.terms.generator);
  r.add("loss_source_visible", out.terms.source_visible);
  r.add("loss_source_infrared", out.terms.source_infrared);
  r.add("loss_source_cross", out.terms.source_cross);
  r.add("loss_target_visible", out.terms.target_visible);
  r.add("loss_target_infrared", out.terms.target_infrared);
  r.add("loss_dsal", out.dsal);
  r.add("loss_cmcc", out.cmcc.value);
  r.add("cmcc_active", std::string(cfg.cmcc_active ? "true" : "false"));
  r.add("loss_final", out.final_value);
  return out;
}

}  // namespace dslga
