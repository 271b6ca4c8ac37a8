#include "dslga/synth.hpp"

#include <algorithm>
#include <string>

#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"
#include "dslga/rng.hpp"

namespace dslga {

namespace {

Eigen::VectorXd random_unit_vector(SplitRng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.next_gaussian();
  const double norm = v.norm();
  if (norm == 0.0) return random_unit_vector(rng, dim);
  return v / norm;
}

// Random rotation via QR of a Gaussian matrix, sign-fixed so the
// factorization is unique.
Eigen::MatrixXd random_orthogonal(SplitRng& rng, int dim) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.next_gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

// Blend toward a rotated copy: scale 0 keeps x, scale 1 lands on Rx.
Eigen::VectorXd blend_rotation(const Eigen::VectorXd& x,
                               const Eigen::MatrixXd& rot, double scale) {
  if (scale == 0.0) return x;
  Eigen::VectorXd mixed = (1.0 - scale) * x + scale * (rot * x);
  const double norm = mixed.norm();
  if (norm == 0.0) return x;  // antipodal corner case
  return mixed / norm;
}

}  // namespace

SynthData generate_synthetic(const SynthConfig& cfg) {
  if (cfg.dim < 2) throw ParameterError("dim must be >= 2");
  if (cfg.n_identities < 0 || cfg.samples_per_modality < 0) {
    throw ParameterError("counts must be >= 0");
  }
  if (cfg.modality_offset_scale < 0 || cfg.domain_offset_scale < 0 ||
      cfg.noise_std < 0) {
    throw ParameterError("scales must be >= 0");
  }
  if (cfg.identities_missing_in_infrared < 0 ||
      cfg.identities_missing_in_infrared > cfg.n_identities) {
    throw ParameterError("identities_missing_in_infrared out of range");
  }

  const SplitRng root = SplitRng(cfg.seed);
  SynthData out;

  // prototypes, rejection-resampled to >= 0.5 apart in cosine distance
  SplitRng proto_rng = root.split("prototypes");
  out.prototypes.resize(cfg.n_identities, cfg.dim);
  int attempts = 0;
  for (int c = 0; c < cfg.n_identities; ++c) {
    while (true) {
      if (++attempts > 20000) {
        throw ParameterError(
            "could not place prototypes 0.5 apart; raise dim or lower "
            "n_identities");
      }
      const Eigen::VectorXd cand = random_unit_vector(proto_rng, cfg.dim);
      bool ok = true;
      for (int p = 0; p < c; ++p) {
        if (1.0 - cand.dot(out.prototypes.row(p).transpose()) < 0.5) {
          ok = false;
          break;
        }
      }
      if (ok) {
        out.prototypes.row(c) = cand.transpose();
        break;
      }
    }
  }

  SplitRng mod_rng = root.split("modality-transform");
  SplitRng dom_rng = root.split("domain-transform");
  const Eigen::MatrixXd rot_modality = random_orthogonal(mod_rng, cfg.dim);
  const Eigen::MatrixXd rot_domain = random_orthogonal(dom_rng, cfg.dim);

  auto fill_set = [&](Domain domain, EmbeddingSet& set,
                      std::vector<int>* truth_out, bool expose_labels) {
    const bool is_target = domain == Domain::target;
    const int missing =
        is_target ? cfg.identities_missing_in_infrared : 0;
    const int n_visible = cfg.n_identities * cfg.samples_per_modality;
    const int n_infrared =
        (cfg.n_identities - missing) * cfg.samples_per_modality;
    const int n = n_visible + n_infrared;

    set.data.resize(n, cfg.dim);
    set.domain.assign(static_cast<std::size_t>(n), domain);
    set.modality.reserve(static_cast<std::size_t>(n));
    set.label.reserve(static_cast<std::size_t>(n));
    set.sample_id.reserve(static_cast<std::size_t>(n));
    set.camera_id.reserve(static_cast<std::size_t>(n));
    if (truth_out) truth_out->reserve(static_cast<std::size_t>(n));

    const char* prefix = is_target ? "t" : "s";
    int row = 0;
    for (int pass = 0; pass < 2; ++pass) {
      const Modality modality =
          pass == 0 ? Modality::visible : Modality::infrared;
      const int id_limit =
          modality == Modality::infrared ? cfg.n_identities - missing
                                         : cfg.n_identities;
      SplitRng noise_rng = root.split(std::string("noise/") +
                                      to_string(domain) + "/" +
                                      to_string(modality));
      for (int id = 0; id < id_limit; ++id) {
        for (int s = 0; s < cfg.samples_per_modality; ++s, ++row) {
          Eigen::VectorXd x = out.prototypes.row(id).transpose();
          if (modality == Modality::infrared) {
            x = blend_rotation(x, rot_modality, cfg.modality_offset_scale);
          }
          if (is_target) {
            x = blend_rotation(x, rot_domain, cfg.domain_offset_scale);
          }
          if (cfg.noise_std > 0) {
            for (int d = 0; d < cfg.dim; ++d) {
              x(d) += cfg.noise_std * noise_rng.next_gaussian();
            }
          }
          const double norm = x.norm();
          set.data.row(row) = (norm > 0 ? x / norm : x).transpose();
          set.modality.push_back(modality);
          set.label.push_back(expose_labels ? id : -1);
          set.sample_id.push_back(prefix + std::to_string(row));
          set.camera_id.push_back(row);  // all cameras distinct
          if (truth_out) truth_out->push_back(id);
        }
      }
    }
  };

  fill_set(Domain::source, out.source, nullptr, true);
  fill_set(Domain::target, out.target, &out.target_truth, false);
  return out;
}

QualityReport pairwise_label_metrics(const std::vector<int>& pred,
                                     const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("prediction and truth lengths differ");
  }
  QualityReport report;
  long long tp = 0, fp = 0, fn = 0;
  const int n = static_cast<int>(pred.size());
  for (int i = 0; i < n; ++i) {
    if (pred[static_cast<std::size_t>(i)] == -1) ++report.n_discarded;
  }
  for (int i = 0; i < n; ++i) {
    if (pred[static_cast<std::size_t>(i)] == -1) continue;
    for (int j = i + 1; j < n; ++j) {
      if (pred[static_cast<std::size_t>(j)] == -1) continue;
      ++report.evaluated_pairs;
      const bool same_pred =
          pred[static_cast<std::size_t>(i)] == pred[static_cast<std::size_t>(j)];
      const bool same_truth =
          truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)];
      if (same_pred && same_truth) ++tp;
      if (same_pred && !same_truth) ++fp;
      if (!same_pred && same_truth) ++fn;
    }
  }
  report.pairwise_precision =
      (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  report.pairwise_recall =
      (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double pr_sum = report.pairwise_precision + report.pairwise_recall;
  report.pairwise_f1 =
      pr_sum > 0 ? 2.0 * report.pairwise_precision * report.pairwise_recall / pr_sum
                 : 0.0;
  return report;
}

std::vector<int> majority_identity(const std::vector<std::vector<int>>& clusters,
                                   const std::vector<int>& truth) {
  std::vector<int> out;
  out.reserve(clusters.size());
  for (const auto& members : clusters) {
    int best = -1;
    int best_count = 0;
    std::vector<std::pair<int, int>> counts;  // (identity, count)
    for (int i : members) {
      const int id = truth[static_cast<std::size_t>(i)];
      bool found = false;
      for (auto& [cid, cnt] : counts) {
        if (cid == id) {
          ++cnt;
          found = true;
          break;
        }
      }
      if (!found) counts.emplace_back(id, 1);
    }
    for (const auto& [cid, cnt] : counts) {
      if (cnt > best_count || (cnt == best_count && cid < best)) {
        best = cid;
        best_count = cnt;
      }
    }
    out.push_back(best);
  }
  return out;
}

double matching_accuracy(const Assignment& assignment,
                         const std::vector<int>& truth_visible,
                         const std::vector<int>& truth_infrared) {
  if (assignment.pairs.empty()) return 0.0;
  int correct = 0;
  for (const auto& [vc, ic] : assignment.pairs) {
    if (vc < 0 || static_cast<std::size_t>(vc) >= truth_visible.size() ||
        ic < 0 || static_cast<std::size_t>(ic) >= truth_infrared.size()) {
      throw ShapeError("assignment references a cluster outside the truth map");
    }
    if (truth_visible[static_cast<std::size_t>(vc)] ==
        truth_infrared[static_cast<std::size_t>(ic)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) /
         static_cast<double>(assignment.pairs.size());
}

}  // namespace dslga
