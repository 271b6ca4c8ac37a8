#include "dslga/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dslga/matrix_ops.hpp"

namespace dslga {

namespace {

// Row-wise softmax of logits, max-subtracted before exponentiation.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const double row_max = logits.row(n).maxCoeff();
    out.row(n) = (logits.row(n).array() - row_max).exp();
    out.row(n) /= out.row(n).sum();
  }
  return out;
}

// Gradient w.r.t. logits given gradient w.r.t. softmax output p:
// g_z = p .* (g_p - <g_p, p>).
Eigen::RowVectorXd softmax_backward(const Eigen::RowVectorXd& p,
                                    const Eigen::RowVectorXd& g_p) {
  const double inner = g_p.dot(p);
  return (p.array() * (g_p.array() - inner)).matrix();
}

}  // namespace

LossResult discriminator_loss(const Eigen::VectorXd& probs,
                              const std::vector<int>& domain_labels) {
  const Eigen::Index n = probs.size();
  if (domain_labels.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("domain label count does not match probabilities");
  }
  LossResult res;
  res.grad = Eigen::MatrixXd::Zero(n, 1);
  if (n == 0) return res;

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = probs(i);
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("probability " + std::to_string(p) +
                        " not strictly inside (0, 1)");
    }
    const int dom = domain_labels[static_cast<std::size_t>(i)];
    if (dom != 0 && dom != 1) throw DomainError("domain label must be 0 or 1");
    sum += dom * std::log(p) + (1 - dom) * std::log(1.0 - p);
    res.grad(i, 0) = -(dom / p - (1 - dom) / (1.0 - p)) / static_cast<double>(n);
  }
  res.value = -sum / static_cast<double>(n);
  return res;
}

LossResult generator_adversarial_loss(const Eigen::VectorXd& probs) {
  const Eigen::Index n = probs.size();
  LossResult res;
  res.grad = Eigen::MatrixXd::Zero(n, 1);
  if (n == 0) return res;
  const Eigen::ArrayXd dev = probs.array() - 0.5;
  res.value = dev.square().mean();
  res.grad.col(0) = 2.0 * dev / static_cast<double>(n);
  return res;
}

UnifiedMemory unified_memory(const CenterMemory& first,
                             const CenterMemory& second) {
  const CenterMemory cat = merged(first, second);
  return UnifiedMemory{cat.centers, first.size()};
}

LossResult memory_contrastive_loss(const Eigen::MatrixXd& features,
                                   const std::vector<int>& labels,
                                   const UnifiedMemory& umem, int label_offset,
                                   double temperature) {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be > 0");
  const Eigen::Index n = features.rows();
  if (labels.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("label count does not match feature rows");
  }
  const int n_classes = static_cast<int>(umem.centers.rows());
  LossResult res;
  res.grad = Eigen::MatrixXd::Zero(n, features.cols());
  if (n == 0) return res;

  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l < 0 || label_offset + l >= n_classes) {
      throw LabelError("label " + std::to_string(l) + " with offset " +
                       std::to_string(label_offset) + " outside memory of " +
                       std::to_string(n_classes) + " classes");
    }
  }

  const Eigen::MatrixXd logits =
      features * umem.centers.transpose() / temperature;
  const Eigen::MatrixXd probs = softmax_rows(logits);

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int cls = label_offset + labels[static_cast<std::size_t>(i)];
    const double row_max = logits.row(i).maxCoeff();
    const double lse =
        row_max + std::log((logits.row(i).array() - row_max).exp().sum());
    sum += lse - logits(i, cls);
    // d/dF_i of (lse - z_y) = (p - onehot_y) . M / t
    Eigen::RowVectorXd g_z = probs.row(i);
    g_z(cls) -= 1.0;
    res.grad.row(i) =
        g_z * umem.centers / (temperature * static_cast<double>(n));
  }
  res.value = sum / static_cast<double>(n);
  return res;
}

double dsal_total(const DsalTerms& t) {
  return t.discriminator + t.generator + t.source_visible + t.source_infrared +
         t.source_cross + t.target_visible + t.target_infrared;
}

Eigen::MatrixXd holistic_distribution(const Eigen::MatrixXd& features,
                                      const UnifiedMemory& ref, double tau) {
  if (!(tau > 0.0)) throw ParameterError("tau must be > 0");
  if (features.cols() != ref.centers.cols()) {
    throw ShapeError("feature dimension does not match reference memory");
  }
  return softmax_rows(features * ref.centers.transpose() / tau);
}

double cmcc_confidence(const Eigen::VectorXd& h_v_center,
                       const Eigen::VectorXd& h_i_center) {
  return cosine_similarity_matrix(h_v_center.transpose(),
                                  h_i_center.transpose())(0, 0);
}

namespace {

struct IdentitySide {
  std::vector<int> rows;        // sample indices of this identity
  Eigen::MatrixXd dist;         // per-sample holistic distributions
  Eigen::RowVectorXd center;    // mean distribution
};

IdentitySide gather_side(const Eigen::MatrixXd& all_dist,
                         const std::vector<int>& labels, int identity) {
  IdentitySide side;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == identity) side.rows.push_back(static_cast<int>(i));
  }
  side.dist.resize(static_cast<Eigen::Index>(side.rows.size()), all_dist.cols());
  for (std::size_t i = 0; i < side.rows.size(); ++i) {
    side.dist.row(static_cast<Eigen::Index>(i)) = all_dist.row(side.rows[i]);
  }
  if (!side.rows.empty()) side.center = side.dist.colwise().mean();
  return side;
}

}  // namespace

CmccResult cmcc_loss(const Eigen::MatrixXd& features_v,
                     const std::vector<int>& labels_v,
                     const Eigen::MatrixXd& features_i,
                     const std::vector<int>& labels_i, const UnifiedMemory& ref,
                     double tau, CmccKlMode mode,
                     const std::vector<double>* fixed_confidence) {
  if (labels_v.size() != static_cast<std::size_t>(features_v.rows()) ||
      labels_i.size() != static_cast<std::size_t>(features_i.rows())) {
    throw ShapeError("label count does not match feature rows");
  }
  CmccResult res;
  res.grad_visible = Eigen::MatrixXd::Zero(features_v.rows(), features_v.cols());
  res.grad_infrared = Eigen::MatrixXd::Zero(features_i.rows(), features_i.cols());

  int n_ids = 0;
  for (int l : labels_v) n_ids = std::max(n_ids, l + 1);
  for (int l : labels_i) n_ids = std::max(n_ids, l + 1);
  if (n_ids == 0) return res;
  if (fixed_confidence &&
      fixed_confidence->size() != static_cast<std::size_t>(n_ids)) {
    throw ShapeError("fixed confidence count does not match identity count");
  }

  const Eigen::MatrixXd dist_v = holistic_distribution(features_v, ref, tau);
  const Eigen::MatrixXd dist_i = holistic_distribution(features_i, ref, tau);

  double total = 0.0;
  for (int id = 0; id < n_ids; ++id) {
    const IdentitySide v = gather_side(dist_v, labels_v, id);
    const IdentitySide i = gather_side(dist_i, labels_i, id);
    if (v.rows.empty() || i.rows.empty()) throw ModalityGapError(id);

    // confidence weight, treated as a constant (stop-gradient)
    const double weight =
        fixed_confidence
            ? (*fixed_confidence)[static_cast<std::size_t>(id)]
            : cmcc_confidence(v.center.transpose(), i.center.transpose());
    res.confidence.push_back(weight);

    if (weight == 0.0) {
      // one-hot disjoint centers: weighted term defined as zero
      res.kl.push_back(0.0);
      continue;
    }

    const double n_v = static_cast<double>(v.rows.size());
    const double n_i = static_cast<double>(i.rows.size());
    const double scale = weight / static_cast<double>(n_ids);
    double kl = 0.0;

    if (mode == CmccKlMode::center_to_center) {
      const Eigen::ArrayXd p = v.center.transpose().array();
      const Eigen::ArrayXd q = i.center.transpose().array();
      kl = (p * (p.log() - q.log())).sum();
      // dKL/dp = log(p/q) + 1, dKL/dq = -p/q; centers are sample means
      const Eigen::RowVectorXd g_p =
          ((p.log() - q.log()) + 1.0).matrix().transpose();
      const Eigen::RowVectorXd g_q = (-(p / q)).matrix().transpose();
      for (std::size_t a = 0; a < v.rows.size(); ++a) {
        const Eigen::RowVectorXd g_z = softmax_backward(
            v.dist.row(static_cast<Eigen::Index>(a)), g_p * (scale / n_v));
        res.grad_visible.row(v.rows[a]) += g_z * ref.centers / tau;
      }
      for (std::size_t b = 0; b < i.rows.size(); ++b) {
        const Eigen::RowVectorXd g_z = softmax_backward(
            i.dist.row(static_cast<Eigen::Index>(b)), g_q * (scale / n_i));
        res.grad_infrared.row(i.rows[b]) += g_z * ref.centers / tau;
      }
    } else {
      // mean KL over all sample pairs of the identity
      const Eigen::MatrixXd log_v = v.dist.array().log().matrix();
      const Eigen::MatrixXd log_i = i.dist.array().log().matrix();
      const Eigen::RowVectorXd sum_log_i = log_i.colwise().sum();
      const Eigen::RowVectorXd sum_p = v.dist.colwise().sum();
      for (std::size_t a = 0; a < v.rows.size(); ++a) {
        const Eigen::ArrayXd p = v.dist.row(static_cast<Eigen::Index>(a)).transpose().array();
        for (std::size_t b = 0; b < i.rows.size(); ++b) {
          const Eigen::ArrayXd q = i.dist.row(static_cast<Eigen::Index>(b)).transpose().array();
          kl += (p * (p.log() - q.log())).sum();
        }
      }
      kl /= n_v * n_i;
      const double pair_scale = scale / (n_v * n_i);
      for (std::size_t a = 0; a < v.rows.size(); ++a) {
        // sum over b of (log p_a - log q_b + 1)
        const Eigen::RowVectorXd g_p =
            n_i * (log_v.row(static_cast<Eigen::Index>(a)).array() + 1.0).matrix() -
            sum_log_i;
        const Eigen::RowVectorXd g_z = softmax_backward(
            v.dist.row(static_cast<Eigen::Index>(a)), g_p * pair_scale);
        res.grad_visible.row(v.rows[a]) += g_z * ref.centers / tau;
      }
      for (std::size_t b = 0; b < i.rows.size(); ++b) {
        const Eigen::RowVectorXd g_q =
            -(sum_p.array() / i.dist.row(static_cast<Eigen::Index>(b)).array())
                 .matrix();
        const Eigen::RowVectorXd g_z = softmax_backward(
            i.dist.row(static_cast<Eigen::Index>(b)), g_q * pair_scale);
        res.grad_infrared.row(i.rows[b]) += g_z * ref.centers / tau;
      }
    }

    res.kl.push_back(kl);
    total += weight * kl;
  }

  res.value = total / static_cast<double>(n_ids);
  return res;
}

CmccResult cmcc_loss(const EmbeddingSet& target_v, const EmbeddingSet& target_i,
                     const std::vector<int>& labels_v,
                     const std::vector<int>& labels_i, const UnifiedMemory& ref,
                     double tau, CmccKlMode mode) {
  return cmcc_loss(target_v.data, labels_v, target_i.data, labels_i, ref, tau,
                   mode, nullptr);
}

double final_loss(double dsal, double cmcc, double psi, bool cmcc_active) {
  if (!(psi >= 0.0)) throw ParameterError("psi must be >= 0");
  return cmcc_active ? dsal + psi * cmcc : dsal;
}

}  // namespace dslga
