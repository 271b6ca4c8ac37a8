#pragma once

// dslga/losses.hpp
//
// Adversarial (DSAL) and consistency (CMCC) loss terms. Every term
// returns its value together with the analytic gradient with respect to
// the input features; memories are treated as constants. Gradients are
// verified against central finite differences in the test suite and by
// the `gradcheck` CLI command.

#include <Eigen/Dense>
#include <vector>

#include "dslga/errors.hpp"
#include "dslga/memory.hpp"
#include "dslga/types.hpp"

namespace dslga {

struct LossResult {
  double value = 0.0;
  Eigen::MatrixXd grad;  // same shape as the differentiated input
};

// Binary cross-entropy of domain predictions. probs must lie strictly
// inside (0,1); clamping is the caller's job. domain_labels in {0,1};
// the convention is 1 = target domain.
LossResult discriminator_loss(const Eigen::VectorXd& probs,
                              const std::vector<int>& domain_labels);

// Mean squared deviation from 0.5, pushing predictions toward maximal
// discriminator confusion.
LossResult generator_adversarial_loss(const Eigen::VectorXd& probs);

struct UnifiedMemory {
  Eigen::MatrixXd centers;  // (C_a + C_b) x D
  int offset = 0;           // = C_a
};

// Row-wise concatenation of two center banks; offset marks where the
// second bank starts. ShapeError on dimension mismatch.
UnifiedMemory unified_memory(const CenterMemory& first,
                             const CenterMemory& second);

// Mean over samples of -log softmax(F_n . M^T / t) at class
// labels[n] + label_offset. Gradient w.r.t. features; memory constant.
LossResult memory_contrastive_loss(const Eigen::MatrixXd& features,
                                   const std::vector<int>& labels,
                                   const UnifiedMemory& umem, int label_offset,
                                   double temperature);

struct DsalTerms {
  double discriminator = 0.0;
  double generator = 0.0;
  double source_visible = 0.0;
  double source_infrared = 0.0;
  double source_cross = 0.0;
  double target_visible = 0.0;
  double target_infrared = 0.0;
};

double dsal_total(const DsalTerms& terms);

// row n = softmax(F_n . M_ref^T / tau); rows sum to 1 and are strictly
// positive. ParameterError when tau <= 0.
Eigen::MatrixXd holistic_distribution(const Eigen::MatrixXd& features,
                                      const UnifiedMemory& ref, double tau);

// Cosine similarity of two center distributions; the confidence weight
// of one matched pair.
double cmcc_confidence(const Eigen::VectorXd& h_v_center,
                       const Eigen::VectorXd& h_i_center);

enum class CmccKlMode {
  center_to_center,  // KL between per-identity mean distributions
  pairwise_mean,     // mean KL over all visible/infrared sample pairs
};

struct CmccResult {
  double value = 0.0;
  Eigen::MatrixXd grad_visible;
  Eigen::MatrixXd grad_infrared;
  std::vector<double> confidence;  // per joint identity
  std::vector<double> kl;          // per joint identity (unweighted)
};

// Confidence-weighted KL between the holistic distributions of each
// joint identity's visible and infrared sides, averaged over identities.
// The confidence weight is stop-gradient. Throws ModalityGapError when a
// joint identity lacks samples on one side.
//
// fixed_confidence pins the per-identity weights instead of recomputing
// them; the finite-difference harness uses it to probe the same function
// the analytic gradient differentiates.
CmccResult cmcc_loss(const Eigen::MatrixXd& features_v,
                     const std::vector<int>& labels_v,
                     const Eigen::MatrixXd& features_i,
                     const std::vector<int>& labels_i,
                     const UnifiedMemory& ref, double tau,
                     CmccKlMode mode = CmccKlMode::center_to_center,
                     const std::vector<double>* fixed_confidence = nullptr);
CmccResult cmcc_loss(const EmbeddingSet& target_v, const EmbeddingSet& target_i,
                     const std::vector<int>& labels_v,
                     const std::vector<int>& labels_i, const UnifiedMemory& ref,
                     double tau, CmccKlMode mode = CmccKlMode::center_to_center);

// dsal + psi*cmcc while the consistency term is active, else dsal.
double final_loss(double dsal, double cmcc, double psi, bool cmcc_active);

// Central differences (f(x+h e) - f(x-h e)) / 2h per entry.
template <typename F>
Eigen::MatrixXd finite_difference_gradient(F&& f, const Eigen::MatrixXd& x,
                                           double h) {
  if (!(h > 0.0)) throw ParameterError("step size must be > 0");
  Eigen::MatrixXd grad(x.rows(), x.cols());
  Eigen::MatrixXd probe = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + h;
      const double up = f(probe);
      probe(i, j) = saved - h;
      const double down = f(probe);
      probe(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace dslga
