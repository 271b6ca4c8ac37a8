#include "dslga/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dslga/losses.hpp"
#include "dslga/matrix_ops.hpp"
#include "dslga/rng.hpp"

namespace dslga {

double gradient_rel_err(const Eigen::MatrixXd& analytic,
                        const Eigen::MatrixXd& finite_diff) {
  const double diff = (analytic - finite_diff).norm();
  const double denom = analytic.norm() + finite_diff.norm();
  if (denom < 1e-10) return 0.0;
  return diff / denom;
}

namespace {

constexpr double kStep = 1e-6;

Eigen::MatrixXd random_unit_rows(SplitRng& rng, int n, int d) {
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
  }
  return l2_normalize(m);
}

GradCheckReport check_discriminator(SplitRng rng, int trials) {
  GradCheckReport rep{"discriminator", trials, 0.0, 1e-5, false};
  for (int t = 0; t < trials; ++t) {
    const int n = 3 + static_cast<int>(rng.next_u64() % 10);
    Eigen::MatrixXd probs(n, 1);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      probs(i, 0) = 0.05 + 0.9 * rng.next_double();
      labels.push_back(static_cast<int>(rng.next_u64() % 2));
    }
    const LossResult res = discriminator_loss(probs.col(0), labels);
    const Eigen::MatrixXd fd = finite_difference_gradient(
        [&](const Eigen::MatrixXd& x) {
          return discriminator_loss(x.col(0), labels).value;
        },
        probs, kStep);
    rep.max_rel_err = std::max(rep.max_rel_err, gradient_rel_err(res.grad, fd));
  }
  rep.passed = rep.max_rel_err < rep.tolerance;
  return rep;
}

GradCheckReport check_generator(SplitRng rng, int trials) {
  GradCheckReport rep{"generator", trials, 0.0, 1e-5, false};
  for (int t = 0; t < trials; ++t) {
    const int n = 3 + static_cast<int>(rng.next_u64() % 10);
    Eigen::MatrixXd probs(n, 1);
    for (int i = 0; i < n; ++i) probs(i, 0) = rng.next_double();
    const LossResult res = generator_adversarial_loss(probs.col(0));
    const Eigen::MatrixXd fd = finite_difference_gradient(
        [&](const Eigen::MatrixXd& x) {
          return generator_adversarial_loss(x.col(0)).value;
        },
        probs, kStep);
    rep.max_rel_err = std::max(rep.max_rel_err, gradient_rel_err(res.grad, fd));
  }
  rep.passed = rep.max_rel_err < rep.tolerance;
  return rep;
}

GradCheckReport check_contrastive(SplitRng rng, int trials) {
  GradCheckReport rep{"contrastive", trials, 0.0, 1e-5, false};
  for (int t = 0; t < trials; ++t) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 7);
    const int d = 3 + static_cast<int>(rng.next_u64() % 6);
    const int c_total = 3 + static_cast<int>(rng.next_u64() % 8);
    const int offset = static_cast<int>(rng.next_u64() %
                                        static_cast<std::uint64_t>(c_total));
    const int n_labels = c_total - offset;
    const Eigen::MatrixXd features = random_unit_rows(rng, n, d);
    UnifiedMemory umem{random_unit_rows(rng, c_total, d), offset};
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      labels.push_back(static_cast<int>(rng.next_u64() %
                                        static_cast<std::uint64_t>(n_labels)));
    }
    const double temp = 0.5 + rng.next_double() * 1.5;
    const LossResult res =
        memory_contrastive_loss(features, labels, umem, offset, temp);
    const Eigen::MatrixXd fd = finite_difference_gradient(
        [&](const Eigen::MatrixXd& x) {
          return memory_contrastive_loss(x, labels, umem, offset, temp).value;
        },
        features, kStep);
    rep.max_rel_err = std::max(rep.max_rel_err, gradient_rel_err(res.grad, fd));
  }
  rep.passed = rep.max_rel_err < rep.tolerance;
  return rep;
}

GradCheckReport check_cmcc(SplitRng rng, int trials) {
  GradCheckReport rep{"cmcc", trials, 0.0, 1e-4, false};
  for (int t = 0; t < trials; ++t) {
    const int n_ids = 2 + static_cast<int>(rng.next_u64() % 3);
    const int per_side = 2 + static_cast<int>(rng.next_u64() % 3);
    const int d = 4 + static_cast<int>(rng.next_u64() % 5);
    const int c_ref = 2 * n_ids + 2 + static_cast<int>(rng.next_u64() % 5);
    const double tau = 0.05 + 0.45 * rng.next_double();
    const CmccKlMode mode = (t % 2 == 0) ? CmccKlMode::center_to_center
                                         : CmccKlMode::pairwise_mean;

    const int n = n_ids * per_side;
    const Eigen::MatrixXd fv = random_unit_rows(rng, n, d);
    const Eigen::MatrixXd fi = random_unit_rows(rng, n, d);
    UnifiedMemory ref{random_unit_rows(rng, c_ref, d), c_ref / 2};
    std::vector<int> labels;
    for (int id = 0; id < n_ids; ++id) {
      for (int s = 0; s < per_side; ++s) labels.push_back(id);
    }

    const CmccResult res = cmcc_loss(fv, labels, fi, labels, ref, tau, mode);
    // the confidence weight is stop-gradient, so the probed function
    // pins the weights of the unperturbed instance
    const std::vector<double>& w = res.confidence;
    const Eigen::MatrixXd fd_v = finite_difference_gradient(
        [&](const Eigen::MatrixXd& x) {
          return cmcc_loss(x, labels, fi, labels, ref, tau, mode, &w).value;
        },
        fv, kStep);
    const Eigen::MatrixXd fd_i = finite_difference_gradient(
        [&](const Eigen::MatrixXd& x) {
          return cmcc_loss(fv, labels, x, labels, ref, tau, mode, &w).value;
        },
        fi, kStep);
    rep.max_rel_err =
        std::max({rep.max_rel_err, gradient_rel_err(res.grad_visible, fd_v),
                  gradient_rel_err(res.grad_infrared, fd_i)});
  }
  rep.passed = rep.max_rel_err < rep.tolerance;
  return rep;
}

}  // namespace

std::vector<GradCheckReport> run_gradient_checks(std::uint64_t seed,
                                                 int trials_per_loss) {
  const SplitRng root(seed);
  std::vector<GradCheckReport> reports;
  reports.push_back(check_discriminator(root.split("discriminator"), trials_per_loss));
  reports.push_back(check_generator(root.split("generator"), trials_per_loss));
  reports.push_back(check_contrastive(root.split("contrastive"), trials_per_loss));
  reports.push_back(check_cmcc(root.split("cmcc"), trials_per_loss));
  return reports;
}

bool all_passed(const std::vector<GradCheckReport>& reports) {
  for (const auto& r : reports) {
    if (!r.passed) return false;
  }
  return true;
}

}  // namespace dslga
