#pragma once

// dslga/gradcheck.hpp
//
// Finite-difference verification suite for every loss gradient. Randomized
// per seed; an instance fails when the relative error between the analytic
// gradient and central differences exceeds the loss's tolerance.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dslga {

struct GradCheckReport {
  std::string name;
  int trials = 0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// rel = |a - f|_F / (|a|_F + |f|_F), zero when both norms vanish.
double gradient_rel_err(const Eigen::MatrixXd& analytic,
                        const Eigen::MatrixXd& finite_diff);

std::vector<GradCheckReport> run_gradient_checks(std::uint64_t seed,
                                                 int trials_per_loss);

bool all_passed(const std::vector<GradCheckReport>& reports);

}  // namespace dslga
