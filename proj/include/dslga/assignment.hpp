#pragma once

// dslga/assignment.hpp
//
// Minimum-cost linear assignment on rectangular matrices: a partial
// bijection of size min(P, Q) matching every index of the smaller side.

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace dslga {

struct Assignment {
  // (row, col) pairs, ascending by row. For cluster matching rows are
  // visible clusters and cols infrared clusters.
  std::vector<std::pair<int, int>> pairs;
  double total_cost = 0.0;
  std::vector<int> unmatched_visible;   // rows without a partner
  std::vector<int> unmatched_infrared;  // cols without a partner
};

// Shortest-augmenting-path solver (Jonker-Volgenant style), O(n^2 m) with
// n = min(P,Q). Throws CostMatrixError on non-finite entries.
Assignment hungarian(const Eigen::MatrixXd& cost);

}  // namespace dslga
