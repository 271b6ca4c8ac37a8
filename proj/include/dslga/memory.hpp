#pragma once

// dslga/memory.hpp
//
// Per-identity feature center banks. A CenterMemory holds one row per
// identity; rows are refreshed with an exponential moving average
// (new = alpha*old + (1-alpha)*fresh). Values are immutable snapshots:
// updates return a new memory.

#include <Eigen/Dense>
#include <vector>

#include "dslga/types.hpp"

namespace dslga {

struct CenterMemory {
  Eigen::MatrixXd centers;  // C×D
  double update_rate = 0.5;

  int size() const { return static_cast<int>(centers.rows()); }
  int dim() const { return static_cast<int>(centers.cols()); }
};

// Arithmetic mean of all rows labeled `identity`.
// Throws EmptyIdentityError when no row carries the label.
Eigen::RowVectorXd identity_center(const EmbeddingSet& set, int identity);

// One center per identity 0..identity_count-1; rows labeled -1 are ignored.
CenterMemory memory_init(const EmbeddingSet& set, int identity_count,
                         double update_rate = 0.5);
CenterMemory memory_init(const Eigen::MatrixXd& features,
                         const std::vector<int>& labels, int identity_count,
                         double update_rate = 0.5);

// row c = alpha*old_c + (1-alpha)*fresh_c. Pure EMA, no renormalization;
// callers working in cosine space renormalize afterwards.
CenterMemory memory_update(const CenterMemory& memory,
                           const Eigen::MatrixXd& fresh_centers, double alpha);

// Copy with unit-norm rows.
CenterMemory renormalized(const CenterMemory& memory);

// Row-wise concatenation, first on top. Shapes must agree (empty allowed).
CenterMemory merged(const CenterMemory& first, const CenterMemory& second);

}  // namespace dslga
