#pragma once

// dslga/matrix_ops.hpp
//
// Normalization and similarity kernels. All angles live in cosine space:
// features are L2-normalized once at ingestion and similarities are plain
// dot products of unit rows.

#include <Eigen/Dense>

namespace dslga {

// Row-wise L2 normalization. Throws ZeroVectorError on a zero-norm row.
Eigen::MatrixXd l2_normalize(const Eigen::MatrixXd& features);

// entry (p,q) = A_p·B_q / (|A_p||B_q|), clamped to [-1, 1].
// Throws ZeroVectorError on a zero row (row index reported per input).
Eigen::MatrixXd cosine_similarity_matrix(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b);

// Scalar cosine of two vectors; ZeroVectorError if either is zero.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace dslga
