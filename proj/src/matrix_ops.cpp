#include "dslga/matrix_ops.hpp"

#include <cmath>

#include "dslga/errors.hpp"

namespace dslga {

namespace {
constexpr double kZeroNormTol = 1e-300;
}

Eigen::MatrixXd l2_normalize(const Eigen::MatrixXd& features) {
  Eigen::MatrixXd out(features.rows(), features.cols());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double norm = features.row(i).norm();
    if (!(norm > kZeroNormTol)) throw ZeroVectorError(static_cast<int>(i));
    out.row(i) = features.row(i) / norm;
  }
  return out;
}

Eigen::MatrixXd cosine_similarity_matrix(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd na = l2_normalize(a);
  const Eigen::MatrixXd nb = l2_normalize(b);
  Eigen::MatrixXd sim = na * nb.transpose();
  // products of unit rows can leak past [-1,1] by an ulp
  return sim.cwiseMin(1.0).cwiseMax(-1.0);
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double norm_a = a.norm();
  const double norm_b = b.norm();
  if (!(norm_a > kZeroNormTol)) throw ZeroVectorError(0);
  if (!(norm_b > kZeroNormTol)) throw ZeroVectorError(0);
  const double sim = a.dot(b) / (norm_a * norm_b);
  return std::min(1.0, std::max(-1.0, sim));
}

}  // namespace dslga
