#include "dslga/memory.hpp"

#include <vector>

#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"

namespace dslga {

Eigen::RowVectorXd identity_center(const EmbeddingSet& set, int identity) {
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(set.dim());
  int count = 0;
  for (int i = 0; i < set.n(); ++i) {
    if (set.label[static_cast<std::size_t>(i)] == identity) {
      sum += set.data.row(i);
      ++count;
    }
  }
  if (count == 0) throw EmptyIdentityError(identity);
  return sum / count;
}

CenterMemory memory_init(const Eigen::MatrixXd& features,
                         const std::vector<int>& labels, int identity_count,
                         double update_rate) {
  if (identity_count < 0) throw ParameterError("identity count must be >= 0");
  if (labels.size() != static_cast<std::size_t>(features.rows())) {
    throw ShapeError("label count does not match feature rows");
  }
  CenterMemory mem;
  mem.update_rate = update_rate;
  mem.centers = Eigen::MatrixXd::Zero(identity_count, features.cols());
  std::vector<int> counts(static_cast<std::size_t>(identity_count), 0);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l == -1) continue;
    if (l < 0 || l >= identity_count) {
      throw LabelError("label " + std::to_string(l) + " outside [0, " +
                       std::to_string(identity_count) + ")");
    }
    mem.centers.row(l) += features.row(i);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < identity_count; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) throw EmptyIdentityError(c);
    mem.centers.row(c) /= counts[static_cast<std::size_t>(c)];
  }
  return mem;
}

CenterMemory memory_init(const EmbeddingSet& set, int identity_count,
                         double update_rate) {
  return memory_init(set.data, set.label, identity_count, update_rate);
}

CenterMemory memory_update(const CenterMemory& memory,
                           const Eigen::MatrixXd& fresh_centers, double alpha) {
  if (memory.centers.rows() != fresh_centers.rows() ||
      memory.centers.cols() != fresh_centers.cols()) {
    throw ShapeError("fresh centers shape does not match memory");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("update rate must lie in [0, 1]");
  }
  CenterMemory out;
  out.update_rate = memory.update_rate;
  out.centers = alpha * memory.centers + (1.0 - alpha) * fresh_centers;
  return out;
}

CenterMemory renormalized(const CenterMemory& memory) {
  CenterMemory out;
  out.update_rate = memory.update_rate;
  out.centers = memory.size() == 0 ? memory.centers
                                   : l2_normalize(memory.centers);
  return out;
}

CenterMemory merged(const CenterMemory& first, const CenterMemory& second) {
  if (first.size() > 0 && second.size() > 0 && first.dim() != second.dim()) {
    throw ShapeError("memory dimensions differ");
  }
  CenterMemory out;
  out.update_rate = first.update_rate;
  const int dim = first.size() > 0 ? first.dim() : second.dim();
  out.centers.resize(first.size() + second.size(), dim);
  if (first.size() > 0) out.centers.topRows(first.size()) = first.centers;
  if (second.size() > 0) out.centers.bottomRows(second.size()) = second.centers;
  return out;
}

}  // namespace dslga
