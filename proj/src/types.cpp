#include "dslga/types.hpp"

#include <algorithm>

#include "dslga/errors.hpp"

namespace dslga {

const char* to_string(Domain d) {
  return d == Domain::source ? "source" : "target";
}

const char* to_string(Modality m) {
  return m == Modality::visible ? "visible" : "infrared";
}

void EmbeddingSet::check_consistent() const {
  const std::size_t n_rows = static_cast<std::size_t>(data.rows());
  if (domain.size() != n_rows || modality.size() != n_rows ||
      label.size() != n_rows) {
    throw ShapeError("embedding metadata length does not match row count");
  }
  if (!sample_id.empty() && sample_id.size() != n_rows) {
    throw ShapeError("sample_id length does not match row count");
  }
  if (!camera_id.empty() && camera_id.size() != n_rows) {
    throw ShapeError("camera_id length does not match row count");
  }
}

EmbeddingSet select_rows(const EmbeddingSet& set, const std::vector<int>& rows) {
  EmbeddingSet out;
  out.data.resize(static_cast<Eigen::Index>(rows.size()), set.data.cols());
  out.domain.reserve(rows.size());
  out.modality.reserve(rows.size());
  out.label.reserve(rows.size());
  const bool has_ids = !set.sample_id.empty();
  const bool has_cams = !set.camera_id.empty();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    out.data.row(static_cast<Eigen::Index>(i)) = set.data.row(r);
    out.domain.push_back(set.domain[r]);
    out.modality.push_back(set.modality[r]);
    out.label.push_back(set.label[r]);
    if (has_ids) out.sample_id.push_back(set.sample_id[r]);
    if (has_cams) out.camera_id.push_back(set.camera_id[r]);
  }
  return out;
}

std::vector<int> rows_with_modality(const EmbeddingSet& set, Modality m) {
  std::vector<int> rows;
  for (int i = 0; i < set.n(); ++i) {
    if (set.modality[static_cast<std::size_t>(i)] == m) rows.push_back(i);
  }
  return rows;
}

int identity_count(const std::vector<int>& labels) {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  return max_label + 1;
}

}  // namespace dslga
