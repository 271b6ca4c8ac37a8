#pragma once

// dslga/types.hpp
//
// Embedding containers shared by every stage. Features live in an N×D
// matrix of doubles; per-row metadata (domain, modality, label, ids) is
// kept in parallel vectors. Label -1 marks unlabeled/discarded rows.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dslga {

enum class Domain : unsigned char { source, target };
enum class Modality : unsigned char { visible, infrared };

const char* to_string(Domain d);
const char* to_string(Modality m);

struct EmbeddingSet {
  Eigen::MatrixXd data;  // N×D
  std::vector<Domain> domain;
  std::vector<Modality> modality;
  std::vector<int> label;  // -1 = unlabeled / discarded
  std::vector<std::string> sample_id;
  std::vector<int> camera_id;

  int n() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }

  // Throws ShapeError if the metadata vectors disagree with data.rows().
  void check_consistent() const;
};

// Row subset, metadata carried along. Indices must be valid.
EmbeddingSet select_rows(const EmbeddingSet& set, const std::vector<int>& rows);

// Indices of rows with the given modality, ascending.
std::vector<int> rows_with_modality(const EmbeddingSet& set, Modality m);

// Largest label + 1, ignoring -1. Zero when nothing is labeled.
int identity_count(const std::vector<int>& labels);

}  // namespace dslga
