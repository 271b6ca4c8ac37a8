#pragma once

// dslga/io.hpp
//
// On-disk formats.
//
// Embedding file (binary):
//   magic "EMB1" | version u32 | n u32 | d u32 | n*d float32, row-major
//   all integers and floats little-endian; payload exactly 4*n*d bytes.
//
// Metadata file (text): one CSV row per sample after the header
//   sample_id,domain,modality,label,camera_id
//   domain in {source,target}, modality in {visible,infrared},
//   label an integer or -1, camera_id an integer.
//
// Storage is 32-bit; computation everywhere else is 64-bit. All writes
// go through a temp file and rename.

#include <Eigen/Dense>
#include <string>

#include "dslga/types.hpp"

namespace dslga {

// Raw matrix payloads (used for feature banks and center memories).
void write_matrix(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd read_matrix(const std::string& path);

void write_metadata(const EmbeddingSet& set, const std::string& path);

// Paired read: row counts must agree. Throws RowCountMismatchError
// otherwise, and the format errors of errors.hpp on malformed files.
EmbeddingSet read_embeddings(const std::string& embedding_path,
                             const std::string& metadata_path);
void write_embeddings(const EmbeddingSet& set,
                      const std::string& embedding_path,
                      const std::string& metadata_path);

// Whole-file text write with the same atomicity rule.
void write_text_file(const std::string& text, const std::string& path);

}  // namespace dslga
