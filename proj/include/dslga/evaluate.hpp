#pragma once

// dslga/evaluate.hpp
//
// Retrieval metrics over labeled query/gallery sets: CMC at requested
// ranks, mean average precision, and mean inverse negative penalty.
// Ranking is by cosine similarity, descending, gallery index ascending
// on ties. Gallery entries sharing both camera and identity with the
// query are excluded per the standard protocol.

#include <string>
#include <vector>

#include "dslga/types.hpp"

namespace dslga {

struct RetrievalMetrics {
  std::vector<std::pair<int, double>> cmc;  // (rank, accuracy)
  double mean_ap = 0.0;
  double mean_inp = 0.0;
  int n_queries = 0;
  int n_evaluated = 0;
  int n_skipped = 0;  // queries with no true match in the gallery

  std::string to_text() const;  // fixed-order tab-delimited rows
};

RetrievalMetrics evaluate_retrieval(const EmbeddingSet& query,
                                    const EmbeddingSet& gallery,
                                    const std::vector<int>& ranks);

}  // namespace dslga
