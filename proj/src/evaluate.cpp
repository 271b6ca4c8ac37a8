#include "dslga/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"

namespace dslga {

std::string RetrievalMetrics::to_text() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [rank, value] : cmc) {
    out << "cmc@" << rank << "\t" << value << "\n";
  }
  out << "mAP\t" << mean_ap << "\n";
  out << "mINP\t" << mean_inp << "\n";
  out << "queries\t" << n_queries << "\n";
  out << "evaluated\t" << n_evaluated << "\n";
  out << "skipped\t" << n_skipped << "\n";
  return out.str();
}

RetrievalMetrics evaluate_retrieval(const EmbeddingSet& query,
                                    const EmbeddingSet& gallery,
                                    const std::vector<int>& ranks) {
  query.check_consistent();
  gallery.check_consistent();
  if (query.camera_id.empty() || gallery.camera_id.empty()) {
    throw ShapeError("retrieval evaluation needs camera ids");
  }
  for (int r : ranks) {
    if (r < 1) throw ParameterError("ranks must be >= 1");
  }

  RetrievalMetrics metrics;
  metrics.n_queries = query.n();
  metrics.cmc.reserve(ranks.size());

  const Eigen::MatrixXd sim = cosine_similarity_matrix(query.data, gallery.data);

  std::vector<double> cmc_hits(ranks.size(), 0.0);
  double ap_sum = 0.0;
  double inp_sum = 0.0;

  std::vector<int> order;
  for (int q = 0; q < query.n(); ++q) {
    const int q_label = query.label[static_cast<std::size_t>(q)];
    const int q_cam = query.camera_id[static_cast<std::size_t>(q)];

    order.clear();
    for (int g = 0; g < gallery.n(); ++g) {
      // same-camera same-identity entries are invisible to this query
      if (gallery.label[static_cast<std::size_t>(g)] == q_label &&
          gallery.camera_id[static_cast<std::size_t>(g)] == q_cam) {
        continue;
      }
      order.push_back(g);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (sim(q, a) != sim(q, b)) return sim(q, a) > sim(q, b);
      return a < b;
    });

    int n_matches = 0;
    for (int g : order) {
      if (gallery.label[static_cast<std::size_t>(g)] == q_label) ++n_matches;
    }
    if (n_matches == 0) {
      ++metrics.n_skipped;
      continue;
    }
    ++metrics.n_evaluated;

    int seen_matches = 0;
    int last_match_rank = 0;
    double ap = 0.0;
    int first_match_rank = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const int g = order[pos];
      if (gallery.label[static_cast<std::size_t>(g)] != q_label) continue;
      ++seen_matches;
      const int rank = static_cast<int>(pos) + 1;
      if (first_match_rank == 0) first_match_rank = rank;
      ap += static_cast<double>(seen_matches) / rank;
      last_match_rank = rank;
      if (seen_matches == n_matches) break;
    }
    ap_sum += ap / n_matches;
    inp_sum += static_cast<double>(n_matches) / last_match_rank;
    for (std::size_t r = 0; r < ranks.size(); ++r) {
      if (first_match_rank <= ranks[r]) cmc_hits[r] += 1.0;
    }
  }

  const double denom = std::max(1, metrics.n_evaluated);
  for (std::size_t r = 0; r < ranks.size(); ++r) {
    metrics.cmc.emplace_back(ranks[r], cmc_hits[r] / denom);
  }
  metrics.mean_ap = ap_sum / denom;
  metrics.mean_inp = inp_sum / denom;
  return metrics;
}

}  // namespace dslga
