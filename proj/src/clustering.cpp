#include "dslga/clustering.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "dslga/errors.hpp"
#include "dslga/matrix_ops.hpp"

namespace dslga {

std::vector<int> ClusterSet::labels() const {
  std::vector<int> out(static_cast<std::size_t>(n_samples), -1);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    for (int i : clusters[k]) out[static_cast<std::size_t>(i)] = static_cast<int>(k);
  }
  return out;
}

ClusterSet dbscan(const Eigen::MatrixXd& features, double eps, int min_pts) {
  if (!(eps > 0.0)) throw ParameterError("eps must be > 0");
  if (min_pts < 1) throw ParameterError("min_pts must be >= 1");

  const int n = static_cast<int>(features.rows());
  ClusterSet out;
  out.n_samples = n;
  if (n == 0) return out;

  const Eigen::MatrixXd sim = cosine_similarity_matrix(features, features);

  // neighbor lists under d = 1 - sim <= eps, self included, ascending
  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& ni = neighbors[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      if (1.0 - sim(i, j) <= eps) ni.push_back(j);
    }
  }

  std::vector<bool> core(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    core[static_cast<std::size_t>(i)] =
        static_cast<int>(neighbors[static_cast<std::size_t>(i)].size()) >= min_pts;
  }

  // expand clusters over core points, seeds in ascending order
  std::vector<int> cluster_of(static_cast<std::size_t>(n), -1);
  int next_cluster = 0;
  for (int seed = 0; seed < n; ++seed) {
    if (!core[static_cast<std::size_t>(seed)] ||
        cluster_of[static_cast<std::size_t>(seed)] != -1) {
      continue;
    }
    const int cid = next_cluster++;
    std::deque<int> frontier{seed};
    cluster_of[static_cast<std::size_t>(seed)] = cid;
    while (!frontier.empty()) {
      const int p = frontier.front();
      frontier.pop_front();
      for (int q : neighbors[static_cast<std::size_t>(p)]) {
        if (!core[static_cast<std::size_t>(q)]) continue;
        if (cluster_of[static_cast<std::size_t>(q)] == -1) {
          cluster_of[static_cast<std::size_t>(q)] = cid;
          frontier.push_back(q);
        }
      }
    }
  }

  // border points: lowest-index core point within eps claims them
  for (int i = 0; i < n; ++i) {
    if (core[static_cast<std::size_t>(i)]) continue;
    for (int q : neighbors[static_cast<std::size_t>(i)]) {
      if (core[static_cast<std::size_t>(q)]) {
        cluster_of[static_cast<std::size_t>(i)] =
            cluster_of[static_cast<std::size_t>(q)];
        break;  // neighbors ascending, first core is the lowest index
      }
    }
  }

  out.clusters.assign(static_cast<std::size_t>(next_cluster), {});
  for (int i = 0; i < n; ++i) {
    const int c = cluster_of[static_cast<std::size_t>(i)];
    if (c == -1) {
      out.noise.push_back(i);
    } else {
      out.clusters[static_cast<std::size_t>(c)].push_back(i);
    }
  }
  return out;
}

Eigen::MatrixXd cluster_centroids(const ClusterSet& cs,
                                  const Eigen::MatrixXd& features) {
  Eigen::MatrixXd centroids(cs.size(), features.cols());
  for (int k = 0; k < cs.size(); ++k) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(features.cols());
    const auto& members = cs.clusters[static_cast<std::size_t>(k)];
    for (int i : members) {
      if (i < 0 || i >= features.rows()) {
        throw ShapeError("cluster member index out of range");
      }
      sum += features.row(i);
    }
    centroids.row(k) = sum / static_cast<double>(members.size());
  }
  return centroids.rows() == 0 ? centroids : l2_normalize(centroids);
}

CrmrResult crmr_refine(const Eigen::MatrixXd& features, double eps1,
                       double eps2, int min_pts, int min_cluster_size) {
  if (!(eps1 > eps2)) throw ParameterError("eps1 must be > eps2");
  if (min_cluster_size < 1) throw ParameterError("min_cluster_size must be >= 1");

  const int n = static_cast<int>(features.rows());
  CrmrResult res;
  res.refined.n_samples = n;
  res.labels.assign(static_cast<std::size_t>(n), -1);

  const ClusterSet coarse = dbscan(features, eps1, min_pts);
  const ClusterSet fine = dbscan(features, eps2, min_pts);
  res.clusters_eps1 = coarse.size();
  res.clusters_eps2 = fine.size();
  if (coarse.size() == 0 || fine.size() == 0) {
    for (int i = 0; i < n; ++i) res.refined.noise.push_back(i);
    res.dropped_empty = coarse.size();
    return res;
  }

  const Eigen::MatrixXd centroids1 = cluster_centroids(coarse, features);
  const Eigen::MatrixXd centroids2 = cluster_centroids(fine, features);
  const Eigen::MatrixXd sim = cosine_similarity_matrix(centroids1, centroids2);
  const std::vector<int> fine_labels = fine.labels();

  for (int k = 0; k < coarse.size(); ++k) {
    // argmax similarity over eps2 centroids, ties -> lowest index
    int best_q = 0;
    for (int q = 1; q < fine.size(); ++q) {
      if (sim(k, q) > sim(k, best_q)) best_q = q;
    }
    std::vector<int> intersection;
    for (int i : coarse.clusters[static_cast<std::size_t>(k)]) {
      if (fine_labels[static_cast<std::size_t>(i)] == best_q) {
        intersection.push_back(i);
      }
    }
    if (intersection.empty()) {
      ++res.dropped_empty;
      continue;
    }
    if (static_cast<int>(intersection.size()) < min_cluster_size) {
      ++res.dropped_small;
      continue;
    }
    const int label = res.refined.size();
    for (int i : intersection) res.labels[static_cast<std::size_t>(i)] = label;
    res.refined.clusters.push_back(std::move(intersection));
  }

  for (int i = 0; i < n; ++i) {
    if (res.labels[static_cast<std::size_t>(i)] == -1) {
      res.refined.noise.push_back(i);
    }
  }
  return res;
}

}  // namespace dslga
