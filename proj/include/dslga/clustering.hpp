#pragma once

// dslga/clustering.hpp
//
// DBSCAN over cosine distance plus the dual-epsilon refinement (CRMR)
// that keeps only samples landing in mutually consistent clusters at
// both radii. Refined clusters drive pseudo-label assignment.

#include <Eigen/Dense>
#include <vector>

namespace dslga {

struct ClusterSet {
  std::vector<std::vector<int>> clusters;  // member indices, ascending
  std::vector<int> noise;                  // ascending
  int n_samples = 0;

  int size() const { return static_cast<int>(clusters.size()); }

  // Per-sample cluster index, -1 for noise.
  std::vector<int> labels() const;
};

// Density clustering with distance = 1 - cosine. Neighborhoods are closed
// balls (d <= eps) and include the point itself, so min_pts counts the
// point too. Border points attach to the lowest-index core point that
// reaches them; cluster order follows the lowest-index core overall.
// N = 0 yields an empty ClusterSet.
ClusterSet dbscan(const Eigen::MatrixXd& features, double eps, int min_pts);

// Mean of member rows per cluster, renormalized to unit length.
Eigen::MatrixXd cluster_centroids(const ClusterSet& cs,
                                  const Eigen::MatrixXd& features);

struct CrmrResult {
  ClusterSet refined;
  std::vector<int> labels;  // dense 0..K-1, or -1
  int clusters_eps1 = 0;
  int clusters_eps2 = 0;
  int dropped_empty = 0;  // eps1 clusters whose intersection came out empty
  int dropped_small = 0;  // refined clusters below min_cluster_size
};

// Dual-epsilon refinement: cluster at eps1 and eps2 (eps1 > eps2), pair
// each eps1 cluster with the most similar eps2 centroid (ties -> lowest
// eps2 index), keep the set intersection. Surviving clusters are densely
// re-labeled in eps1 cluster order; everything else gets -1.
CrmrResult crmr_refine(const Eigen::MatrixXd& features, double eps1,
                       double eps2, int min_pts, int min_cluster_size = 1);

}  // namespace dslga
