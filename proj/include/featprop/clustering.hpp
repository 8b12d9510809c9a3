#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "featprop/propagation.hpp"

namespace featprop {

struct ClusterResult {
  /// Node indices of medoids / centers, in center-rank order. Empty for K-Means.
  NodeSet centers;
  /// K-Means centroids, one per row. Empty for medoid and center methods.
  Matrix centroids;
  /// Cluster id (center rank) of every point; ties go to the lowest rank.
  std::vector<int> assignment;
  double objective = 0.0;

  /// K-Means only: sum of squared distances after each assignment step.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

struct KMeansOptions {
  int max_iter = 300;
  /// Convergence threshold on the largest centroid shift, relative to the
  /// RMS spread of the points around their mean.
  double tol = 1e-6;
  /// Independent k-means++ restarts; the run with the lowest final inertia
  /// wins (earliest on ties). Run 0 uses `seed` itself.
  int n_init = 10;
};

/// Lloyd's algorithm with k-means++ seeding, best of `n_init` restarts. `objective` is the mean
/// Euclidean point-to-centroid distance. Empty clusters are reseeded at the
/// point farthest from its assigned centroid.
/// Throws InfeasibleError when b exceeds the number of distinct points.
ClusterResult kmeans(const Matrix& points, int b, std::uint64_t seed,
                     const KMeansOptions& options = {});

/// Approximate K-Medoids: K-Means, then each centroid snaps to its nearest
/// node (lowest index on ties). A node already taken, or listed in
/// `excluded`, yields to the next-nearest free node. When b exceeds the
/// number of distinct rows, K-Means runs with the distinct count and the
/// remaining medoids are filled round-robin from the centroids' next-nearest
/// free nodes. `objective` is kmedoids_objective of the medoids.
ClusterResult kmedoids_approx(const Matrix& points, int b, std::uint64_t seed,
                              std::span<const NodeId> excluded = {},
                              const KMeansOptions& options = {});
inline ClusterResult kmedoids_approx(const PropagatedFeatures& p, int b, std::uint64_t seed) {
  return kmedoids_approx(p.matrix(), b, seed);
}

/// Farthest-first traversal adding `b` centers to `initial` (ties go to the
/// lowest index). With an empty `initial` the first center is drawn uniformly
/// by `seed`. `centers` holds only the added nodes; `objective` is the cover
/// radius of initial plus added.
ClusterResult kcenter_greedy(const Matrix& points, std::span<const NodeId> initial, int b,
                             std::uint64_t seed);
inline ClusterResult kcenter_greedy(const PropagatedFeatures& p, std::span<const NodeId> initial,
                                    int b, std::uint64_t seed) {
  return kcenter_greedy(p.matrix(), initial, b, seed);
}

/// Mean over nodes of the distance to the nearest member of `s`.
double kmedoids_objective(const Matrix& points, std::span<const NodeId> s);
/// Max over nodes of the distance to the nearest member of `s`.
double kcenter_objective(const Matrix& points, std::span<const NodeId> s);

inline double kmedoids_objective(const PropagatedFeatures& p, std::span<const NodeId> s) {
  return kmedoids_objective(p.matrix(), s);
}
inline double kcenter_objective(const PropagatedFeatures& p, std::span<const NodeId> s) {
  return kcenter_objective(p.matrix(), s);
}

/// Number of distinct rows.
NodeId count_distinct_rows(const Matrix& points);

}  // namespace featprop
