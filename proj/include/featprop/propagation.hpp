#pragma once

#include <span>
#include <vector>

#include "featprop/graph.hpp"

namespace featprop {

/// S^K X, the node representation used by the selection distance.
class PropagatedFeatures {
 public:
  PropagatedFeatures(Matrix matrix, int k_steps);

  const Matrix& matrix() const noexcept { return matrix_; }
  int k_steps() const noexcept { return k_steps_; }
  NodeId num_nodes() const noexcept { return matrix_.rows(); }

 private:
  Matrix matrix_;
  int k_steps_;
};

/// Applies S to X `k_steps` times with no intermediate normalization.
PropagatedFeatures propagate(const NormalizedAdjacency& s, const FeatureMatrix& x, int k_steps);

/// Euclidean distance between rows i and j.
double pair_distance(const Matrix& points, NodeId i, NodeId j);
inline double pair_distance(const PropagatedFeatures& p, NodeId i, NodeId j) {
  return pair_distance(p.matrix(), i, j);
}

/// For every row i, min over j in `centers` of pair_distance(i, j).
/// Throws InfeasibleError for an empty set, IndexError for a bad index.
std::vector<double> min_distances_to_set(const Matrix& points, std::span<const NodeId> centers);
inline std::vector<double> min_distances_to_set(const PropagatedFeatures& p,
                                                std::span<const NodeId> centers) {
  return min_distances_to_set(p.matrix(), centers);
}

}  // namespace featprop
