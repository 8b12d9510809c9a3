#include "featprop/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace featprop {

PropagatedFeatures::PropagatedFeatures(Matrix matrix, int k_steps)
    : matrix_(std::move(matrix)), k_steps_(k_steps) {
  if (k_steps_ < 0) throw InfeasibleError("PropagatedFeatures: negative step count");
  if (!matrix_.allFinite()) throw IntegrityError("PropagatedFeatures: non-finite entry");
}

PropagatedFeatures propagate(const NormalizedAdjacency& s, const FeatureMatrix& x, int k_steps) {
  if (k_steps < 0) throw InfeasibleError("propagate: negative step count");
  if (x.rows() != s.size()) {
    throw DimensionError("propagate: features have " + std::to_string(x.rows()) +
                         " rows, graph has " + std::to_string(s.size()) + " nodes");
  }
  Matrix out = x.values();
  for (int k = 0; k < k_steps; ++k) out = spmm(s, out);
  return PropagatedFeatures(std::move(out), k_steps);
}

double pair_distance(const Matrix& points, NodeId i, NodeId j) {
  if (i < 0 || i >= points.rows() || j < 0 || j >= points.rows()) {
    throw IndexError("pair_distance: index out of range");
  }
  return (points.row(i) - points.row(j)).norm();
}

std::vector<double> min_distances_to_set(const Matrix& points, std::span<const NodeId> centers) {
  if (centers.empty()) throw InfeasibleError("min_distances_to_set: empty center set");
  for (NodeId c : centers) {
    if (c < 0 || c >= points.rows()) throw IndexError("min_distances_to_set: index out of range");
  }
  std::vector<double> out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = INFINITY;
    for (NodeId c : centers) best = std::min(best, (points.row(i) - points.row(c)).squaredNorm());
    out[i] = std::sqrt(best);
  }
  return out;
}

}  // namespace featprop
