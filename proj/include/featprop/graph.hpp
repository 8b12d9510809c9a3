#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "featprop/common.hpp"

namespace featprop {

/// Compressed sparse rows with real values. Column indices are strictly
/// increasing within each row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(NodeId rows, NodeId cols, std::vector<std::size_t> offsets,
            std::vector<NodeId> indices, std::vector<double> values);

  static CsrMatrix identity(NodeId n);

  NodeId rows() const noexcept { return rows_; }
  NodeId cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return indices_.size(); }

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const NodeId> row_indices(NodeId r) const {
    return {indices_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const double> row_values(NodeId r) const {
    return {values_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }

  /// Entry lookup by binary search; 0 when absent.
  double at(NodeId r, NodeId c) const;

  /// Keeps rows `row_ids` (in that order) and the columns listed in
  /// `col_ids`, renumbered by their position in `col_ids`. Entries in
  /// dropped columns are discarded. `col_ids` must be sorted.
  CsrMatrix submatrix(std::span<const NodeId> row_ids,
                      std::span<const NodeId> col_ids) const;

  Matrix to_dense() const;

 private:
  NodeId rows_ = 0;
  NodeId cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> indices_;
  std::vector<double> values_;
};

/// out = A * m. Each row is accumulated in ascending column order.
Matrix spmm(const CsrMatrix& a, const Eigen::Ref<const Matrix>& m);
/// out = A^T * m, scattered in ascending row order.
Matrix spmm_transpose(const CsrMatrix& a, const Eigen::Ref<const Matrix>& m);

using Edge = std::pair<NodeId, NodeId>;

/// Immutable simple undirected graph in CSR form. Self-loops are never stored.
class Graph {
 public:
  Graph() = default;

  /// Symmetrizes and deduplicates `edges`; self-loops are dropped.
  /// Throws IndexError for endpoints outside [0, n).
  static Graph from_edges(NodeId n, std::span<const Edge> edges);

  NodeId num_nodes() const noexcept { return n_; }
  /// Number of undirected edges.
  std::size_t num_edges() const noexcept { return indices_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {indices_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  NodeId degree(NodeId i) const {
    return static_cast<NodeId>(offsets_[i + 1] - offsets_[i]);
  }
  bool has_edge(NodeId i, NodeId j) const;

  std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
  std::span<const NodeId> column_indices() const noexcept { return indices_; }

  /// Undirected edges as (i, j) with i < j, in row-major order.
  std::vector<Edge> edge_list() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  NodeId n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> indices_;
};

/// Node features, row i = x_i. Every entry is finite.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix values);

  NodeId rows() const noexcept { return values_.rows(); }
  NodeId cols() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }

  /// Scales each row to unit L1 norm. Zero rows and rows already at unit norm
  /// (within 1e-12) are left untouched, which makes the operation idempotent.
  FeatureMatrix row_normalized() const;

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Matrix values_;
};

class LabelVector {
 public:
  LabelVector() = default;
  /// Throws IntegrityError if any label falls outside [0, n_classes).
  LabelVector(std::vector<int> labels, int n_classes);

  std::size_t size() const noexcept { return labels_.size(); }
  int n_classes() const noexcept { return n_classes_; }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<int>& values() const noexcept { return labels_; }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<int> labels_;
  int n_classes_ = 0;
};

struct Dataset {
  std::string name;
  Graph graph;
  FeatureMatrix features;
  LabelVector labels;
  /// Original label strings, index = class id. May be empty.
  std::vector<std::string> class_names;

  NodeId num_nodes() const noexcept { return graph.num_nodes(); }

  /// Throws DimensionError if graph, features and labels disagree on n.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// S = (I+D)^{-1/2} (A+I) (I+D)^{-1/2}, stored with the sparsity of A+I.
class NormalizedAdjacency {
 public:
  explicit NormalizedAdjacency(const Graph& g);

  NodeId size() const noexcept { return matrix_.rows(); }
  const CsrMatrix& matrix() const noexcept { return matrix_; }
  double at(NodeId i, NodeId j) const { return matrix_.at(i, j); }

 private:
  CsrMatrix matrix_;
};

inline NormalizedAdjacency normalized_adjacency(const Graph& g) {
  return NormalizedAdjacency(g);
}

/// S * m; throws DimensionError when m.rows() != n.
Matrix spmm(const NormalizedAdjacency& s, const Eigen::Ref<const Matrix>& m);

struct SbmParams {
  std::vector<NodeId> blocks;
  double p_in = 0.2;
  double p_out = 0.02;
  double feature_noise = 0.5;
  std::uint64_t seed = 0;
};

/// Stochastic block model: label = block id, features = one-hot(block) plus
/// gaussian noise. Deterministic per seed.
Dataset generate_sbm(const SbmParams& params);

}  // namespace featprop
