#include "featprop/graph.hpp"

#include <algorithm>
#include <cmath>

#include "featprop/random.hpp"

namespace featprop {

CsrMatrix::CsrMatrix(NodeId rows, NodeId cols, std::vector<std::size_t> offsets,
                     std::vector<NodeId> indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(offsets)),
      indices_(std::move(indices)),
      values_(std::move(values)) {
  if (offsets_.size() != static_cast<std::size_t>(rows_) + 1 || offsets_.front() != 0 ||
      offsets_.back() != indices_.size() || indices_.size() != values_.size()) {
    throw DimensionError("CsrMatrix: inconsistent offsets/indices/values");
  }
  for (NodeId r = 0; r < rows_; ++r) {
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (indices_[k] < 0 || indices_[k] >= cols_ ||
          (k > offsets_[r] && indices_[k] <= indices_[k - 1])) {
        throw IndexError("CsrMatrix: column indices must be in range and strictly increasing");
      }
    }
  }
}

CsrMatrix CsrMatrix::identity(NodeId n) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<NodeId> indices(n);
  for (NodeId i = 0; i < n; ++i) {
    offsets[i + 1] = i + 1;
    indices[i] = i;
  }
  return CsrMatrix(n, n, std::move(offsets), std::move(indices), std::vector<double>(n, 1.0));
}

double CsrMatrix::at(NodeId r, NodeId c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw IndexError("CsrMatrix::at out of range");
  auto idx = row_indices(r);
  auto it = std::lower_bound(idx.begin(), idx.end(), c);
  if (it == idx.end() || *it != c) return 0.0;
  return row_values(r)[it - idx.begin()];
}

CsrMatrix CsrMatrix::submatrix(std::span<const NodeId> row_ids,
                               std::span<const NodeId> col_ids) const {
  std::vector<std::size_t> offsets{0};
  std::vector<NodeId> indices;
  std::vector<double> values;
  offsets.reserve(row_ids.size() + 1);
  for (NodeId r : row_ids) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    // Merge the sorted row against the sorted column selection.
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < idx.size() && b < col_ids.size()) {
      if (idx[a] < col_ids[b]) {
        ++a;
      } else if (idx[a] > col_ids[b]) {
        ++b;
      } else {
        indices.push_back(static_cast<NodeId>(b));
        values.push_back(val[a]);
        ++a;
        ++b;
      }
    }
    offsets.push_back(indices.size());
  }
  return CsrMatrix(static_cast<NodeId>(row_ids.size()), static_cast<NodeId>(col_ids.size()),
                   std::move(offsets), std::move(indices), std::move(values));
}

Matrix CsrMatrix::to_dense() const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (NodeId r = 0; r < rows_; ++r) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) out(r, idx[k]) = val[k];
  }
  return out;
}

Matrix spmm(const CsrMatrix& a, const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != a.cols()) {
    throw DimensionError("spmm: matrix has " + std::to_string(m.rows()) + " rows, expected " +
                         std::to_string(a.cols()));
  }
  Matrix out = Matrix::Zero(a.rows(), m.cols());
  for (NodeId r = 0; r < a.rows(); ++r) {
    auto idx = a.row_indices(r);
    auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(r).noalias() += val[k] * m.row(idx[k]);
  }
  return out;
}

Matrix spmm_transpose(const CsrMatrix& a, const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != a.rows()) {
    throw DimensionError("spmm_transpose: matrix has " + std::to_string(m.rows()) +
                         " rows, expected " + std::to_string(a.rows()));
  }
  Matrix out = Matrix::Zero(a.cols(), m.cols());
  for (NodeId r = 0; r < a.rows(); ++r) {
    auto idx = a.row_indices(r);
    auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(idx[k]).noalias() += val[k] * m.row(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

Graph Graph::from_edges(NodeId n, std::span<const Edge> edges) {
  if (n < 0) throw IndexError("Graph: negative node count");
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw IndexError("Graph: edge (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") outside [0, " + std::to_string(n) + ")");
    }
    if (i == j) continue;
    directed.emplace_back(i, j);
    directed.emplace_back(j, i);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.n_ = n;
  g.offsets_.assign(n + 1, 0);
  g.indices_.reserve(directed.size());
  for (const auto& [i, j] : directed) {
    ++g.offsets_[i + 1];
    g.indices_.push_back(j);
  }
  for (NodeId i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  return g;
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw IntegrityError("FeatureMatrix: non-finite entry");
}

FeatureMatrix FeatureMatrix::row_normalized() const {
  Matrix out = values_;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).cwiseAbs().sum();
    if (norm == 0.0 || std::abs(norm - 1.0) <= 1e-12) continue;
    out.row(i) /= norm;
  }
  return FeatureMatrix(std::move(out));
}

LabelVector::LabelVector(std::vector<int> labels, int n_classes)
    : labels_(std::move(labels)), n_classes_(n_classes) {
  if (n_classes_ < 1 && !labels_.empty()) throw IntegrityError("LabelVector: no classes");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= n_classes_) {
      throw IntegrityError("LabelVector: label " + std::to_string(labels_[i]) + " at node " +
                           std::to_string(i) + " outside [0, " + std::to_string(n_classes_) +
                           ")");
    }
  }
}

void Dataset::validate() const {
  const NodeId n = graph.num_nodes();
  if (features.rows() != n || static_cast<NodeId>(labels.size()) != n) {
    throw DimensionError("Dataset '" + name + "': graph has " + std::to_string(n) +
                         " nodes, features " + std::to_string(features.rows()) + " rows, labels " +
                         std::to_string(labels.size()));
  }
}

// ---------------------------------------------------------------------------

NormalizedAdjacency::NormalizedAdjacency(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (NodeId i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));

  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<NodeId> indices;
  std::vector<double> values;
  indices.reserve(g.column_indices().size() + n);
  values.reserve(g.column_indices().size() + n);
  for (NodeId i = 0; i < n; ++i) {
    bool diag_done = false;
    for (NodeId j : g.neighbors(i)) {
      if (!diag_done && j > i) {
        indices.push_back(i);
        values.push_back(inv_sqrt[i] * inv_sqrt[i]);
        diag_done = true;
      }
      indices.push_back(j);
      values.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    if (!diag_done) {
      indices.push_back(i);
      values.push_back(inv_sqrt[i] * inv_sqrt[i]);
    }
    offsets[i + 1] = indices.size();
  }
  matrix_ = CsrMatrix(n, n, std::move(offsets), std::move(indices), std::move(values));
}

Matrix spmm(const NormalizedAdjacency& s, const Eigen::Ref<const Matrix>& m) {
  return spmm(s.matrix(), m);
}

// ---------------------------------------------------------------------------

Dataset generate_sbm(const SbmParams& params) {
  if (params.blocks.size() < 2) throw InfeasibleError("generate_sbm: need at least 2 blocks");
  if (!(params.p_in >= 0.0 && params.p_in <= 1.0 && params.p_out >= 0.0 && params.p_out <= 1.0)) {
    throw InfeasibleError("generate_sbm: probabilities must lie in [0, 1]");
  }
  if (params.feature_noise < 0.0) throw InfeasibleError("generate_sbm: negative noise");

  std::vector<int> labels;
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    if (params.blocks[b] <= 0) throw InfeasibleError("generate_sbm: empty block");
    labels.insert(labels.end(), params.blocks[b], static_cast<int>(b));
  }
  const auto n = static_cast<NodeId>(labels.size());
  const auto n_blocks = static_cast<int>(params.blocks.size());

  Rng rng(params.seed);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? params.p_in : params.p_out;
      // Always draw so the stream position is independent of p.
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }

  Matrix x = Matrix::Zero(n, n_blocks);
  for (NodeId i = 0; i < n; ++i) {
    x(i, labels[i]) = 1.0;
    for (int c = 0; c < n_blocks; ++c) x(i, c) += params.feature_noise * rng.normal();
  }

  Dataset ds;
  ds.name = "sbm";
  ds.graph = Graph::from_edges(n, edges);
  ds.features = FeatureMatrix(std::move(x));
  ds.labels = LabelVector(std::move(labels), n_blocks);
  for (int c = 0; c < n_blocks; ++c) ds.class_names.push_back("block" + std::to_string(c));
  return ds;
}

}  // namespace featprop
