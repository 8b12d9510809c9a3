#include "featprop/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <Eigen/SparseCore>

#include "featprop/random.hpp"

namespace featprop {

namespace {

// Above this width distances go through the |x|^2 - 2x.c + |c|^2 expansion
// (a matrix product), and near-ties are confirmed with exact distances.
constexpr Eigen::Index kGemmMinWidth = 64;
// Wide inputs at most this dense use a sparse copy for the products.
constexpr double kSparseMaxDensity = 0.35;

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

bool row_less(const Matrix& m, NodeId a, NodeId b) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (m(a, k) != m(b, k)) return m(a, k) < m(b, k);
  }
  return false;
}

// The points plus what the expansion path needs, computed once per call.
struct PointSet {
  const Matrix& dense;
  bool expand = false;
  Vector sq;
  std::optional<SparseRows> sparse;

  explicit PointSet(const Matrix& m) : dense(m), expand(m.cols() >= kGemmMinWidth) {
    if (!expand) return;
    sq = m.rowwise().squaredNorm();
    const double nnz = (m.array() != 0.0).count();
    if (nnz <= kSparseMaxDensity * static_cast<double>(m.size())) sparse = m.sparseView();
  }

  // points * other^T
  Matrix cross(const Matrix& other) const {
    if (!sparse) return dense * other.transpose();
    const Matrix other_t = other.transpose();  // row-major rhs is much faster here
    return *sparse * other_t;
  }

  double exact_sq(Eigen::Index i, const Eigen::Ref<const Eigen::RowVectorXd>& c) const {
    return (dense.row(i) - c).squaredNorm();
  }
};

// Expanded squared distance, or an exact one when it is close enough to
// `bound` that rounding could matter. Exact zero for coincident rows.
double confirmed_sq(const PointSet& p, Eigen::Index i, double approx, double c_sq, double bound,
                    const Eigen::Ref<const Eigen::RowVectorXd>& c) {
  const double slack = 1e-9 * (p.sq(i) + c_sq) + 1e-300;
  if (approx > bound + slack) return approx;
  return p.exact_sq(i, c);
}

// Nearest centroid for every point with exact tie-breaking by lowest rank.
// Returns the exact squared distances.
std::vector<double> assign_points(const PointSet& p, const Matrix& centroids,
                                  std::vector<int>& assignment) {
  const Eigen::Index n = p.dense.rows();
  const Eigen::Index b = centroids.rows();
  assignment.assign(n, 0);
  std::vector<double> best_sq(n);

  if (!p.expand) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = INFINITY;
      int arg = 0;
      for (Eigen::Index c = 0; c < b; ++c) {
        const double d = p.exact_sq(i, centroids.row(c));
        if (d < best) {
          best = d;
          arg = static_cast<int>(c);
        }
      }
      assignment[i] = arg;
      best_sq[i] = best;
    }
    return best_sq;
  }

  const Vector centroid_sq = centroids.rowwise().squaredNorm();
  const Matrix cross = p.cross(centroids);
  for (Eigen::Index i = 0; i < n; ++i) {
    double approx_best = INFINITY;
    for (Eigen::Index c = 0; c < b; ++c) {
      approx_best = std::min(approx_best, p.sq(i) - 2.0 * cross(i, c) + centroid_sq(c));
    }
    double best = INFINITY;
    int arg = 0;
    for (Eigen::Index c = 0; c < b; ++c) {
      const double approx = p.sq(i) - 2.0 * cross(i, c) + centroid_sq(c);
      const double slack = 1e-9 * (p.sq(i) + centroid_sq(c)) + 1e-300;
      if (approx > approx_best + slack) continue;
      const double d = p.exact_sq(i, centroids.row(c));
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    assignment[i] = arg;
    best_sq[i] = best;
  }
  return best_sq;
}

// Squared distance of every point to point `j`, exact near zero.
void distances_to(const PointSet& p, Eigen::Index j, std::vector<double>& out) {
  const Eigen::Index n = p.dense.rows();
  out.resize(n);
  if (!p.expand) {
    for (Eigen::Index i = 0; i < n; ++i) out[i] = p.exact_sq(i, p.dense.row(j));
    return;
  }
  const Matrix cross = p.cross(p.dense.row(j));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double approx = std::max(0.0, p.sq(i) - 2.0 * cross(i, 0) + p.sq(j));
    out[i] = confirmed_sq(p, i, approx, p.sq(j), 0.0, p.dense.row(j));
  }
}

Matrix kmeans_plus_plus(const PointSet& p, int b, Rng& rng) {
  const Matrix& points = p.dense;
  const Eigen::Index n = points.rows();
  Matrix centroids(b, points.cols());
  const auto first = static_cast<Eigen::Index>(rng.below(n));
  centroids.row(0) = points.row(first);
  std::vector<double> d2, fresh;
  distances_to(p, first, d2);

  for (int c = 1; c < b; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > target) break;
      }
    }
    if (pick < 0) throw InfeasibleError("kmeans: fewer distinct points than clusters");
    centroids.row(c) = points.row(pick);
    distances_to(p, pick, fresh);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], fresh[i]);
  }
  return centroids;
}

}  // namespace

NodeId count_distinct_rows(const Matrix& points) {
  std::vector<NodeId> order(points.rows());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(),
            [&](NodeId a, NodeId b) { return row_less(points, a, b); });
  NodeId distinct = order.empty() ? 0 : 1;
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (row_less(points, order[k - 1], order[k])) ++distinct;
  }
  return distinct;
}

namespace {

// One seeded Lloyd run; `threshold` is the absolute centroid-shift tolerance.
ClusterResult lloyd(const PointSet& p, int b, std::uint64_t seed, int max_iter,
                    double threshold) {
  const Matrix& points = p.dense;
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  Rng rng(seed);
  ClusterResult result;
  result.centroids = kmeans_plus_plus(p, b, rng);
  std::vector<double> sq = assign_points(p, result.centroids, result.assignment);
  result.inertia_trace.push_back(std::accumulate(sq.begin(), sq.end(), 0.0));

  while (result.iterations < max_iter) {
    Matrix updated = Matrix::Zero(b, d);
    std::vector<NodeId> counts(b, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      updated.row(result.assignment[i]) += points.row(i);
      ++counts[result.assignment[i]];
    }
    std::vector<bool> taken(n, false);
    for (int c = 0; c < b; ++c) {
      if (counts[c] > 0) {
        updated.row(c) /= static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the worst-served point.
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!taken[i] && (far < 0 || sq[i] > sq[far])) far = i;
      }
      taken[far] = true;
      updated.row(c) = points.row(far);
    }
    const double shift = (updated - result.centroids).rowwise().norm().maxCoeff();
    result.centroids = std::move(updated);
    sq = assign_points(p, result.centroids, result.assignment);
    result.inertia_trace.push_back(std::accumulate(sq.begin(), sq.end(), 0.0));
    ++result.iterations;
    if (shift <= threshold) break;
  }

  double total = 0.0;
  for (double v : sq) total += std::sqrt(v);
  result.objective = total / static_cast<double>(n);
  return result;
}

}  // namespace

ClusterResult kmeans(const Matrix& points, int b, std::uint64_t seed,
                     const KMeansOptions& options) {
  if (b < 1) throw InfeasibleError("kmeans: need at least one cluster");
  if (options.max_iter < 1) throw InfeasibleError("kmeans: max_iter must be positive");
  if (options.n_init < 1) throw InfeasibleError("kmeans: n_init must be positive");
  if (!points.allFinite()) throw IntegrityError("kmeans: non-finite point");
  const NodeId distinct = count_distinct_rows(points);
  if (b > distinct) {
    throw InfeasibleError("kmeans: " + std::to_string(b) + " clusters requested but only " +
                          std::to_string(distinct) + " distinct points");
  }

  const Eigen::RowVectorXd mean = points.colwise().mean();
  const double spread =
      std::sqrt((points.rowwise() - mean).squaredNorm() / static_cast<double>(points.rows()));
  const double threshold = options.tol * spread;

  const PointSet p(points);
  ClusterResult best = lloyd(p, b, seed, options.max_iter, threshold);
  for (int run = 1; run < options.n_init; ++run) {
    ClusterResult r = lloyd(p, b, derive_seed(seed, run), options.max_iter, threshold);
    if (r.inertia_trace.back() < best.inertia_trace.back()) best = std::move(r);
  }
  return best;
}

ClusterResult kmedoids_approx(const Matrix& points, int b, std::uint64_t seed,
                              std::span<const NodeId> excluded, const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  if (b < 1) throw InfeasibleError("kmedoids_approx: need at least one medoid");
  std::vector<bool> used(n, false);
  NodeId n_free = n;
  for (NodeId e : excluded) {
    if (e < 0 || e >= n) throw IndexError("kmedoids_approx: excluded index out of range");
    if (!used[e]) --n_free;
    used[e] = true;
  }
  if (b > n_free) {
    throw InfeasibleError("kmedoids_approx: " + std::to_string(b) + " medoids requested from " +
                          std::to_string(n_free) + " available nodes");
  }

  const int b_eff = static_cast<int>(std::min<NodeId>(b, count_distinct_rows(points)));
  const ClusterResult km = kmeans(points, b_eff, seed, options);

  // Candidate order per centroid: ascending distance, then node index.
  std::vector<std::vector<NodeId>> order(b_eff);
  std::vector<double> dist(n);
  for (int c = 0; c < b_eff; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) dist[i] = (points.row(i) - km.centroids.row(c)).squaredNorm();
    auto& o = order[c];
    o.resize(n);
    std::iota(o.begin(), o.end(), NodeId{0});
    std::stable_sort(o.begin(), o.end(), [&](NodeId a, NodeId b2) { return dist[a] < dist[b2]; });
  }

  ClusterResult result;
  std::vector<std::size_t> cursor(b_eff, 0);
  const auto take_next = [&](int c) {
    auto& k = cursor[c];
    while (used[order[c][k]]) ++k;
    const NodeId node = order[c][k];
    used[node] = true;
    result.centers.push_back(node);
  };
  for (int c = 0; c < b_eff; ++c) take_next(c);
  for (int c = 0; static_cast<int>(result.centers.size()) < b; c = (c + 1) % b_eff) take_next(c);

  result.assignment.assign(n, 0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = INFINITY;
    for (std::size_t r = 0; r < result.centers.size(); ++r) {
      const double d = (points.row(i) - points.row(result.centers[r])).squaredNorm();
      if (d < best) {
        best = d;
        result.assignment[i] = static_cast<int>(r);
      }
    }
    total += std::sqrt(best);
  }
  result.objective = total / static_cast<double>(n);
  result.iterations = km.iterations;
  return result;
}

ClusterResult kcenter_greedy(const Matrix& points, std::span<const NodeId> initial, int b,
                             std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (b < 0) throw InfeasibleError("kcenter_greedy: negative center count");
  std::vector<bool> chosen(n, false);
  NodeSet ranked;
  for (NodeId s : initial) {
    if (s < 0 || s >= n) throw IndexError("kcenter_greedy: initial index out of range");
    if (!chosen[s]) ranked.push_back(s);
    chosen[s] = true;
  }
  if (static_cast<NodeId>(ranked.size()) + b > n) {
    throw InfeasibleError("kcenter_greedy: " + std::to_string(b) + " centers requested with " +
                          std::to_string(ranked.size()) + " initial out of " + std::to_string(n) +
                          " nodes");
  }
  if (ranked.empty() && b == 0) throw InfeasibleError("kcenter_greedy: no centers");

  std::vector<double> mind(n, INFINITY);
  std::vector<int> owner(n, 0);
  const auto absorb = [&](NodeId center) {
    const int rank = static_cast<int>(ranked.size()) - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (points.row(i) - points.row(center)).norm();
      if (d < mind[i]) {
        mind[i] = d;
        owner[i] = rank;
      }
    }
  };
  {
    NodeSet seeds = ranked;
    ranked.clear();
    for (NodeId s : seeds) {
      ranked.push_back(s);
      absorb(s);
    }
  }

  ClusterResult result;
  if (ranked.empty()) {
    Rng rng(seed);
    const auto first = static_cast<NodeId>(rng.below(n));
    chosen[first] = true;
    ranked.push_back(first);
    result.centers.push_back(first);
    absorb(first);
  }
  while (static_cast<int>(result.centers.size()) < b) {
    Eigen::Index far = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!chosen[i] && (far < 0 || mind[i] > mind[far])) far = i;
    }
    chosen[far] = true;
    ranked.push_back(far);
    result.centers.push_back(far);
    absorb(far);
  }

  result.assignment = std::move(owner);
  result.objective = *std::max_element(mind.begin(), mind.end());
  return result;
}

double kmedoids_objective(const Matrix& points, std::span<const NodeId> s) {
  const auto d = min_distances_to_set(points, s);
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

double kcenter_objective(const Matrix& points, std::span<const NodeId> s) {
  const auto d = min_distances_to_set(points, s);
  return *std::max_element(d.begin(), d.end());
}

}  // namespace featprop
