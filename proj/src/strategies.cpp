#include "featprop/strategies.hpp"

#include <algorithm>
#include <numeric>

#include "featprop/clustering.hpp"
#include "featprop/metrics.hpp"
#include "featprop/random.hpp"

namespace featprop {

namespace {

struct NamedStrategy {
  StrategyKind kind;
  std::string_view name;
};

constexpr NamedStrategy kStrategies[] = {
    {StrategyKind::random, "random"},
    {StrategyKind::degree, "degree"},
    {StrategyKind::uncertainty, "uncertainty"},
    {StrategyKind::coreset, "coreset"},
    {StrategyKind::featprop, "featprop"},
    {StrategyKind::featprop_kcenter, "featprop-kcenter"},
    {StrategyKind::netrep_kmedoids, "netrep-kmedoids"},
};

NodeSet unlabeled_nodes(const SelectionContext& ctx) {
  const NodeId n = ctx.dataset.num_nodes();
  std::vector<bool> labeled(n, false);
  for (NodeId v : ctx.current_pool) {
    if (v < 0 || v >= n) throw IndexError("pool node " + std::to_string(v) + " out of range");
    labeled[v] = true;
  }
  NodeSet out;
  for (NodeId v = 0; v < n; ++v) {
    if (!labeled[v]) out.push_back(v);
  }
  return out;
}

// Validates the request against the unlabeled count and returns it.
int checked_request(const SelectionContext& ctx, const NodeSet& unlabeled) {
  const int k = ctx.requested();
  if (k < 0) {
    throw InfeasibleError("pool already holds " + std::to_string(ctx.current_pool.size()) +
                          " nodes, more than the budget allows");
  }
  if (static_cast<std::size_t>(k) > unlabeled.size()) {
    throw InfeasibleError("requested " + std::to_string(k) + " nodes but only " +
                          std::to_string(unlabeled.size()) + " are unlabeled");
  }
  return k;
}

// Top-k of `unlabeled` by descending score, ties to the lower index.
NodeSet top_by_score(NodeSet unlabeled, const std::vector<double>& score, int k) {
  std::stable_sort(unlabeled.begin(), unlabeled.end(),
                   [&](NodeId a, NodeId b) { return score[a] > score[b]; });
  unlabeled.resize(k);
  return unlabeled;
}

void add_pool_objectives(Selection& sel, const SelectionContext& ctx) {
  NodeSet pool = ctx.current_pool;
  pool.insert(pool.end(), sel.new_nodes.begin(), sel.new_nodes.end());
  if (pool.empty()) return;
  sel.diagnostics["kmedoids_objective"] = kmedoids_objective(ctx.propagated, pool);
  sel.diagnostics["kcenter_objective"] = kcenter_objective(ctx.propagated, pool);
}

Selection named(std::string_view name) {
  Selection sel;
  sel.strategy_name = std::string(name);
  return sel;
}

Selection kcenter_over(const Matrix& points, const SelectionContext& ctx, int k,
                       std::string_view name) {
  Selection sel = named(name);
  if (k == 0) return sel;
  const auto result = kcenter_greedy(points, ctx.current_pool, k, ctx.seed);
  sel.new_nodes = result.centers;
  sel.diagnostics["cover_radius"] = result.objective;
  return sel;
}

Selection kmedoids_over(const Matrix& points, const SelectionContext& ctx, int k,
                        std::string_view name) {
  Selection sel = named(name);
  if (k == 0) return sel;
  const auto result = kmedoids_approx(points, k, ctx.seed, ctx.current_pool);
  sel.new_nodes = result.centers;
  sel.diagnostics["kmeans_iterations"] = result.iterations;
  return sel;
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  for (const auto& s : kStrategies) {
    if (s.kind == kind) return s.name;
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (const auto& s : kStrategies) {
    if (s.name == name) return s.kind;
  }
  return std::nullopt;
}

const std::vector<StrategyKind>& all_strategies() {
  static const std::vector<StrategyKind> kinds = [] {
    std::vector<StrategyKind> out;
    for (const auto& s : kStrategies) out.push_back(s.kind);
    return out;
  }();
  return kinds;
}

bool is_incremental(StrategyKind kind) {
  return kind == StrategyKind::random || kind == StrategyKind::degree ||
         kind == StrategyKind::uncertainty || kind == StrategyKind::coreset;
}

bool needs_model(StrategyKind kind) {
  return kind == StrategyKind::uncertainty || kind == StrategyKind::coreset ||
         kind == StrategyKind::netrep_kmedoids;
}

int SelectionContext::requested() const {
  return budget_total + initial_pool_size - static_cast<int>(current_pool.size());
}

Matrix model_representation(const GcnModel& model, const Dataset& dataset,
                            const NormalizedAdjacency& adjacency, Representation which) {
  auto out = forward(model, adjacency, dataset.features);
  return which == Representation::hidden ? std::move(out.hidden) : std::move(out.embedding);
}

std::vector<double> prediction_entropy(const Matrix& probabilities) {
  std::vector<double> out(probabilities.rows());
  std::vector<double> row(probabilities.cols());
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    for (Eigen::Index c = 0; c < probabilities.cols(); ++c) row[c] = probabilities(i, c);
    out[i] = entropy(row);
  }
  return out;
}

Selection select_random(const SelectionContext& ctx) {
  const NodeSet unlabeled = unlabeled_nodes(ctx);
  const int k = checked_request(ctx, unlabeled);
  Selection sel = named("random");
  Rng rng(ctx.seed);
  sel.new_nodes = rng.sample(unlabeled, static_cast<std::size_t>(k));
  return sel;
}

Selection select_degree(const SelectionContext& ctx) {
  const NodeSet unlabeled = unlabeled_nodes(ctx);
  const int k = checked_request(ctx, unlabeled);
  std::vector<double> degree(ctx.dataset.num_nodes());
  for (NodeId v = 0; v < ctx.dataset.num_nodes(); ++v) {
    degree[v] = static_cast<double>(ctx.dataset.graph.degree(v));
  }
  Selection sel = named("degree");
  sel.new_nodes = top_by_score(unlabeled, degree, k);
  return sel;
}

Selection select_uncertainty(const SelectionContext& ctx) {
  if (ctx.previous_model == nullptr) {
    Selection sel = select_random(ctx);
    sel.strategy_name = "uncertainty";
    sel.diagnostics["cold_start"] = 1.0;
    return sel;
  }
  const NodeSet unlabeled = unlabeled_nodes(ctx);
  const int k = checked_request(ctx, unlabeled);
  const auto out = forward(*ctx.previous_model, ctx.adjacency, ctx.dataset.features);
  Selection sel = named("uncertainty");
  sel.new_nodes = top_by_score(unlabeled, prediction_entropy(out.probabilities), k);
  return sel;
}

Selection select_coreset_greedy(const SelectionContext& ctx) {
  const NodeSet unlabeled = unlabeled_nodes(ctx);
  const int k = checked_request(ctx, unlabeled);
  if (ctx.previous_model == nullptr) {
    Selection sel = kcenter_over(ctx.dataset.features.values(), ctx, k, "coreset");
    sel.diagnostics["cold_start"] = 1.0;
    return sel;
  }
  const Matrix rep = model_representation(*ctx.previous_model, ctx.dataset, ctx.adjacency,
                                          ctx.representation);
  return kcenter_over(rep, ctx, k, "coreset");
}

Selection select_featprop(const SelectionContext& ctx) {
  const NodeSet unlabeled = unlabeled_nodes(ctx);
  const int k = checked_request(ctx, unlabeled);
  Selection sel = kmedoids_over(ctx.propagated.matrix(), ctx, k, "featprop");
  add_pool_objectives(sel, ctx);
  return sel;
}

Selection select_featprop_kcenter(const SelectionContext& ctx) {
  const NodeSet unlabeled = unlabeled_nodes(ctx);
  const int k = checked_request(ctx, unlabeled);
  Selection sel = kcenter_over(ctx.propagated.matrix(), ctx, k, "featprop-kcenter");
  add_pool_objectives(sel, ctx);
  return sel;
}

Selection select_netrep_kmedoids(const SelectionContext& ctx) {
  const NodeSet unlabeled = unlabeled_nodes(ctx);
  const int k = checked_request(ctx, unlabeled);
  if (ctx.previous_model == nullptr) {
    Selection sel = kmedoids_over(ctx.dataset.features.values(), ctx, k, "netrep-kmedoids");
    sel.diagnostics["cold_start"] = 1.0;
    return sel;
  }
  const Matrix rep = model_representation(*ctx.previous_model, ctx.dataset, ctx.adjacency,
                                          ctx.representation);
  return kmedoids_over(rep, ctx, k, "netrep-kmedoids");
}

Selection select(StrategyKind kind, const SelectionContext& ctx) {
  switch (kind) {
    case StrategyKind::random:
      return select_random(ctx);
    case StrategyKind::degree:
      return select_degree(ctx);
    case StrategyKind::uncertainty:
      return select_uncertainty(ctx);
    case StrategyKind::coreset:
      return select_coreset_greedy(ctx);
    case StrategyKind::featprop:
      return select_featprop(ctx);
    case StrategyKind::featprop_kcenter:
      return select_featprop_kcenter(ctx);
    case StrategyKind::netrep_kmedoids:
      return select_netrep_kmedoids(ctx);
  }
  throw Error("unknown strategy");
}

}  // namespace featprop
