#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "featprop/gcn.hpp"
#include "featprop/propagation.hpp"

namespace featprop {

enum class StrategyKind {
  random,
  degree,
  uncertainty,
  coreset,
  featprop,
  featprop_kcenter,
  netrep_kmedoids,
};

/// CLI-stable identifiers: random, degree, uncertainty, coreset, featprop,
/// featprop-kcenter, netrep-kmedoids.
std::string_view strategy_name(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);
const std::vector<StrategyKind>& all_strategies();

/// Incremental strategies grow the previous pool; the clustering strategies
/// (featprop and its two ablations) recluster from the initial pool at every
/// budget.
bool is_incremental(StrategyKind kind);
bool needs_model(StrategyKind kind);

/// Which model representation the representation-based strategies cluster.
enum class Representation {
  embedding,  // input of the output layer (S * H for gcn)
  hidden,     // first-layer output H
};

struct SelectionContext {
  const Dataset& dataset;
  const NormalizedAdjacency& adjacency;
  const PropagatedFeatures& propagated;
  NodeSet current_pool;
  /// Model trained on the previous pool, if any.
  const GcnModel* previous_model = nullptr;
  int budget_total = 0;
  int initial_pool_size = 0;
  std::uint64_t seed = 0;
  Representation representation = Representation::embedding;

  /// budget_total + initial_pool_size - |current_pool|.
  int requested() const;
};

struct Selection {
  NodeSet new_nodes;
  std::string strategy_name;
  std::map<std::string, double> diagnostics;
};

Selection select_random(const SelectionContext& ctx);
Selection select_degree(const SelectionContext& ctx);
Selection select_uncertainty(const SelectionContext& ctx);
Selection select_coreset_greedy(const SelectionContext& ctx);
Selection select_featprop(const SelectionContext& ctx);
Selection select_featprop_kcenter(const SelectionContext& ctx);
Selection select_netrep_kmedoids(const SelectionContext& ctx);

Selection select(StrategyKind kind, const SelectionContext& ctx);

/// Node representations of a trained model, as used by coreset and
/// netrep-kmedoids.
Matrix model_representation(const GcnModel& model, const Dataset& dataset,
                            const NormalizedAdjacency& adjacency, Representation which);

/// Per-row entropy of the model's predicted class distribution.
std::vector<double> prediction_entropy(const Matrix& probabilities);

}  // namespace featprop
