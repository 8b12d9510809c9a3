#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "featprop/dataset_io.hpp"
#include "featprop/gcn.hpp"
#include "featprop/strategies.hpp"

namespace featprop {

struct ExperimentConfig {
  std::vector<StrategyKind> strategies = all_strategies();
  std::vector<int> budgets{10, 20, 40, 80, 160};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int initial_pool_size = 5;
  ModelVariant variant = ModelVariant::gcn;
  TrainConfig train;
  int prop_steps = 2;
  Representation representation = Representation::embedding;
  /// Worker threads for (strategy, seed) cells; 0 picks the hardware count.
  int threads = 0;

  /// Throws InfeasibleError when the sweep cannot run on n nodes.
  void validate(NodeId n) const;
};

struct ExperimentRecord {
  std::string strategy;
  std::uint64_t seed = 0;
  int budget = 0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  double kmedoids_obj = 0.0;
  double kcenter_obj = 0.0;
  double selection_ms = 0.0;
  double train_ms = 0.0;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

/// Labeled pool used for one record.
struct PoolSnapshot {
  std::string strategy;
  std::uint64_t seed = 0;
  int budget = 0;
  NodeSet pool;

  friend bool operator==(const PoolSnapshot&, const PoolSnapshot&) = default;
};

struct CellFailure {
  std::string strategy;
  std::uint64_t seed = 0;
  int budget = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  std::vector<PoolSnapshot> pools;
  std::vector<CellFailure> failures;
};

/// Runs the budget sweep. For each (strategy, seed) cell: draw the initial
/// pool, then for each budget select, train a fresh model on the pool and
/// evaluate on every node. Output order is canonical (strategy, seed,
/// budget) regardless of threading. A failing cell is reported in
/// `failures` and stops only that cell.
ExperimentResult run_experiment(const Dataset& dataset, const ExperimentConfig& cfg);

/// The initial labeled pool a seed draws (shared by all strategies).
NodeSet initial_pool(NodeId n, int size, std::uint64_t seed);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Population mean and standard deviation; throws InfeasibleError if empty.
MeanStd mean_std(std::span<const double> values);

struct SummaryRow {
  std::string strategy;
  std::size_t runs = 0;
  MeanStd macro_f1;
  MeanStd micro_f1;
  MeanStd accuracy;
};

/// One row per strategy (first-appearance order), aggregating every
/// (seed, budget) record flatly.
std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records);
std::string format_summary(const std::vector<SummaryRow>& rows);

inline constexpr const char* kCsvHeader =
    "strategy,seed,budget,macro_f1,micro_f1,accuracy,kmedoids_obj,kcenter_obj,selection_ms,"
    "train_ms";

/// Without `include_timings` the two timing columns are written as 0 so the
/// file depends only on the configuration.
std::string format_csv(const std::vector<ExperimentRecord>& records, bool include_timings = true);
void emit_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path,
              bool include_timings = true);
std::vector<ExperimentRecord> read_csv(const std::filesystem::path& path);

enum class Metric { macro_f1, micro_f1, accuracy };

/// Accuracy-vs-budget curve data: `budget,strategy,mean,stddev`, one row per
/// (strategy, budget), statistics over seeds.
void emit_plot_data(const std::vector<ExperimentRecord>& records,
                    const std::filesystem::path& path, Metric metric = Metric::macro_f1);

struct BoundRow {
  std::string strategy;
  std::size_t pool_size = 0;
  double kmedoids_obj = 0.0;
  double kcenter_obj = 0.0;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  /// Set when a "featprop" pool is present: whether it has the smallest
  /// kmedoids objective (ties count as smallest).
  std::optional<bool> featprop_best;
};

BoundReport bound_report(const PropagatedFeatures& p, const std::map<std::string, NodeSet>& pools);

void save_pools(const std::vector<PoolSnapshot>& pools, const std::filesystem::path& path);
std::vector<PoolSnapshot> load_pools(const std::filesystem::path& path);

/// Everything `bound-report` needs to rebuild the propagated features of a
/// finished run; stored as run.json in the output directory.
struct RunManifest {
  std::filesystem::path dataset;
  DatasetFormat format = DatasetFormat::json;
  LoadOptions load;
  int prop_steps = 2;
};

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace featprop
