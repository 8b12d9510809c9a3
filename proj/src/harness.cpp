#include "featprop/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "featprop/clustering.hpp"
#include "featprop/metrics.hpp"
#include "featprop/random.hpp"

namespace featprop {

namespace fs = std::filesystem;

void ExperimentConfig::validate(NodeId n) const {
  if (strategies.empty()) throw InfeasibleError("no strategies configured");
  if (budgets.empty()) throw InfeasibleError("no budgets configured");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] < 0 || (i > 0 && budgets[i] <= budgets[i - 1])) {
      throw InfeasibleError("budgets must be nonnegative and strictly increasing");
    }
  }
  if (seeds.empty()) throw InfeasibleError("no seeds configured");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw InfeasibleError("seeds must be distinct");
  }
  if (initial_pool_size < 0) throw InfeasibleError("initial pool size must be nonnegative");
  if (static_cast<NodeId>(budgets.back()) + initial_pool_size > n) {
    throw InfeasibleError("largest budget " + std::to_string(budgets.back()) + " plus initial pool " +
                          std::to_string(initial_pool_size) + " exceeds " + std::to_string(n) +
                          " nodes");
  }
  if (prop_steps < 0) throw InfeasibleError("prop-steps must be nonnegative");
  train.validate();
}

NodeSet initial_pool(NodeId n, int size, std::uint64_t seed) {
  NodeSet all(n);
  for (NodeId i = 0; i < n; ++i) all[i] = i;
  Rng rng(derive_seed(seed, 1));
  return rng.sample(all, static_cast<std::size_t>(size));
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct SharedInputs {
  const Dataset& dataset;
  const NormalizedAdjacency& adjacency;
  const PropagatedFeatures& propagated;
  const ModelInput& model_input;
  const ExperimentConfig& cfg;
};

struct CellOutput {
  std::vector<ExperimentRecord> records;
  std::vector<PoolSnapshot> pools;
  std::vector<CellFailure> failures;
};

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  return tc;
}

CellOutput run_cell(const SharedInputs& in, StrategyKind kind, std::uint64_t seed) {
  const auto& cfg = in.cfg;
  const std::string name(strategy_name(kind));
  CellOutput out;

  const NodeSet initial = initial_pool(in.dataset.num_nodes(), cfg.initial_pool_size, seed);
  NodeSet pool = initial;
  std::optional<GcnModel> previous;

  std::size_t t = 0;
  try {
    if (needs_model(kind) && !initial.empty()) {
      previous = train(in.model_input, in.dataset.labels, initial,
                       train_config(cfg, derive_seed(seed, 2)));
    }
    for (; t < cfg.budgets.size(); ++t) {
      const int budget = cfg.budgets[t];
      SelectionContext ctx{in.dataset, in.adjacency, in.propagated, {}};
      ctx.current_pool = is_incremental(kind) ? pool : initial;
      ctx.previous_model = previous ? &*previous : nullptr;
      ctx.budget_total = budget;
      ctx.initial_pool_size = static_cast<int>(initial.size());
      ctx.seed = derive_seed(seed, 100 + t);
      ctx.representation = cfg.representation;

      const auto sel_start = Clock::now();
      const Selection sel = select(kind, ctx);
      const double selection_ms = elapsed_ms(sel_start);

      NodeSet next = ctx.current_pool;
      next.insert(next.end(), sel.new_nodes.begin(), sel.new_nodes.end());

      const auto train_start = Clock::now();
      GcnModel model =
          train(in.model_input, in.dataset.labels, next, train_config(cfg, derive_seed(seed, 200 + t)));
      const double train_ms = elapsed_ms(train_start);

      const auto pred = predict(forward(model, in.model_input).probabilities);
      ExperimentRecord rec;
      rec.strategy = name;
      rec.seed = seed;
      rec.budget = budget;
      rec.macro_f1 = macro_f1(pred, in.dataset.labels);
      rec.micro_f1 = micro_f1(pred, in.dataset.labels);
      rec.accuracy = accuracy(pred, in.dataset.labels);
      rec.kmedoids_obj = kmedoids_objective(in.propagated, next);
      rec.kcenter_obj = kcenter_objective(in.propagated, next);
      rec.selection_ms = selection_ms;
      rec.train_ms = train_ms;
      out.records.push_back(rec);

      PoolSnapshot snap{name, seed, budget, next};
      std::sort(snap.pool.begin(), snap.pool.end());
      out.pools.push_back(std::move(snap));

      pool = std::move(next);
      previous = std::move(model);
    }
  } catch (const std::exception& e) {
    const int budget = t < cfg.budgets.size() ? cfg.budgets[t] : -1;
    out.failures.push_back({name, seed, budget, e.what()});
    for (std::size_t rest = t + 1; rest < cfg.budgets.size(); ++rest) {
      out.failures.push_back({name, seed, cfg.budgets[rest], "skipped after earlier failure"});
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const Dataset& dataset, const ExperimentConfig& cfg) {
  dataset.validate();
  cfg.validate(dataset.num_nodes());

  const NormalizedAdjacency adjacency(dataset.graph);
  const PropagatedFeatures propagated = propagate(adjacency, dataset.features, cfg.prop_steps);
  const ModelInput model_input(adjacency, dataset.features, cfg.variant);
  const SharedInputs shared{dataset, adjacency, propagated, model_input, cfg};

  struct Cell {
    StrategyKind kind;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (StrategyKind kind : cfg.strategies) {
    for (std::uint64_t seed : cfg.seeds) cells.push_back({kind, seed});
  }
  std::vector<CellOutput> outputs(cells.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      outputs[i] = run_cell(shared, cells[i].kind, cells[i].seed);
    }
  };
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cells.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }

  ExperimentResult result;
  for (auto& o : outputs) {
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    result.pools.insert(result.pools.end(), o.pools.begin(), o.pools.end());
    result.failures.insert(result.failures.end(), o.failures.begin(), o.failures.end());
  }
  return result;
}

// ---------------------------------------------------------------------------

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw InfeasibleError("mean_std: no values");
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd out;
  out.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / n);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw InfeasibleError("summarize: no records");
  std::vector<std::string> order;
  std::map<std::string, std::array<std::vector<double>, 3>> values;
  for (const auto& r : records) {
    if (!values.contains(r.strategy)) order.push_back(r.strategy);
    auto& v = values[r.strategy];
    v[0].push_back(r.macro_f1);
    v[1].push_back(r.micro_f1);
    v[2].push_back(r.accuracy);
  }
  std::vector<SummaryRow> rows;
  for (const auto& name : order) {
    const auto& v = values[name];
    rows.push_back({name, v[0].size(), mean_std(v[0]), mean_std(v[1]), mean_std(v[2])});
  }
  return rows;
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "strategy" << std::right << std::setw(6) << "runs"
     << std::setw(18) << "macro_f1 (%)" << std::setw(18) << "micro_f1 (%)" << std::setw(18)
     << "accuracy (%)" << '\n';
  const auto cell = [](const MeanStd& m) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(2) << 100.0 * m.mean << " +- " << 100.0 * m.stddev;
    return c.str();
  };
  for (const auto& r : rows) {
    os << std::left << std::setw(18) << r.strategy << std::right << std::setw(6) << r.runs
       << std::setw(18) << cell(r.macro_f1) << std::setw(18) << cell(r.micro_f1) << std::setw(18)
       << cell(r.accuracy) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const fs::path& path, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(path.string(), line, "bad number '" + std::string(field) + "'");
  }
  return value;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

std::string format_csv(const std::vector<ExperimentRecord>& records, bool include_timings) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.strategy + ',' + std::to_string(r.seed) + ',' + std::to_string(r.budget) + ',' +
           fmt(r.macro_f1) + ',' + fmt(r.micro_f1) + ',' + fmt(r.accuracy) + ',' +
           fmt(r.kmedoids_obj) + ',' + fmt(r.kcenter_obj) + ',' +
           fmt(include_timings ? r.selection_ms : 0.0) + ',' +
           fmt(include_timings ? r.train_ms : 0.0) + '\n';
  }
  return out;
}

void emit_csv(const std::vector<ExperimentRecord>& records, const fs::path& path,
              bool include_timings) {
  write_text(path, format_csv(records, include_timings));
}

std::vector<ExperimentRecord> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError(path.string(), 1, "unexpected header");
  }
  std::vector<ExperimentRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) throw ParseError(path.string(), line_no, "expected 10 fields");
    ExperimentRecord r;
    r.strategy = std::string(f[0]);
    r.seed = parse_number<std::uint64_t>(f[1], path, line_no);
    r.budget = parse_number<int>(f[2], path, line_no);
    r.macro_f1 = parse_number<double>(f[3], path, line_no);
    r.micro_f1 = parse_number<double>(f[4], path, line_no);
    r.accuracy = parse_number<double>(f[5], path, line_no);
    r.kmedoids_obj = parse_number<double>(f[6], path, line_no);
    r.kcenter_obj = parse_number<double>(f[7], path, line_no);
    r.selection_ms = parse_number<double>(f[8], path, line_no);
    r.train_ms = parse_number<double>(f[9], path, line_no);
    out.push_back(std::move(r));
  }
  return out;
}

void emit_plot_data(const std::vector<ExperimentRecord>& records, const fs::path& path,
                    Metric metric) {
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::vector<double>>> curves;
  for (const auto& r : records) {
    if (!curves.contains(r.strategy)) order.push_back(r.strategy);
    const double v = metric == Metric::macro_f1   ? r.macro_f1
                     : metric == Metric::micro_f1 ? r.micro_f1
                                                  : r.accuracy;
    curves[r.strategy][r.budget].push_back(v);
  }
  std::string out = "budget,strategy,mean,stddev\n";
  for (const auto& name : order) {
    for (const auto& [budget, values] : curves[name]) {
      const auto ms = mean_std(values);
      out += std::to_string(budget) + ',' + name + ',' + fmt(ms.mean) + ',' + fmt(ms.stddev) + '\n';
    }
  }
  write_text(path, out);
}

// ---------------------------------------------------------------------------

BoundReport bound_report(const PropagatedFeatures& p, const std::map<std::string, NodeSet>& pools) {
  BoundReport report;
  for (const auto& [name, pool] : pools) {
    report.rows.push_back(
        {name, pool.size(), kmedoids_objective(p, pool), kcenter_objective(p, pool)});
  }
  const auto fp = std::find_if(report.rows.begin(), report.rows.end(),
                               [](const BoundRow& r) { return r.strategy == "featprop"; });
  if (fp != report.rows.end()) {
    report.featprop_best = std::all_of(report.rows.begin(), report.rows.end(), [&](const BoundRow& r) {
      return fp->kmedoids_obj <= r.kmedoids_obj;
    });
  }
  return report;
}

void save_pools(const std::vector<PoolSnapshot>& pools, const fs::path& path) {
  auto doc = nlohmann::json::array();
  for (const auto& p : pools) {
    doc.push_back({{"strategy", p.strategy}, {"seed", p.seed}, {"budget", p.budget}, {"pool", p.pool}});
  }
  write_text(path, doc.dump() + '\n');
}

std::vector<PoolSnapshot> load_pools(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<PoolSnapshot> out;
  try {
    for (const auto& j : nlohmann::json::parse(in)) {
      out.push_back({j.at("strategy").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                     j.at("budget").get<int>(), j.at("pool").get<NodeSet>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
  return out;
}

void save_manifest(const RunManifest& manifest, const fs::path& path) {
  nlohmann::json doc;
  doc["dataset"] = fs::absolute(manifest.dataset).string();
  doc["format"] = format_name(manifest.format);
  doc["row_normalize"] = manifest.load.row_normalize;
  doc["drop_unknown_edges"] = manifest.load.drop_unknown_edges;
  doc["prop_steps"] = manifest.prop_steps;
  write_text(path, doc.dump(2) + '\n');
}

RunManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    RunManifest m;
    m.dataset = doc.at("dataset").get<std::string>();
    const auto format = parse_dataset_format(doc.at("format").get<std::string>());
    if (!format) throw ParseError(path.string(), 1, "unknown dataset format");
    m.format = *format;
    m.load.row_normalize = doc.value("row_normalize", true);
    m.load.drop_unknown_edges = doc.value("drop_unknown_edges", false);
    m.prop_steps = doc.value("prop_steps", 2);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

}  // namespace featprop
