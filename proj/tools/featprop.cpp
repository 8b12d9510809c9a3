// featprop: active-learning benchmark runner.
//
//   featprop run --dataset <path> --format content-cites --out results/
//   featprop summarize --in results/results.csv
//   featprop bound-report --in results/
//   featprop gen-sbm --blocks 50,50 --p-in 0.2 --p-out 0.02 --seed 0 --out sbm.json
//
// --config <file> (TOML/INI) reads options from a file: keys mirror the long
// flag names, grouped under a [run] section. Command-line flags take precedence.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>

#include <CLI11.hpp>

#include "featprop/dataset_io.hpp"
#include "featprop/harness.hpp"

namespace fs = std::filesystem;
using namespace featprop;

namespace {

struct RunOptions {
  std::string dataset;
  std::string format = "content-cites";
  std::vector<std::string> strategies;
  std::vector<int> budgets{10, 20, 40, 80, 160};
  int seeds = 5;
  int initial_pool = 5;
  std::string model = "gcn";
  int prop_steps = 2;
  int hidden = 16;
  int epochs = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::string out;
  bool no_row_normalize = false;
  bool drop_unknown_edges = false;
  bool decay_all_layers = false;
  std::string representation = "embedding";
  int threads = 0;
  bool timings = false;
};

DatasetFormat require_format(const std::string& name) {
  const auto f = parse_dataset_format(name);
  if (!f) throw Error("unknown format '" + name + "' (expected content-cites or json)");
  return *f;
}

int cmd_run(const RunOptions& o) {
  ExperimentConfig cfg;
  if (!o.strategies.empty()) {
    cfg.strategies.clear();
    for (const auto& s : o.strategies) {
      if (s == "all") {
        cfg.strategies = all_strategies();
        break;
      }
      const auto kind = parse_strategy(s);
      if (!kind) throw Error("unknown strategy '" + s + "'");
      cfg.strategies.push_back(*kind);
    }
  }
  cfg.budgets = o.budgets;
  if (o.seeds < 1) throw Error("--seeds must be at least 1");
  cfg.seeds.resize(o.seeds);
  std::iota(cfg.seeds.begin(), cfg.seeds.end(), std::uint64_t{0});
  cfg.initial_pool_size = o.initial_pool;
  const auto variant = parse_model_variant(o.model);
  if (!variant) throw Error("unknown model '" + o.model + "' (expected gcn or sgc)");
  cfg.variant = *variant;
  cfg.prop_steps = o.prop_steps;
  cfg.train.hidden = o.hidden;
  cfg.train.epochs = o.epochs;
  cfg.train.learning_rate = o.lr;
  cfg.train.weight_decay = o.weight_decay;
  cfg.train.decay_all_layers = o.decay_all_layers;
  if (o.representation == "hidden") {
    cfg.representation = Representation::hidden;
  } else if (o.representation != "embedding") {
    throw Error("unknown representation '" + o.representation + "'");
  }
  cfg.threads = o.threads;

  RunManifest manifest;
  manifest.dataset = o.dataset;
  manifest.format = require_format(o.format);
  manifest.load.row_normalize = !o.no_row_normalize;
  manifest.load.drop_unknown_edges = o.drop_unknown_edges;
  manifest.prop_steps = o.prop_steps;

  const Dataset dataset = load_dataset(manifest.dataset, manifest.format, manifest.load);
  std::cerr << "loaded " << dataset.name << ": " << dataset.num_nodes() << " nodes, "
            << dataset.graph.num_edges() << " edges, " << dataset.labels.n_classes()
            << " classes, " << dataset.features.cols() << " features\n";

  const ExperimentResult result = run_experiment(dataset, cfg);

  const fs::path out_dir(o.out);
  fs::create_directories(out_dir);
  emit_csv(result.records, out_dir / "results.csv", o.timings);
  emit_csv(result.records, out_dir / "timings.csv", true);
  emit_plot_data(result.records, out_dir / "plot_macro_f1.csv", Metric::macro_f1);
  emit_plot_data(result.records, out_dir / "plot_micro_f1.csv", Metric::micro_f1);
  save_pools(result.pools, out_dir / "pools.json");
  save_manifest(manifest, out_dir / "run.json");

  if (!result.failures.empty()) {
    std::ofstream f(out_dir / "failures.txt");
    for (const auto& c : result.failures) {
      f << c.strategy << " seed=" << c.seed << " budget=" << c.budget << ": " << c.message << '\n';
      std::cerr << "FAILED " << c.strategy << " seed=" << c.seed << " budget=" << c.budget << ": "
                << c.message << '\n';
    }
  }
  if (!result.records.empty()) std::cout << format_summary(summarize(result.records));
  return result.failures.empty() ? 0 : 2;
}

int cmd_summarize(const std::string& in) {
  std::cout << format_summary(summarize(read_csv(in)));
  return 0;
}

int cmd_bound_report(const std::string& in) {
  const fs::path dir(in);
  const RunManifest manifest = load_manifest(dir / "run.json");
  const Dataset dataset = load_dataset(manifest.dataset, manifest.format, manifest.load);
  const NormalizedAdjacency s(dataset.graph);
  const PropagatedFeatures p = propagate(s, dataset.features, manifest.prop_steps);

  std::map<std::pair<std::uint64_t, int>, std::map<std::string, NodeSet>> groups;
  std::vector<std::string> order;
  for (auto& snap : load_pools(dir / "pools.json")) {
    if (std::find(order.begin(), order.end(), snap.strategy) == order.end()) {
      order.push_back(snap.strategy);
    }
    groups[{snap.seed, snap.budget}][snap.strategy] = std::move(snap.pool);
  }

  std::ofstream csv(dir / "bound_report.csv");
  csv << "seed,budget,strategy,pool_size,kmedoids_obj,kcenter_obj,featprop_best\n";
  csv << std::setprecision(17);
  std::map<std::string, std::pair<double, double>> totals;
  std::map<std::string, int> counts;
  int featprop_groups = 0;
  int featprop_best = 0;
  for (const auto& [key, pools] : groups) {
    const BoundReport report = bound_report(p, pools);
    if (report.featprop_best) {
      ++featprop_groups;
      featprop_best += *report.featprop_best ? 1 : 0;
    }
    for (const auto& row : report.rows) {
      csv << key.first << ',' << key.second << ',' << row.strategy << ',' << row.pool_size << ','
          << row.kmedoids_obj << ',' << row.kcenter_obj << ','
          << (report.featprop_best ? (*report.featprop_best ? "1" : "0") : "") << '\n';
      totals[row.strategy].first += row.kmedoids_obj;
      totals[row.strategy].second += row.kcenter_obj;
      ++counts[row.strategy];
    }
  }

  std::cout << std::left << std::setw(18) << "strategy" << std::right << std::setw(16)
            << "kmedoids_obj" << std::setw(16) << "kcenter_obj" << '\n';
  std::cout << std::fixed << std::setprecision(6);
  for (const auto& name : order) {
    const double n = counts[name];
    std::cout << std::left << std::setw(18) << name << std::right << std::setw(16)
              << totals[name].first / n << std::setw(16) << totals[name].second / n << '\n';
  }
  if (featprop_groups > 0) {
    std::cout << "featprop has the smallest kmedoids objective in " << featprop_best << " of "
              << featprop_groups << " (seed, budget) groups\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning for graph node classification by feature propagation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file; keys of `run` go in a [run] section");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run the budget sweep and write results");
  run_cmd->add_option("--dataset", run.dataset, "Dataset path")->required();
  run_cmd->add_option("--format", run.format, "content-cites or json")->capture_default_str();
  run_cmd->add_option("--strategies", run.strategies,
                      "Comma list: random,degree,uncertainty,coreset,featprop,"
                      "featprop-kcenter,netrep-kmedoids (default all)")
      ->delimiter(',');
  run_cmd->add_option("--budgets", run.budgets, "Comma list of budgets")
      ->delimiter(',')
      ->capture_default_str();
  run_cmd->add_option("--seeds", run.seeds, "Number of seeds (0..N-1)")->capture_default_str();
  run_cmd->add_option("--initial-pool", run.initial_pool, "Initial random pool size")
      ->capture_default_str();
  run_cmd->add_option("--model", run.model, "gcn or sgc")->capture_default_str();
  run_cmd->add_option("--prop-steps", run.prop_steps, "Propagation steps K")->capture_default_str();
  run_cmd->add_option("--hidden", run.hidden, "Hidden units")->capture_default_str();
  run_cmd->add_option("--epochs", run.epochs, "Training epochs")->capture_default_str();
  run_cmd->add_option("--lr", run.lr, "Adam learning rate")->capture_default_str();
  run_cmd->add_option("--weight-decay", run.weight_decay, "Weight decay")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_flag("--no-row-normalize", run.no_row_normalize, "Keep raw feature rows");
  run_cmd->add_flag("--drop-unknown-edges", run.drop_unknown_edges,
                    "Skip edges naming undeclared nodes");
  run_cmd->add_flag("--decay-all-layers", run.decay_all_layers, "Weight decay on both layers");
  run_cmd->add_option("--representation", run.representation,
                      "Model representation for coreset / netrep-kmedoids: embedding or hidden")
      ->capture_default_str();
  run_cmd->add_option("--threads", run.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  run_cmd->add_flag("--timings", run.timings, "Write measured timings into results.csv");

  std::string summarize_in;
  auto* sum_cmd = app.add_subcommand("summarize", "Mean +- stddev per strategy from a results csv");
  sum_cmd->add_option("--in", summarize_in, "results.csv")->required();

  std::string bound_in;
  auto* bound_cmd =
      app.add_subcommand("bound-report", "K-Medoids / K-Center objectives of every stored pool");
  bound_cmd->add_option("--in", bound_in, "Output directory of a run")->required();

  SbmParams sbm;
  sbm.blocks = {50, 50};
  std::string sbm_out;
  auto* sbm_cmd = app.add_subcommand("gen-sbm", "Write a stochastic block model dataset as json");
  sbm_cmd->add_option("--blocks", sbm.blocks, "Block sizes")->delimiter(',')->capture_default_str();
  sbm_cmd->add_option("--p-in", sbm.p_in, "Within-block edge probability")->capture_default_str();
  sbm_cmd->add_option("--p-out", sbm.p_out, "Cross-block edge probability")->capture_default_str();
  sbm_cmd->add_option("--noise", sbm.feature_noise, "Feature noise stddev")->capture_default_str();
  sbm_cmd->add_option("--seed", sbm.seed, "Random seed")->capture_default_str();
  sbm_cmd->add_option("--out", sbm_out, "Output json path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sum_cmd) return cmd_summarize(summarize_in);
    if (*bound_cmd) return cmd_bound_report(bound_in);
    if (*sbm_cmd) {
      const Dataset ds = generate_sbm(sbm);
      save_json(ds, sbm_out);
      std::cerr << "wrote " << ds.num_nodes() << " nodes, " << ds.graph.num_edges() << " edges to "
                << sbm_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
