// Python bindings for the featprop core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "featprop/clustering.hpp"
#include "featprop/dataset_io.hpp"
#include "featprop/harness.hpp"
#include "featprop/metrics.hpp"

namespace py = pybind11;
using namespace featprop;

namespace {

StrategyKind strategy_from(const std::string& name) {
  const auto kind = parse_strategy(name);
  if (!kind) throw py::value_error("unknown strategy '" + name + "'");
  return *kind;
}

ModelVariant variant_from(const std::string& name) {
  const auto v = parse_model_variant(name);
  if (!v) throw py::value_error("unknown model '" + name + "' (expected gcn or sgc)");
  return *v;
}

DatasetFormat format_from(const std::string& name) {
  const auto f = parse_dataset_format(name);
  if (!f) throw py::value_error("unknown format '" + name + "' (expected content-cites or json)");
  return *f;
}

Dataset from_arrays(NodeId n, const std::vector<Edge>& edges, const Matrix& features,
                    const std::vector<int>& labels, int n_classes, std::string name) {
  if (n_classes <= 0) {
    n_classes = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
  }
  Dataset ds{std::move(name), Graph::from_edges(n, edges), FeatureMatrix(features),
             LabelVector(labels, n_classes), {}};
  for (int c = 0; c < n_classes; ++c) ds.class_names.push_back(std::to_string(c));
  ds.validate();
  return ds;
}

py::dict cluster_dict(const ClusterResult& r) {
  py::dict d;
  d["centers"] = r.centers;
  d["centroids"] = r.centroids;
  d["assignment"] = r.assignment;
  d["objective"] = r.objective;
  d["iterations"] = r.iterations;
  d["inertia_trace"] = r.inertia_trace;
  return d;
}

py::dict record_dict(const ExperimentRecord& r) {
  py::dict d;
  d["strategy"] = r.strategy;
  d["seed"] = r.seed;
  d["budget"] = r.budget;
  d["macro_f1"] = r.macro_f1;
  d["micro_f1"] = r.micro_f1;
  d["accuracy"] = r.accuracy;
  d["kmedoids_obj"] = r.kmedoids_obj;
  d["kcenter_obj"] = r.kcenter_obj;
  d["selection_ms"] = r.selection_ms;
  d["train_ms"] = r.train_ms;
  return d;
}

TrainConfig train_config(int epochs, int hidden, double lr, double weight_decay,
                         std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.hidden = hidden;
  cfg.learning_rate = lr;
  cfg.weight_decay = weight_decay;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Active learning for GCN node classification by feature propagation";

  auto error = py::register_exception<Error>(m, "FeatpropError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<IndexError>(m, "NodeIndexError", error.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", error.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", error.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def_static("from_arrays", &from_arrays, py::arg("num_nodes"), py::arg("edges"),
                  py::arg("features"), py::arg("labels"), py::arg("n_classes") = 0,
                  py::arg("name") = "dataset",
                  "Build a dataset from an edge list, an n x d feature array and labels.")
      .def_readonly("name", &Dataset::name)
      .def_readonly("class_names", &Dataset::class_names)
      .def_property_readonly("num_nodes", &Dataset::num_nodes)
      .def_property_readonly("num_edges", [](const Dataset& d) { return d.graph.num_edges(); })
      .def_property_readonly("n_classes", [](const Dataset& d) { return d.labels.n_classes(); })
      .def_property_readonly("edges", [](const Dataset& d) { return d.graph.edge_list(); })
      .def_property_readonly("features", [](const Dataset& d) { return d.features.values(); })
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels.values(); })
      .def("degree", [](const Dataset& d, NodeId v) { return d.graph.degree(v); })
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset " + d.name + ": " + std::to_string(d.num_nodes()) + " nodes, " +
               std::to_string(d.graph.num_edges()) + " edges>";
      });

  m.def(
      "load_dataset",
      [](const std::filesystem::path& path, const std::string& format, bool row_normalize,
         bool drop_unknown_edges) {
        LoadOptions opts;
        opts.row_normalize = row_normalize;
        opts.drop_unknown_edges = drop_unknown_edges;
        return load_dataset(path, format_from(format), opts);
      },
      py::arg("path"), py::arg("format") = "content-cites", py::arg("row_normalize") = true,
      py::arg("drop_unknown_edges") = false);
  m.def("save_json", &save_json, py::arg("dataset"), py::arg("path"));
  m.def(
      "generate_sbm",
      [](std::vector<NodeId> blocks, double p_in, double p_out, double noise, std::uint64_t seed) {
        return generate_sbm({std::move(blocks), p_in, p_out, noise, seed});
      },
      py::arg("blocks"), py::arg("p_in") = 0.2, py::arg("p_out") = 0.02, py::arg("noise") = 0.5,
      py::arg("seed") = 0);

  m.def(
      "normalized_adjacency",
      [](const Dataset& d) { return NormalizedAdjacency(d.graph).matrix().to_dense(); },
      py::arg("dataset"), "Dense copy of the symmetric normalized adjacency with self-loops.");
  m.def(
      "propagate",
      [](const Dataset& d, int k) {
        return propagate(NormalizedAdjacency(d.graph), d.features, k).matrix();
      },
      py::arg("dataset"), py::arg("k") = 2);

  m.def(
      "kmeans",
      [](const Matrix& points, int b, std::uint64_t seed, int n_init) {
        KMeansOptions opts;
        opts.n_init = n_init;
        return cluster_dict(kmeans(points, b, seed, opts));
      },
      py::arg("points"), py::arg("b"), py::arg("seed") = 0, py::arg("n_init") = 10);
  m.def(
      "kmedoids",
      [](const Matrix& points, int b, std::uint64_t seed, std::vector<NodeId> excluded) {
        return cluster_dict(kmedoids_approx(points, b, seed, excluded));
      },
      py::arg("points"), py::arg("b"), py::arg("seed") = 0,
      py::arg("excluded") = std::vector<NodeId>{});
  m.def(
      "kcenter",
      [](const Matrix& points, std::vector<NodeId> initial, int b, std::uint64_t seed) {
        return cluster_dict(kcenter_greedy(points, initial, b, seed));
      },
      py::arg("points"), py::arg("initial"), py::arg("b"), py::arg("seed") = 0);
  m.def(
      "kmedoids_objective",
      [](const Matrix& p, std::vector<NodeId> s) { return kmedoids_objective(p, s); },
      py::arg("points"), py::arg("centers"));
  m.def(
      "kcenter_objective",
      [](const Matrix& p, std::vector<NodeId> s) { return kcenter_objective(p, s); },
      py::arg("points"), py::arg("centers"));

  py::class_<GcnModel>(m, "Model")
      .def_property_readonly("variant",
                             [](const GcnModel& g) { return std::string(variant_name(g.variant)); })
      .def_readonly("theta0", &GcnModel::theta0)
      .def_readonly("theta1", &GcnModel::theta1)
      .def(
          "predict_proba",
          [](const GcnModel& g, const Dataset& d) {
            return forward(g, NormalizedAdjacency(d.graph), d.features).probabilities;
          },
          py::arg("dataset"))
      .def(
          "predict",
          [](const GcnModel& g, const Dataset& d) {
            return predict(forward(g, NormalizedAdjacency(d.graph), d.features).probabilities);
          },
          py::arg("dataset"))
      .def("save", [](const GcnModel& g, const std::filesystem::path& p) { save_model(g, p); });
  m.def("load_model", &load_model, py::arg("path"));

  m.def(
      "train",
      [](const Dataset& d, std::vector<NodeId> pool, const std::string& model, int epochs,
         int hidden, double lr, double weight_decay, std::uint64_t seed) {
        const TrainConfig cfg = train_config(epochs, hidden, lr, weight_decay, seed);
        return train(d, NormalizedAdjacency(d.graph), pool, cfg, variant_from(model));
      },
      py::arg("dataset"), py::arg("pool"), py::arg("model") = "gcn", py::arg("epochs") = 200,
      py::arg("hidden") = 16, py::arg("lr") = 0.01, py::arg("weight_decay") = 5e-4,
      py::arg("seed") = 0);

  m.def("strategies", [] {
    std::vector<std::string> out;
    for (StrategyKind k : all_strategies()) out.emplace_back(strategy_name(k));
    return out;
  });
  m.def(
      "select",
      [](const std::string& strategy, const Dataset& d, std::vector<NodeId> pool, int budget,
         int initial_pool_size, std::uint64_t seed, int prop_steps, const GcnModel* model) {
        const NormalizedAdjacency s(d.graph);
        const PropagatedFeatures p = propagate(s, d.features, prop_steps);
        SelectionContext ctx{d, s, p, std::move(pool)};
        ctx.budget_total = budget;
        ctx.initial_pool_size = initial_pool_size < 0 ? static_cast<int>(ctx.current_pool.size())
                                                      : initial_pool_size;
        ctx.seed = seed;
        ctx.previous_model = model;
        const Selection sel = select(strategy_from(strategy), ctx);
        py::dict out;
        out["new_nodes"] = sel.new_nodes;
        out["strategy"] = sel.strategy_name;
        out["diagnostics"] = sel.diagnostics;
        return out;
      },
      py::arg("strategy"), py::arg("dataset"), py::arg("pool"), py::arg("budget"),
      py::arg("initial_pool_size") = -1, py::arg("seed") = 0, py::arg("prop_steps") = 2,
      py::arg("model") = nullptr,
      "Pick nodes so that |pool| + |new| = budget + initial_pool_size (defaults to |pool|).");

  m.def(
      "macro_f1", [](std::vector<int> pred, const Dataset& d) { return macro_f1(pred, d.labels); },
      py::arg("pred"), py::arg("dataset"));
  m.def(
      "micro_f1", [](std::vector<int> pred, const Dataset& d) { return micro_f1(pred, d.labels); },
      py::arg("pred"), py::arg("dataset"));
  m.def(
      "accuracy", [](std::vector<int> pred, const Dataset& d) { return accuracy(pred, d.labels); },
      py::arg("pred"), py::arg("dataset"));

  m.def(
      "run_experiment",
      [](const Dataset& d, std::vector<std::string> strategies, std::vector<int> budgets,
         std::vector<std::uint64_t> seeds, int initial_pool_size, const std::string& model,
         int epochs, int hidden, int prop_steps, int threads) {
        ExperimentConfig cfg;
        if (!strategies.empty()) {
          cfg.strategies.clear();
          for (const auto& s : strategies) cfg.strategies.push_back(strategy_from(s));
        }
        cfg.budgets = std::move(budgets);
        cfg.seeds = std::move(seeds);
        cfg.initial_pool_size = initial_pool_size;
        cfg.variant = variant_from(model);
        cfg.train.epochs = epochs;
        cfg.train.hidden = hidden;
        cfg.prop_steps = prop_steps;
        cfg.threads = threads;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(d, cfg);
        }
        py::list records;
        for (const auto& rec : r.records) records.append(record_dict(rec));
        py::list failures;
        for (const auto& f : r.failures) {
          py::dict fd;
          fd["strategy"] = f.strategy;
          fd["seed"] = f.seed;
          fd["budget"] = f.budget;
          fd["message"] = f.message;
          failures.append(fd);
        }
        py::dict out;
        out["records"] = records;
        out["failures"] = failures;
        out["csv"] = format_csv(r.records, false);
        return out;
      },
      py::arg("dataset"), py::arg("strategies") = std::vector<std::string>{},
      py::arg("budgets") = std::vector<int>{10, 20, 40, 80, 160},
      py::arg("seeds") = std::vector<std::uint64_t>{0, 1, 2, 3, 4},
      py::arg("initial_pool_size") = 5, py::arg("model") = "gcn", py::arg("epochs") = 200,
      py::arg("hidden") = 16, py::arg("prop_steps") = 2, py::arg("threads") = 0);
}
