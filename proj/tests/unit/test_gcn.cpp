#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "featprop/gcn.hpp"
#include "featprop/metrics.hpp"
#include "featprop/random.hpp"
#include "oracles.hpp"

using namespace featprop;

namespace {

Graph random_graph(NodeId n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rng.normal();
  return m;
}

// Dense restatement of the training objective, independent of the library's
// restricted computation.
double dense_loss(const Matrix& s, const Matrix& x, const Matrix& t0, const Matrix& t1,
                  const LabelVector& y, const NodeSet& idx, double wd, bool relu) {
  Matrix h = s * x * t0;
  if (relu) h = h.cwiseMax(0.0);
  const Matrix z = s * h * t1;
  double ce = 0.0;
  for (NodeId i : idx) {
    double lse = 0.0;
    const double mx = z.row(i).maxCoeff();
    for (Eigen::Index c = 0; c < z.cols(); ++c) lse += std::exp(z(i, c) - mx);
    ce += mx + std::log(lse) - z(i, y[i]);
  }
  return ce / static_cast<double>(idx.size()) + 0.5 * wd * t0.squaredNorm();
}

}  // namespace

TEST_CASE("forward produces distributions") {
  Rng rng(1);
  const NormalizedAdjacency s(random_graph(15, 0.3, 1));
  const FeatureMatrix x(gaussian(15, 6, rng));
  for (auto v : {ModelVariant::gcn, ModelVariant::sgc}) {
    const GcnModel model = init_model(6, 8, 4, v, 3);
    const ForwardResult f = forward(model, s, x);
    CHECK(f.probabilities.rows() == 15);
    CHECK(f.probabilities.cols() == 4);
    for (Eigen::Index i = 0; i < 15; ++i) {
      CHECK(std::abs(f.probabilities.row(i).sum() - 1.0) < 1e-12);
      CHECK(f.probabilities.row(i).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("zero parameters give the uniform distribution and loss ln C") {
  Rng rng(2);
  const NormalizedAdjacency s(random_graph(10, 0.3, 2));
  const FeatureMatrix x(gaussian(10, 3, rng));
  GcnModel model = init_model(3, 4, 7, ModelVariant::gcn, 0);
  model.theta0.setZero();
  model.theta1.setZero();
  const ForwardResult f = forward(model, s, x);
  CHECK((f.probabilities.array() - 1.0 / 7.0).abs().maxCoeff() < 1e-15);
  std::vector<int> labels(10);
  for (int i = 0; i < 10; ++i) labels[i] = i % 7;
  const NodeSet idx{0, 3, 5};
  const auto lg = loss_and_gradients(model, s, x, LabelVector(labels, 7), idx, 0.0);
  CHECK(lg.cross_entropy == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(lg.loss == doctest::Approx(1.9459).epsilon(1e-4));
}

TEST_CASE("isolated node reduces to an MLP") {
  const NormalizedAdjacency s(Graph::from_edges(1, {}));
  Matrix xm(1, 2);
  xm << 1, 2;
  GcnModel model = init_model(2, 2, 2, ModelVariant::gcn, 0);
  model.theta0.resize(2, 2);
  model.theta0 << 1, -1, 0.5, 0.5;
  model.theta1 = Matrix::Identity(2, 2);
  const ForwardResult f = forward(model, s, FeatureMatrix(xm));
  CHECK(f.hidden(0, 0) == 2.0);
  CHECK(f.hidden(0, 1) == 0.0);
  const double e2 = std::exp(2.0);
  CHECK(f.probabilities(0, 0) == doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-14));
  CHECK(f.probabilities(0, 1) == doctest::Approx(1.0 / (e2 + 1.0)).epsilon(1e-14));
}

TEST_CASE("softmax is stable for large logits") {
  Matrix z(2, 3);
  z << 1000, 1000, 1000, -1000, 0, 1000;
  const Matrix p = softmax_rows(z);
  CHECK(p.allFinite());
  CHECK(p(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(p(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("analytic gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const NodeId n = 6;
    const Graph g = random_graph(n, 0.4, seed);
    const NormalizedAdjacency s(g);
    const Matrix sd = s.matrix().to_dense();
    const Matrix xm = gaussian(n, 4, rng);
    const FeatureMatrix x(xm);
    std::vector<int> y(n);
    for (NodeId i = 0; i < n; ++i) y[i] = static_cast<int>(rng.below(2));
    const LabelVector labels(y, 2);
    const NodeSet idx{0, 2, 3, 5};
    const double wd = 5e-4;
    const GcnModel model = init_model(4, 3, 2, ModelVariant::gcn, seed);
    const auto lg = loss_and_gradients(model, s, x, labels, idx, wd);

    CHECK(lg.loss == doctest::Approx(
                         dense_loss(sd, xm, model.theta0, model.theta1, labels, idx, wd, true))
                         .epsilon(1e-12));

    const double h = 1e-6;
    auto check = [&](const Matrix& analytic, bool first) {
      for (Eigen::Index r = 0; r < analytic.rows(); ++r)
        for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
          Matrix t0 = model.theta0, t1 = model.theta1;
          Matrix& t = first ? t0 : t1;
          const double orig = t(r, c);
          t(r, c) = orig + h;
          const double up = dense_loss(sd, xm, t0, t1, labels, idx, wd, true);
          t(r, c) = orig - h;
          const double down = dense_loss(sd, xm, t0, t1, labels, idx, wd, true);
          const double numeric = (up - down) / (2 * h);
          const double denom = std::max(std::abs(numeric) + std::abs(analytic(r, c)), 1e-6);
          CHECK(std::abs(numeric - analytic(r, c)) / denom < 1e-4);
        }
    };
    check(lg.grads.theta0, true);
    check(lg.grads.theta1, false);
  }
}

TEST_CASE("adam step") {
  TrainConfig cfg;
  GcnModel model = init_model(2, 2, 2, ModelVariant::gcn, 0);
  const GcnModel before = model;
  AdamState state;
  Gradients g{Matrix::Constant(2, 2, 0.3), Matrix::Constant(2, 2, -2.0)};
  g.theta0(0, 0) = 0.0;
  adam_step(state, model, g, cfg);
  CHECK(state.step == 1);
  CHECK(model.theta0(0, 0) == before.theta0(0, 0));
  CHECK(model.theta0(1, 1) - before.theta0(1, 1) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(model.theta1(0, 0) - before.theta1(0, 0) == doctest::Approx(0.01).epsilon(1e-6));

  Gradients bad{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  bad.theta1(1, 0) = std::nan("");
  CHECK_THROWS_AS(adam_step(state, model, bad, cfg), TrainingError);
}

TEST_CASE("training separates a clean block model") {
  const Dataset ds = generate_sbm({{20, 20}, 0.5, 0.0, 0.1, 4});
  const NormalizedAdjacency s(ds.graph);
  NodeSet pool(ds.num_nodes());
  for (NodeId i = 0; i < ds.num_nodes(); ++i) pool[i] = i;
  TrainConfig cfg;
  cfg.seed = 9;
  const ModelInput input(s, ds.features, ModelVariant::gcn);
  std::vector<double> history;
  const GcnModel model = train(input, ds.labels, pool, cfg, &history);
  CHECK(history.size() == 200);
  CHECK(history.back() < history.front());
  const auto pred = predict(forward(model, input).probabilities);
  CHECK(accuracy(pred, ds.labels) == 1.0);
  const auto lg = loss_and_gradients(model, input, ds.labels, pool, 0.0);
  CHECK(lg.cross_entropy < 0.05);
}

TEST_CASE("zero epochs returns the initialization; training is deterministic") {
  const Dataset ds = generate_sbm({{10, 10}, 0.4, 0.05, 0.5, 1});
  const NormalizedAdjacency s(ds.graph);
  const NodeSet pool{0, 5, 12, 17};
  TrainConfig cfg;
  cfg.seed = 33;
  cfg.hidden = 5;
  cfg.epochs = 0;
  const GcnModel init = init_model(static_cast<int>(ds.features.cols()), 5, 2, ModelVariant::gcn, 33);
  const GcnModel zero = train(ds, s, pool, cfg, ModelVariant::gcn);
  CHECK(zero.theta0 == init.theta0);
  CHECK(zero.theta1 == init.theta1);

  cfg.epochs = 50;
  const GcnModel a = train(ds, s, pool, cfg, ModelVariant::gcn);
  const GcnModel b = train(ds, s, pool, cfg, ModelVariant::gcn);
  CHECK(a.theta0 == b.theta0);
  CHECK(a.theta1 == b.theta1);
  CHECK_THROWS_AS(train(ds, s, NodeSet{}, cfg, ModelVariant::gcn), InfeasibleError);
}

TEST_CASE("restricted training matches full-graph gradients") {
  // Pool receptive field is a strict subset of the graph here.
  const Dataset ds = generate_sbm({{30, 30, 30}, 0.08, 0.005, 0.5, 6});
  const NormalizedAdjacency s(ds.graph);
  const NodeSet pool{1, 40, 77};
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 2;
  const ModelInput input(s, ds.features, ModelVariant::gcn);
  GcnModel manual = init_model(static_cast<int>(ds.features.cols()), cfg.hidden, 3,
                               ModelVariant::gcn, cfg.seed);
  AdamState state;
  for (int e = 0; e < cfg.epochs; ++e) {
    const auto lg = loss_and_gradients(manual, input, ds.labels, pool, cfg.weight_decay);
    adam_step(state, manual, lg.grads, cfg);
  }
  const GcnModel trained = train(input, ds.labels, pool, cfg);
  CHECK((trained.theta0 - manual.theta0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((trained.theta1 - manual.theta1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sgc equals the linear gcn") {
  Rng rng(5);
  const NormalizedAdjacency s(random_graph(12, 0.3, 5));
  const FeatureMatrix x(gaussian(12, 4, rng));
  GcnModel lin = init_model(4, 3, 3, ModelVariant::gcn, 8);
  lin.activation = Activation::identity;
  GcnModel sgc = lin;
  sgc.variant = ModelVariant::sgc;
  const ForwardResult a = forward(lin, s, x);
  const ForwardResult b = forward(sgc, s, x);
  CHECK((a.logits - b.logits).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("checkpoint round trip") {
  const auto path = std::filesystem::temp_directory_path() / "featprop_model_test.json";
  for (auto v : {ModelVariant::gcn, ModelVariant::sgc}) {
    const GcnModel m = init_model(5, 4, 3, v, 17);
    save_model(m, path);
    const GcnModel r = load_model(path);
    CHECK(r.variant == m.variant);
    CHECK(r.activation == m.activation);
    CHECK(r.theta0 == m.theta0);
    CHECK(r.theta1 == m.theta1);
  }
  std::filesystem::remove(path);
}

TEST_CASE("predict breaks ties toward the lowest class") {
  Matrix p(2, 3);
  p << 0.4, 0.4, 0.2, 0.1, 0.3, 0.6;
  CHECK(predict(p) == std::vector<int>{0, 2});
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InfeasibleError);
  cfg = {};
  cfg.hidden = 0;
  CHECK_THROWS_AS(cfg.validate(), InfeasibleError);
}
