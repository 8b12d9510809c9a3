#include "featprop/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "featprop/random.hpp"

namespace featprop {

std::optional<ModelVariant> parse_model_variant(std::string_view name) {
  if (name == "gcn") return ModelVariant::gcn;
  if (name == "sgc") return ModelVariant::sgc;
  return std::nullopt;
}

std::string_view variant_name(ModelVariant variant) {
  return variant == ModelVariant::sgc ? "sgc" : "gcn";
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InfeasibleError("learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw InfeasibleError("weight decay must be nonnegative");
  if (epochs < 0) throw InfeasibleError("epochs must be nonnegative");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InfeasibleError("Adam betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw InfeasibleError("Adam epsilon must be positive");
  if (hidden < 1) throw InfeasibleError("hidden size must be positive");
}

GcnModel init_model(int input_dim, int hidden, int n_classes, ModelVariant variant,
                    std::uint64_t seed) {
  Rng rng(seed);
  const auto glorot = [&](int rows, int cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    }
    return m;
  };
  GcnModel model;
  model.variant = variant;
  model.theta0 = glorot(input_dim, hidden);
  model.theta1 = glorot(hidden, n_classes);
  return model;
}

ModelInput::ModelInput(const NormalizedAdjacency& s, const FeatureMatrix& x, ModelVariant variant)
    : variant_(variant) {
  if (x.rows() != s.size()) {
    throw DimensionError("ModelInput: features have " + std::to_string(x.rows()) +
                         " rows, graph has " + std::to_string(s.size()) + " nodes");
  }
  first_layer_ = spmm(s, x.values());
  if (variant_ == ModelVariant::sgc) {
    first_layer_ = spmm(s, first_layer_);
    aggregation_ = CsrMatrix::identity(s.size());
  } else {
    aggregation_ = s.matrix();
  }
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

namespace {

bool uses_relu(const GcnModel& model) {
  return model.variant == ModelVariant::gcn && model.activation == Activation::relu;
}

void check_shapes(const GcnModel& model, Eigen::Index input_dim) {
  if (model.theta0.rows() != input_dim || model.theta0.cols() != model.theta1.rows()) {
    throw DimensionError("model shapes " + std::to_string(model.theta0.rows()) + "x" +
                         std::to_string(model.theta0.cols()) + ", " +
                         std::to_string(model.theta1.rows()) + "x" +
                         std::to_string(model.theta1.cols()) + " do not fit input width " +
                         std::to_string(input_dim));
  }
  if (!model.theta0.allFinite() || !model.theta1.allFinite()) {
    throw TrainingError("model has non-finite parameters");
  }
}

// Loss over the rows of `aggregation`, each of which is one training node:
// logits = aggregation * act(first * T0) * T1.
LossAndGradients restricted_loss(const GcnModel& model, const Matrix& first,
                                 const CsrMatrix& aggregation, std::span<const int> targets,
                                 double weight_decay, bool decay_all_layers) {
  const bool relu = uses_relu(model);
  const Matrix pre = first * model.theta0;
  const Matrix hidden = relu ? Matrix(pre.cwiseMax(0.0)) : pre;
  const Matrix embedding = spmm(aggregation, hidden);
  const Matrix logits = embedding * model.theta1;

  const auto m = static_cast<double>(targets.size());
  Matrix dlogits = softmax_rows(logits);
  double ce = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    ce += lse - logits(r, targets[r]);
    dlogits(r, targets[r]) -= 1.0;
  }
  ce /= m;
  dlogits /= m;

  LossAndGradients out;
  out.cross_entropy = ce;
  out.grads.theta1 = embedding.transpose() * dlogits;
  const Matrix dembedding = dlogits * model.theta1.transpose();
  Matrix dpre = spmm_transpose(aggregation, dembedding);
  if (relu) dpre = dpre.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  out.grads.theta0 = first.transpose() * dpre;

  double decay = 0.5 * weight_decay * model.theta0.squaredNorm();
  out.grads.theta0 += weight_decay * model.theta0;
  if (decay_all_layers) {
    decay += 0.5 * weight_decay * model.theta1.squaredNorm();
    out.grads.theta1 += weight_decay * model.theta1;
  }
  out.loss = ce + decay;
  return out;
}

std::vector<int> gather_labels(const LabelVector& labels, std::span<const NodeId> nodes,
                               int n_classes) {
  std::vector<int> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) {
    if (v < 0 || static_cast<std::size_t>(v) >= labels.size()) {
      throw IndexError("training node " + std::to_string(v) + " out of range");
    }
    if (labels[v] >= n_classes) throw DimensionError("label exceeds model class count");
    out.push_back(labels[v]);
  }
  return out;
}

// The receptive field of `pool`: the aggregation restricted to the pool rows
// and to the columns those rows touch, plus the matching first-layer rows.
struct RestrictedProblem {
  Matrix first;
  CsrMatrix aggregation;
};

RestrictedProblem restrict_to(const ModelInput& input, std::span<const NodeId> pool) {
  NodeSet cols;
  for (NodeId v : pool) {
    auto idx = input.aggregation().row_indices(v);
    cols.insert(cols.end(), idx.begin(), idx.end());
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

  RestrictedProblem out;
  out.first.resize(static_cast<Eigen::Index>(cols.size()), input.first_layer_input().cols());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.first.row(static_cast<Eigen::Index>(k)) = input.first_layer_input().row(cols[k]);
  }
  out.aggregation = input.aggregation().submatrix(pool, cols);
  return out;
}

}  // namespace

ForwardResult forward(const GcnModel& model, const ModelInput& input) {
  check_shapes(model, input.first_layer_input().cols());
  if (model.variant != input.variant()) throw DimensionError("model variant differs from input");
  ForwardResult out;
  const Matrix pre = input.first_layer_input() * model.theta0;
  out.hidden = uses_relu(model) ? Matrix(pre.cwiseMax(0.0)) : pre;
  out.embedding = spmm(input.aggregation(), out.hidden);
  out.logits = out.embedding * model.theta1;
  out.probabilities = softmax_rows(out.logits);
  return out;
}

ForwardResult forward(const GcnModel& model, const NormalizedAdjacency& s,
                      const FeatureMatrix& x) {
  return forward(model, ModelInput(s, x, model.variant));
}

LossAndGradients loss_and_gradients(const GcnModel& model, const ModelInput& input,
                                    const LabelVector& labels, std::span<const NodeId> train_idx,
                                    double weight_decay, bool decay_all_layers) {
  if (train_idx.empty()) throw InfeasibleError("loss_and_gradients: empty training set");
  check_shapes(model, input.first_layer_input().cols());
  if (static_cast<NodeId>(labels.size()) != input.num_nodes()) {
    throw DimensionError("loss_and_gradients: label count differs from node count");
  }
  const auto targets = gather_labels(labels, train_idx, model.n_classes());
  NodeSet all(input.num_nodes());
  for (NodeId i = 0; i < input.num_nodes(); ++i) all[i] = i;
  const CsrMatrix rows = input.aggregation().submatrix(train_idx, all);
  return restricted_loss(model, input.first_layer_input(), rows, targets, weight_decay,
                         decay_all_layers);
}

LossAndGradients loss_and_gradients(const GcnModel& model, const NormalizedAdjacency& s,
                                    const FeatureMatrix& x, const LabelVector& labels,
                                    std::span<const NodeId> train_idx, double weight_decay,
                                    bool decay_all_layers) {
  return loss_and_gradients(model, ModelInput(s, x, model.variant), labels, train_idx,
                            weight_decay, decay_all_layers);
}

void adam_step(AdamState& state, GcnModel& model, const Gradients& grads, const TrainConfig& cfg) {
  if (grads.theta0.rows() != model.theta0.rows() || grads.theta0.cols() != model.theta0.cols() ||
      grads.theta1.rows() != model.theta1.rows() || grads.theta1.cols() != model.theta1.cols()) {
    throw DimensionError("adam_step: gradient shapes differ from parameters");
  }
  if (!grads.theta0.allFinite() || !grads.theta1.allFinite()) {
    throw TrainingError("non-finite gradient at Adam step " + std::to_string(state.step + 1));
  }
  if (state.step == 0) {
    state.m0 = Matrix::Zero(model.theta0.rows(), model.theta0.cols());
    state.v0 = state.m0;
    state.m1 = Matrix::Zero(model.theta1.rows(), model.theta1.cols());
    state.v1 = state.m1;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const auto update = [&](Matrix& param, Matrix& m, Matrix& v, const Matrix& g) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    param.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
  };
  update(model.theta0, state.m0, state.v0, grads.theta0);
  update(model.theta1, state.m1, state.v1, grads.theta1);
}

GcnModel train(const ModelInput& input, const LabelVector& labels, std::span<const NodeId> pool,
               const TrainConfig& cfg, std::vector<double>* loss_history) {
  cfg.validate();
  if (pool.empty()) throw InfeasibleError("train: empty pool");
  if (static_cast<NodeId>(labels.size()) != input.num_nodes()) {
    throw DimensionError("train: label count differs from node count");
  }
  GcnModel model = init_model(static_cast<int>(input.first_layer_input().cols()), cfg.hidden,
                              labels.n_classes(), input.variant(), cfg.seed);
  const auto targets = gather_labels(labels, pool, model.n_classes());
  const RestrictedProblem problem = restrict_to(input, pool);

  AdamState state;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto lg = restricted_loss(model, problem.first, problem.aggregation, targets,
                                    cfg.weight_decay, cfg.decay_all_layers);
    if (loss_history != nullptr) loss_history->push_back(lg.loss);
    if (!std::isfinite(lg.loss) || !lg.grads.theta0.allFinite() || !lg.grads.theta1.allFinite()) {
      throw TrainingError("training diverged at epoch " + std::to_string(epoch));
    }
    adam_step(state, model, lg.grads, cfg);
    if (!model.theta0.allFinite() || !model.theta1.allFinite()) {
      throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch));
    }
  }
  return model;
}

GcnModel train(const Dataset& dataset, const NormalizedAdjacency& s, std::span<const NodeId> pool,
               const TrainConfig& cfg, ModelVariant variant) {
  return train(ModelInput(s, dataset.features, variant), dataset.labels, pool, cfg);
}

std::vector<int> predict(const Matrix& probabilities) {
  std::vector<int> out(probabilities.rows());
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    Eigen::Index arg = 0;
    for (Eigen::Index c = 1; c < probabilities.cols(); ++c) {
      if (probabilities(i, c) > probabilities(i, arg)) arg = c;
    }
    out[i] = static_cast<int>(arg);
  }
  return out;
}

// Checkpoint format, version 1:
//   {"format": "featprop-model", "version": 1, "variant": "gcn"|"sgc",
//    "activation": "relu"|"identity",
//    "theta0": {"rows": d, "cols": h, "values": [row-major]},
//    "theta1": {"rows": h, "cols": C, "values": [row-major]}}
void save_model(const GcnModel& model, const std::filesystem::path& path) {
  const auto dump = [](const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["values"] = std::vector<double>(m.data(), m.data() + m.size());
    return j;
  };
  nlohmann::json doc;
  doc["format"] = "featprop-model";
  doc["version"] = 1;
  doc["variant"] = variant_name(model.variant);
  doc["activation"] = model.activation == Activation::relu ? "relu" : "identity";
  doc["theta0"] = dump(model.theta0);
  doc["theta1"] = dump(model.theta1);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump() << '\n';
}

GcnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
  if (doc.value("format", "") != "featprop-model" || doc.value("version", 0) != 1) {
    throw ParseError(path.string(), 1, "not a version 1 featprop-model checkpoint");
  }
  const auto read = [&](const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto values = j.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
      throw ParseError(path.string(), 1, "parameter value count does not match shape");
    }
    return Matrix(Eigen::Map<const Matrix>(values.data(), rows, cols));
  };
  GcnModel model;
  const auto variant = parse_model_variant(doc.value("variant", ""));
  if (!variant) throw ParseError(path.string(), 1, "unknown model variant");
  model.variant = *variant;
  model.activation = doc.value("activation", "relu") == "identity" ? Activation::identity
                                                                    : Activation::relu;
  model.theta0 = read(doc.at("theta0"));
  model.theta1 = read(doc.at("theta1"));
  return model;
}

}  // namespace featprop
