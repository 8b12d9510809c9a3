#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "featprop/graph.hpp"

namespace featprop {

enum class ModelVariant { gcn, sgc };

std::optional<ModelVariant> parse_model_variant(std::string_view name);
std::string_view variant_name(ModelVariant variant);

/// Hidden-layer nonlinearity of the GCN variant. `identity` turns the GCN
/// into the linear model S(S X T0) T1, which is what SGC computes.
enum class Activation { relu, identity };

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int hidden = 16;
  std::uint64_t seed = 0;
  /// Apply weight decay to both layers instead of the first only.
  bool decay_all_layers = false;

  /// Throws InfeasibleError on out-of-range values.
  void validate() const;
};

/// Two-layer model: theta0 is d x h, theta1 is h x C.
struct GcnModel {
  ModelVariant variant = ModelVariant::gcn;
  Activation activation = Activation::relu;
  Matrix theta0;
  Matrix theta1;

  int input_dim() const { return static_cast<int>(theta0.rows()); }
  int hidden_size() const { return static_cast<int>(theta0.cols()); }
  int n_classes() const { return static_cast<int>(theta1.cols()); }
};

/// Glorot-uniform initialization, deterministic per seed.
GcnModel init_model(int input_dim, int hidden, int n_classes, ModelVariant variant,
                    std::uint64_t seed);

/// Quantities shared by every model trained on one graph: the first-layer
/// input (S X for gcn, S^2 X for sgc) and the output aggregation (S for gcn,
/// identity for sgc).
class ModelInput {
 public:
  ModelInput(const NormalizedAdjacency& s, const FeatureMatrix& x, ModelVariant variant);

  ModelVariant variant() const noexcept { return variant_; }
  NodeId num_nodes() const noexcept { return first_layer_.rows(); }
  const Matrix& first_layer_input() const noexcept { return first_layer_; }
  const CsrMatrix& aggregation() const noexcept { return aggregation_; }

 private:
  ModelVariant variant_;
  Matrix first_layer_;
  CsrMatrix aggregation_;
};

struct ForwardResult {
  Matrix probabilities;  // n x C, rows sum to 1
  Matrix logits;         // n x C
  Matrix hidden;         // n x h: ReLU(S X T0) for gcn, S^2 X T0 for sgc
  Matrix embedding;      // n x h: input of the output layer (S * hidden for gcn)
};

ForwardResult forward(const GcnModel& model, const ModelInput& input);
ForwardResult forward(const GcnModel& model, const NormalizedAdjacency& s, const FeatureMatrix& x);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

struct Gradients {
  Matrix theta0;
  Matrix theta1;
};

struct LossAndGradients {
  double loss = 0.0;            // cross-entropy + decay
  double cross_entropy = 0.0;   // mean over the training nodes
  Gradients grads;
};

/// Mean softmax cross-entropy over `train_idx` plus (weight_decay/2)|T0|^2
/// (and |T1|^2 when `decay_all_layers`), with analytic gradients.
LossAndGradients loss_and_gradients(const GcnModel& model, const ModelInput& input,
                                    const LabelVector& labels, std::span<const NodeId> train_idx,
                                    double weight_decay, bool decay_all_layers = false);
LossAndGradients loss_and_gradients(const GcnModel& model, const NormalizedAdjacency& s,
                                    const FeatureMatrix& x, const LabelVector& labels,
                                    std::span<const NodeId> train_idx, double weight_decay,
                                    bool decay_all_layers = false);

struct AdamState {
  Matrix m0, v0, m1, v1;
  long step = 0;
};

/// One bias-corrected Adam update of both parameter matrices. Throws
/// TrainingError on a non-finite gradient.
void adam_step(AdamState& state, GcnModel& model, const Gradients& grads, const TrainConfig& cfg);

/// Full-batch training on `pool` for cfg.epochs epochs from a fresh seeded
/// initialization; returns the final-epoch model. Only the receptive field of
/// the pool enters the per-epoch computation.
GcnModel train(const ModelInput& input, const LabelVector& labels, std::span<const NodeId> pool,
               const TrainConfig& cfg, std::vector<double>* loss_history = nullptr);
GcnModel train(const Dataset& dataset, const NormalizedAdjacency& s, std::span<const NodeId> pool,
               const TrainConfig& cfg, ModelVariant variant);

/// Argmax per row; ties go to the lowest class.
std::vector<int> predict(const Matrix& probabilities);

/// Checkpoint: json with a format tag, variant, shapes and row-major values.
void save_model(const GcnModel& model, const std::filesystem::path& path);
GcnModel load_model(const std::filesystem::path& path);

}  // namespace featprop
