#include "featprop/metrics.hpp"

#include <cmath>
#include <vector>

namespace featprop {

namespace {

void check_lengths(std::span<const int> pred, const LabelVector& truth) {
  if (pred.size() != truth.size()) {
    throw DimensionError("metrics: " + std::to_string(pred.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
  }
  if (pred.empty()) throw DimensionError("metrics: empty input");
}

}  // namespace

double macro_f1(std::span<const int> pred, const LabelVector& truth) {
  check_lengths(pred, truth);
  const int c = truth.n_classes();
  std::vector<double> tp(c, 0.0), fp(c, 0.0), fn(c, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i];
    const int t = truth[i];
    if (p < 0 || p >= c) throw IndexError("macro_f1: predicted class out of range");
    if (p == t) {
      tp[p] += 1.0;
    } else {
      fp[p] += 1.0;
      fn[t] += 1.0;
    }
  }
  double sum = 0.0;
  for (int k = 0; k < c; ++k) {
    const double denom = 2.0 * tp[k] + fp[k] + fn[k];
    sum += denom > 0.0 ? 2.0 * tp[k] / denom : 0.0;
  }
  return sum / static_cast<double>(c);
}

double micro_f1(std::span<const int> pred, const LabelVector& truth) {
  check_lengths(pred, truth);
  // Pooled counts: every wrong prediction is one FP and one FN, so
  // F1 = 2TP / (2TP + FP + FN) = TP / N.
  std::size_t tp = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) tp += pred[i] == truth[i] ? 1 : 0;
  const double n = static_cast<double>(pred.size());
  const double wrong = n - static_cast<double>(tp);
  return 2.0 * static_cast<double>(tp) / (2.0 * static_cast<double>(tp) + 2.0 * wrong);
}

double accuracy(std::span<const int> pred, const LabelVector& truth) {
  check_lengths(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace featprop
