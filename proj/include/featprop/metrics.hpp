#pragma once

#include <span>

#include "featprop/graph.hpp"

namespace featprop {

/// Unweighted mean of per-class F1 over all `truth.n_classes()` classes.
/// A class absent from both prediction and truth scores 0.
double macro_f1(std::span<const int> pred, const LabelVector& truth);

/// F1 over globally pooled counts; equals accuracy for single-label input.
double micro_f1(std::span<const int> pred, const LabelVector& truth);

double accuracy(std::span<const int> pred, const LabelVector& truth);

/// Shannon entropy (natural log) of one probability row; 0 log 0 = 0.
double entropy(std::span<const double> probabilities);

}  // namespace featprop
