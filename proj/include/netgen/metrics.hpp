#pragma once

#include "netgen/tensor.hpp"

#include <span>
#include <vector>

namespace netgen {

/// Probability that a random positive (label 1) outranks a random negative
/// (label 0), ties counting one half. Computed from average ranks.
/// Throws DataError unless both labels are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Macro one-vs-rest AUROC over class probabilities (rows = samples).
/// For two classes this is auroc() on the class-1 column.
double auroc_multiclass(const Matrix& probabilities, std::span<const int> labels);

/// Argmax accuracy; ties go to the lowest class index.
double accuracy(const Matrix& logits, std::span<const int> labels);

/// Mean cross-entropy of softmax(logits). When `dlogits` is non-null it
/// receives d(mean CE)/d(logits).
double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* dlogits);

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> values);

}  // namespace netgen
