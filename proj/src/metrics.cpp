#include "netgen/metrics.hpp"

#include "netgen/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace netgen {

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auroc: scores and labels differ in length");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("auroc: labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw DataError("auroc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average of ranks i+1 .. j+1
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += rank;
    }
    i = j + 1;
  }
  const auto p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double auroc_multiclass(const Matrix& probabilities, std::span<const int> labels) {
  if (probabilities.rows() != static_cast<Index>(labels.size())) throw ShapeError("auroc: row count mismatch");
  const Index classes = probabilities.cols();
  std::vector<double> scores(labels.size());
  std::vector<int> binary(labels.size());
  auto one_vs_rest = [&](Index c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = probabilities(static_cast<Index>(i), c);
      binary[i] = labels[i] == c ? 1 : 0;
    }
    return auroc(scores, binary);
  };
  if (classes == 2) return one_vs_rest(1);
  double total = 0.0;
  for (Index c = 0; c < classes; ++c) total += one_vs_rest(c);
  return total / static_cast<double>(classes);
}

double accuracy(const Matrix& logits, std::span<const int> labels) {
  if (logits.rows() != static_cast<Index>(labels.size())) throw ShapeError("accuracy: row count mismatch");
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    correct += best == labels[static_cast<std::size_t>(i)] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* dlogits) {
  if (logits.rows() != static_cast<Index>(labels.size())) throw ShapeError("cross_entropy: row count mismatch");
  const auto n = static_cast<double>(labels.size());
  Matrix probs = nn::softmax_rows(logits);
  double loss = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw DataError("cross_entropy: label out of range");
    const double top = logits.row(i).maxCoeff();
    const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
    loss += lse - logits(i, y);
  }
  if (dlogits != nullptr) {
    *dlogits = probs;
    for (Index i = 0; i < logits.rows(); ++i) (*dlogits)(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    *dlogits /= n;
  }
  return loss / n;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double x : values) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace netgen
