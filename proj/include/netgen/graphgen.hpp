#pragma once

#include "netgen/tensor.hpp"

#include <span>
#include <vector>

namespace netgen {

struct LossWeights {
  double alpha = 1e-3;  // group intra
  double beta = 1e-3;   // group inter
  double gamma = 1e-4;  // sparsity

  void validate() const;
};

/// A = P P^T with P = softmax over the embedding axis of h_e (v x d).
Matrix generate_graph(const Matrix& h_e);

/// Batched generator with backward. Embeddings of B samples arrive stacked
/// as (B * v) x d; one v x v graph is produced per sample.
class GraphGenerator {
 public:
  std::vector<Matrix> forward(const Matrix& embeddings, Index v);
  Matrix backward(const std::vector<Matrix>& graph_grads) const;
  const Matrix& probabilities() const { return probs_; }

 private:
  Matrix probs_;
  Index v_ = 0;
};

/// Per-class batch statistics of generated graphs.
struct ClassGroup {
  int label = 0;
  std::vector<std::size_t> members;  // positions within the batch
  Matrix mean;
  double variance = 0.0;  // mean squared Frobenius distance to `mean`
};

/// Classes ordered by label; classes absent from the batch are omitted.
using GroupStats = std::vector<ClassGroup>;

GroupStats group_stats(std::span<const Matrix> graphs, std::span<const int> labels);

/// Sum of per-class variances.
double group_intra_loss(const GroupStats& stats);

/// -sum over ordered pairs (a, b), a != b, of ||mean_a - mean_b||^2.
/// Zero when fewer than two classes are present.
double group_inter_loss(const GroupStats& stats);

/// Mean of all entries.
double sparsity_loss(const Matrix& a);

// O(n^2) reference evaluations used to audit the fast paths above.

/// Sum over classes of (1 / 2|S|^2) sum_{i,j in S} ||A_i - A_j||^2.
double group_intra_loss_bruteforce(std::span<const Matrix> graphs, std::span<const int> labels);

/// Sum over ordered pairs (a, b) of var_a + var_b - mean_{i in a, j in b} ||A_i - A_j||^2,
/// with each variance evaluated directly from its definition.
double group_inter_loss_bruteforce(std::span<const Matrix> graphs, std::span<const int> labels);

struct GraphRegularizers {
  double intra = 0.0;
  double inter = 0.0;
  double sparsity = 0.0;  // averaged over the batch graphs
};

/// Evaluates the three regularizers over a batch. When `grads` is non-null
/// it must hold one v x v matrix per graph; the weighted gradient
/// alpha * d(intra) + beta * d(inter) + gamma * d(sparsity) is added to it.
GraphRegularizers graph_regularizers(std::span<const Matrix> graphs, std::span<const int> labels,
                                     const LossWeights& weights, std::vector<Matrix>* grads);

}  // namespace netgen
