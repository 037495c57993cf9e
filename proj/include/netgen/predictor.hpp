#pragma once

#include "netgen/layers.hpp"

#include <span>
#include <string>
#include <vector>

namespace netgen {

enum class Pooling { Concat, Sum };

std::string to_string(Pooling pooling);
Pooling pooling_from_string(const std::string& name);

struct GcnConfig {
  std::vector<int> widths{32, 32, 8};
  Pooling pooling = Pooling::Concat;
  int mlp_hidden = 32;
  int classes = 2;

  void validate() const;
};

/// Stack of h <- ReLU(A h W) layers without degree normalization or bias.
/// Node features of B samples arrive stacked as (B * v) x f together with
/// one v x v adjacency per sample.
class Gcn {
 public:
  Gcn(Index in_features, const std::vector<int>& widths, Rng& rng);

  Matrix forward(std::span<const Matrix> graphs, const Matrix& features);
  /// Returns the gradient w.r.t. the input features. When `graph_grads` is
  /// non-null the adjacency gradients are added to it (one per sample).
  Matrix backward(const Matrix& dout, std::vector<Matrix>* graph_grads);
  nn::ParamList params();

  Index out_features() const { return weights_.back().value.cols(); }

 private:
  struct Cache {
    Matrix input;      // h
    Matrix projected;  // h W
    Matrix mask;       // ReLU derivative of A h W
  };
  std::vector<nn::ParamTensor> weights_;
  std::vector<Cache> caches_;
  std::vector<Matrix> graphs_;
};

/// Concat flattens the v node rows of each sample in node order; sum adds them.
Matrix pool_nodes(const Matrix& nodes, Index v, Pooling pooling);
Matrix pool_nodes_backward(const Matrix& dpooled, Index v, Pooling pooling);

/// BatchNorm1d -> Dense(hidden) -> ReLU -> Dense(classes).
class ClassifierHead {
 public:
  ClassifierHead(Index features, int hidden, int classes, Rng& rng);
  Matrix forward(const Matrix& pooled, bool training);
  Matrix backward(const Matrix& dlogits);
  nn::ParamList params();
  nn::ParamList buffers() { return norm_.buffers(); }

 private:
  nn::BatchNorm1d norm_;
  nn::Dense fc1_;
  nn::Relu relu_;
  nn::Dense fc2_;
};

/// All-ones v x v adjacency.
Matrix build_uniform_graph(int v);

/// Signed Pearson correlation matrix of the rows of x, used as adjacency as is.
Matrix build_pearson_graph(const Matrix& x);

}  // namespace netgen
