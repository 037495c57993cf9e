#pragma once

#include "netgen/dataset.hpp"
#include "netgen/encoders.hpp"
#include "netgen/graphgen.hpp"
#include "netgen/predictor.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netgen {

/// Which end-to-end pipeline a model implements.
enum class Pipeline {
  LearnableGraph,  // encoder -> graph generator -> GCN -> head
  UniformGraph,    // all-ones adjacency -> GCN -> head
  PearsonGraph,    // signed Pearson adjacency -> GCN -> head
  SequenceOnly,    // encoder -> concat -> head, no graph
};

std::string to_string(Pipeline pipeline);
Pipeline pipeline_from_string(const std::string& name);

struct ModelConfig {
  Pipeline pipeline = Pipeline::LearnableGraph;
  EncoderConfig encoder;
  GcnConfig predictor;

  bool uses_encoder() const { return pipeline == Pipeline::LearnableGraph || pipeline == Pipeline::SequenceOnly; }
  bool uses_gcn() const { return pipeline != Pipeline::SequenceOnly; }
  void validate(int t) const;
};

/// Model-ready view of one sample: z-scored series and Pearson node features.
struct PreparedSample {
  Matrix series;
  Matrix features;
  int label = 0;
};

std::vector<PreparedSample> prepare_samples(const Dataset& ds);

using Batch = std::span<const PreparedSample* const>;

struct BatchOutput {
  Matrix logits;
  std::vector<Matrix> graphs;  // adjacency per sample; empty for SequenceOnly
};

class Model {
 public:
  Model(ModelConfig config, int v, int t, std::uint64_t seed);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  BatchOutput forward(Batch batch, bool training);

  /// Backpropagates the logit gradient of the last forward. For a learnable
  /// graph, `graph_grads` (one v x v matrix per sample, or null) carries the
  /// regularizer gradient on the generated adjacencies.
  void backward(const Matrix& dlogits, const std::vector<Matrix>* graph_grads);

  /// Encoder and generator only, evaluation mode.
  std::vector<Matrix> generate_graphs(Batch batch);

  nn::ParamList params();
  nn::ParamList buffers();

  const ModelConfig& config() const { return config_; }
  int v() const { return v_; }
  int t() const { return t_; }

 private:
  Matrix stack_series(Batch batch) const;
  std::vector<Matrix> fixed_graphs(Batch batch) const;

  ModelConfig config_;
  int v_, t_;
  std::unique_ptr<Encoder> encoder_;
  GraphGenerator generator_;
  std::optional<Gcn> gcn_;
  std::optional<ClassifierHead> head_;
  Index batch_size_ = 0;
};

}  // namespace netgen
