#include "netgen/model.hpp"

namespace netgen {

std::string to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::LearnableGraph: return "learnable";
    case Pipeline::UniformGraph: return "uniform";
    case Pipeline::PearsonGraph: return "pearson";
    case Pipeline::SequenceOnly: return "sequence";
  }
  return "learnable";
}

Pipeline pipeline_from_string(const std::string& name) {
  if (name == "learnable") return Pipeline::LearnableGraph;
  if (name == "uniform") return Pipeline::UniformGraph;
  if (name == "pearson") return Pipeline::PearsonGraph;
  if (name == "sequence") return Pipeline::SequenceOnly;
  throw ConfigError("unknown pipeline '" + name + "' (expected learnable, uniform, pearson or sequence)");
}

void ModelConfig::validate(int t) const {
  predictor.validate();
  if (uses_encoder()) encoder.validate(t);
}

std::vector<PreparedSample> prepare_samples(const Dataset& ds) {
  std::vector<PreparedSample> out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples) {
    Matrix z = zscore_normalize(s.x);
    out.push_back({z, pearson_features(s.x), s.label});
  }
  return out;
}

Model::Model(ModelConfig config, int v, int t, std::uint64_t seed) : config_(std::move(config)), v_(v), t_(t) {
  config_.validate(t);
  if (v < 2) throw ConfigError("model needs v >= 2");
  Rng rng(seed);
  if (config_.uses_encoder()) encoder_ = make_encoder(config_.encoder, t, rng);
  Index pooled = 0;
  if (config_.uses_gcn()) {
    gcn_.emplace(v, config_.predictor.widths, rng);
    pooled = config_.predictor.pooling == Pooling::Concat ? v * gcn_->out_features() : gcn_->out_features();
  } else {
    pooled = static_cast<Index>(v) * config_.encoder.dim;
  }
  head_.emplace(pooled, config_.predictor.mlp_hidden, config_.predictor.classes, rng);
}

Matrix Model::stack_series(Batch batch) const {
  Matrix out(static_cast<Index>(batch.size()) * v_, t_);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b]->series.rows() != v_ || batch[b]->series.cols() != t_) {
      throw ShapeError("model: sample series " + shape_str(batch[b]->series) + ", expected " +
                       std::to_string(v_) + "x" + std::to_string(t_));
    }
    out.middleRows(static_cast<Index>(b) * v_, v_) = batch[b]->series;
  }
  return out;
}

std::vector<Matrix> Model::fixed_graphs(Batch batch) const {
  std::vector<Matrix> graphs;
  graphs.reserve(batch.size());
  for (const auto* s : batch) {
    graphs.push_back(config_.pipeline == Pipeline::UniformGraph ? build_uniform_graph(v_) : s->features);
  }
  return graphs;
}

BatchOutput Model::forward(Batch batch, bool training) {
  if (batch.empty()) throw ShapeError("model: empty batch");
  batch_size_ = static_cast<Index>(batch.size());
  BatchOutput out;
  Matrix pooled;
  if (config_.pipeline == Pipeline::SequenceOnly) {
    Matrix h = encoder_->forward(stack_series(batch), training);
    pooled = pool_nodes(h, v_, Pooling::Concat);
  } else {
    if (config_.pipeline == Pipeline::LearnableGraph) {
      Matrix h = encoder_->forward(stack_series(batch), training);
      out.graphs = generator_.forward(h, v_);
    } else {
      out.graphs = fixed_graphs(batch);
    }
    Matrix features(batch_size_ * v_, v_);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (batch[b]->features.rows() != v_ || batch[b]->features.cols() != v_) {
        throw ShapeError("model: node features " + shape_str(batch[b]->features) + ", expected " +
                         std::to_string(v_) + "x" + std::to_string(v_));
      }
      features.middleRows(static_cast<Index>(b) * v_, v_) = batch[b]->features;
    }
    Matrix nodes = gcn_->forward(out.graphs, features);
    pooled = pool_nodes(nodes, v_, config_.predictor.pooling);
  }
  out.logits = head_->forward(pooled, training);
  return out;
}

void Model::backward(const Matrix& dlogits, const std::vector<Matrix>* graph_grads) {
  if (dlogits.rows() != batch_size_) throw ShapeError("model: logit gradient batch mismatch");
  Matrix dpooled = head_->backward(dlogits);
  if (config_.pipeline == Pipeline::SequenceOnly) {
    encoder_->backward(pool_nodes_backward(dpooled, v_, Pooling::Concat));
    return;
  }
  Matrix dnodes = pool_nodes_backward(dpooled, v_, config_.predictor.pooling);
  if (config_.pipeline != Pipeline::LearnableGraph) {
    gcn_->backward(dnodes, nullptr);
    return;
  }
  std::vector<Matrix> dgraphs;
  if (graph_grads != nullptr) {
    if (static_cast<Index>(graph_grads->size()) != batch_size_) throw ShapeError("model: graph gradient batch mismatch");
    dgraphs = *graph_grads;
  } else {
    dgraphs.assign(static_cast<std::size_t>(batch_size_), Matrix::Zero(v_, v_));
  }
  gcn_->backward(dnodes, &dgraphs);
  encoder_->backward(generator_.backward(dgraphs));
}

std::vector<Matrix> Model::generate_graphs(Batch batch) {
  if (config_.pipeline == Pipeline::SequenceOnly) throw ConfigError("sequence-only pipeline builds no graph");
  if (config_.pipeline != Pipeline::LearnableGraph) return fixed_graphs(batch);
  Matrix h = encoder_->forward(stack_series(batch), false);
  return generator_.forward(h, v_);
}

nn::ParamList Model::params() {
  nn::ParamList out;
  if (encoder_) out = encoder_->params();
  if (gcn_) {
    for (auto* p : gcn_->params()) out.push_back(p);
  }
  for (auto* p : head_->params()) out.push_back(p);
  return out;
}

nn::ParamList Model::buffers() { return head_->buffers(); }

}  // namespace netgen
