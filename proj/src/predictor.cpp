#include "netgen/predictor.hpp"

#include "netgen/dataset.hpp"

namespace netgen {

std::string to_string(Pooling pooling) { return pooling == Pooling::Concat ? "concat" : "sum"; }

Pooling pooling_from_string(const std::string& name) {
  if (name == "concat") return Pooling::Concat;
  if (name == "sum") return Pooling::Sum;
  throw ConfigError("unknown pooling '" + name + "' (expected concat or sum)");
}

void GcnConfig::validate() const {
  if (widths.empty()) throw ConfigError("predictor.widths must list at least one layer");
  for (int w : widths) {
    if (w < 1) throw ConfigError("predictor.widths entries must be positive");
  }
  if (mlp_hidden < 1) throw ConfigError("predictor.mlp_hidden must be positive");
  if (classes < 2) throw ConfigError("classifier needs at least two classes");
}

Gcn::Gcn(Index in_features, const std::vector<int>& widths, Rng& rng) {
  Index in = in_features;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    weights_.emplace_back("gcn" + std::to_string(l) + ".weight", in, widths[l]);
    nn::glorot_uniform(weights_.back().value, in, widths[l], rng);
    in = widths[l];
  }
}

Matrix Gcn::forward(std::span<const Matrix> graphs, const Matrix& features) {
  if (graphs.empty()) throw ShapeError("gcn: empty batch");
  const Index v = graphs.front().rows();
  if (features.rows() != static_cast<Index>(graphs.size()) * v) {
    throw ShapeError("gcn: " + std::to_string(features.rows()) + " feature rows for " +
                     std::to_string(graphs.size()) + " graphs of " + std::to_string(v) + " nodes");
  }
  if (features.cols() != weights_.front().value.rows()) {
    throw ShapeError("gcn: feature width " + std::to_string(features.cols()) + ", expected " +
                     std::to_string(weights_.front().value.rows()));
  }
  graphs_.assign(graphs.begin(), graphs.end());
  for (const auto& a : graphs_) {
    if (a.rows() != v || a.cols() != v) throw ShapeError("gcn: adjacency " + shape_str(a) + " is not " + std::to_string(v) + "x" + std::to_string(v));
  }
  caches_.clear();
  Matrix h = features;
  for (auto& w : weights_) {
    Cache c;
    c.input = h;
    c.projected = h * w.value;
    Matrix z(c.projected.rows(), c.projected.cols());
    for (std::size_t b = 0; b < graphs_.size(); ++b) {
      const auto offset = static_cast<Index>(b) * v;
      z.middleRows(offset, v).noalias() = graphs_[b] * c.projected.middleRows(offset, v);
    }
    c.mask = (z.array() > 0.0).cast<double>().matrix();
    h = z.cwiseMax(0.0);
    caches_.push_back(std::move(c));
  }
  return h;
}

Matrix Gcn::backward(const Matrix& dout, std::vector<Matrix>* graph_grads) {
  if (caches_.empty()) throw ShapeError("gcn: backward before forward");
  const Index v = graphs_.front().rows();
  if (graph_grads != nullptr && graph_grads->size() != graphs_.size()) {
    throw ShapeError("gcn: graph gradient buffer size mismatch");
  }
  Matrix g = dout;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const auto& c = caches_[l];
    Matrix dz = g.cwiseProduct(c.mask);
    Matrix dprojected(dz.rows(), dz.cols());
    for (std::size_t b = 0; b < graphs_.size(); ++b) {
      const auto offset = static_cast<Index>(b) * v;
      dprojected.middleRows(offset, v).noalias() = graphs_[b].transpose() * dz.middleRows(offset, v);
      if (graph_grads != nullptr) {
        (*graph_grads)[b].noalias() += dz.middleRows(offset, v) * c.projected.middleRows(offset, v).transpose();
      }
    }
    weights_[l].grad.noalias() += c.input.transpose() * dprojected;
    g = dprojected * weights_[l].value.transpose();
  }
  return g;
}

nn::ParamList Gcn::params() {
  nn::ParamList out;
  for (auto& w : weights_) out.push_back(&w);
  return out;
}

Matrix pool_nodes(const Matrix& nodes, Index v, Pooling pooling) {
  if (v < 1 || nodes.rows() % v != 0) throw ShapeError("pool: node rows not a multiple of v");
  const Index batch = nodes.rows() / v;
  if (pooling == Pooling::Concat) {
    return Eigen::Map<const Matrix>(nodes.data(), batch, v * nodes.cols());
  }
  Matrix out(batch, nodes.cols());
  for (Index b = 0; b < batch; ++b) out.row(b) = nodes.middleRows(b * v, v).colwise().sum();
  return out;
}

Matrix pool_nodes_backward(const Matrix& dpooled, Index v, Pooling pooling) {
  if (pooling == Pooling::Concat) {
    if (dpooled.cols() % v != 0) throw ShapeError("pool: gradient width not a multiple of v");
    return Eigen::Map<const Matrix>(dpooled.data(), dpooled.rows() * v, dpooled.cols() / v);
  }
  Matrix out(dpooled.rows() * v, dpooled.cols());
  for (Index b = 0; b < dpooled.rows(); ++b) out.middleRows(b * v, v) = dpooled.row(b).replicate(v, 1);
  return out;
}

ClassifierHead::ClassifierHead(Index features, int hidden, int classes, Rng& rng)
    : norm_("head.norm", features), fc1_("head.fc1", features, hidden), fc2_("head.fc2", hidden, classes) {
  fc1_.init(rng);
  fc2_.init(rng);
}

Matrix ClassifierHead::forward(const Matrix& pooled, bool training) {
  Matrix h = norm_.forward(pooled, training);
  h = fc1_.forward(h, training);
  h = relu_.forward(h, training);
  return fc2_.forward(h, training);
}

Matrix ClassifierHead::backward(const Matrix& dlogits) {
  Matrix g = fc2_.backward(dlogits);
  g = relu_.backward(g);
  g = fc1_.backward(g);
  return norm_.backward(g);
}

nn::ParamList ClassifierHead::params() {
  nn::ParamList out = norm_.params();
  for (auto* p : fc1_.params()) out.push_back(p);
  for (auto* p : fc2_.params()) out.push_back(p);
  return out;
}

Matrix build_uniform_graph(int v) {
  if (v < 1) throw ShapeError("uniform graph needs v >= 1");
  return Matrix::Ones(v, v);
}

Matrix build_pearson_graph(const Matrix& x) { return pearson_features(x); }

}  // namespace netgen
