#include "netgen/graphgen.hpp"

#include "netgen/layers.hpp"
#include "netgen/log.hpp"

#include <cmath>
#include <map>

namespace netgen {

void LossWeights::validate() const {
  for (double w : {alpha, beta, gamma}) {
    if (!std::isfinite(w) || w < 0) throw ConfigError("loss weights must be finite and non-negative");
  }
}

Matrix generate_graph(const Matrix& h_e) {
  Matrix p = nn::softmax_rows(h_e);
  return p * p.transpose();
}

std::vector<Matrix> GraphGenerator::forward(const Matrix& embeddings, Index v) {
  if (v < 1 || embeddings.rows() % v != 0) {
    throw ShapeError("graph generator: " + std::to_string(embeddings.rows()) + " rows is not a multiple of v=" +
                     std::to_string(v));
  }
  v_ = v;
  probs_ = nn::softmax_rows(embeddings);
  std::vector<Matrix> graphs;
  const Index batch = embeddings.rows() / v;
  graphs.reserve(static_cast<std::size_t>(batch));
  for (Index b = 0; b < batch; ++b) {
    auto p = probs_.middleRows(b * v, v);
    graphs.emplace_back(p * p.transpose());
  }
  return graphs;
}

Matrix GraphGenerator::backward(const std::vector<Matrix>& graph_grads) const {
  if (static_cast<Index>(graph_grads.size()) * v_ != probs_.rows()) {
    throw ShapeError("graph generator: gradient batch does not match forward batch");
  }
  Matrix dprobs(probs_.rows(), probs_.cols());
  for (std::size_t b = 0; b < graph_grads.size(); ++b) {
    const auto offset = static_cast<Index>(b) * v_;
    auto p = probs_.middleRows(offset, v_);
    const Matrix& g = graph_grads[b];
    dprobs.middleRows(offset, v_) = (g + g.transpose()) * p;
  }
  return nn::softmax_rows_backward(probs_, dprobs);
}

GroupStats group_stats(std::span<const Matrix> graphs, std::span<const int> labels) {
  if (graphs.size() != labels.size()) throw ShapeError("group_stats: graphs and labels differ in length");
  std::map<int, ClassGroup> groups;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    auto& g = groups[labels[k]];
    g.label = labels[k];
    g.members.push_back(k);
    if (g.mean.size() == 0) {
      g.mean = graphs[k];
    } else {
      if (graphs[k].rows() != g.mean.rows() || graphs[k].cols() != g.mean.cols()) {
        throw ShapeError("group_stats: graphs differ in shape");
      }
      g.mean += graphs[k];
    }
  }
  GroupStats out;
  for (auto& [label, g] : groups) {
    const auto n = static_cast<double>(g.members.size());
    g.mean /= n;
    double var = 0.0;
    for (auto k : g.members) var += (graphs[k] - g.mean).squaredNorm();
    g.variance = var / n;
    out.push_back(std::move(g));
  }
  return out;
}

double group_intra_loss(const GroupStats& stats) {
  double total = 0.0;
  for (const auto& g : stats) total += g.variance;
  return total;
}

double group_inter_loss(const GroupStats& stats) {
  if (stats.size() < 2) {
    log::debug("group inter loss: fewer than two classes in batch, contributing 0");
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t a = 0; a < stats.size(); ++a) {
    for (std::size_t b = 0; b < stats.size(); ++b) {
      if (a != b) total -= (stats[a].mean - stats[b].mean).squaredNorm();
    }
  }
  return total;
}

double sparsity_loss(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.mean();
}

namespace {

std::map<int, std::vector<std::size_t>> members_by_label(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t k = 0; k < labels.size(); ++k) out[labels[k]].push_back(k);
  return out;
}

double mean_pairwise_distance(std::span<const Matrix> graphs, const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b) {
  double total = 0.0;
  for (auto i : a) {
    for (auto j : b) total += (graphs[i] - graphs[j]).squaredNorm();
  }
  return total / static_cast<double>(a.size() * b.size());
}

double direct_variance(std::span<const Matrix> graphs, const std::vector<std::size_t>& members) {
  Matrix mean = Matrix::Zero(graphs[members.front()].rows(), graphs[members.front()].cols());
  for (auto k : members) mean += graphs[k];
  mean /= static_cast<double>(members.size());
  double total = 0.0;
  for (auto k : members) total += (graphs[k] - mean).squaredNorm();
  return total / static_cast<double>(members.size());
}

}  // namespace

double group_intra_loss_bruteforce(std::span<const Matrix> graphs, std::span<const int> labels) {
  double total = 0.0;
  for (const auto& [label, members] : members_by_label(labels)) {
    total += 0.5 * mean_pairwise_distance(graphs, members, members);
  }
  return total;
}

double group_inter_loss_bruteforce(std::span<const Matrix> graphs, std::span<const int> labels) {
  const auto groups = members_by_label(labels);
  double total = 0.0;
  for (const auto& [la, a] : groups) {
    for (const auto& [lb, b] : groups) {
      if (la == lb) continue;
      total += direct_variance(graphs, a) + direct_variance(graphs, b) - mean_pairwise_distance(graphs, a, b);
    }
  }
  return total;
}

GraphRegularizers graph_regularizers(std::span<const Matrix> graphs, std::span<const int> labels,
                                     const LossWeights& weights, std::vector<Matrix>* grads) {
  GraphRegularizers out;
  if (graphs.empty()) return out;
  const auto stats = group_stats(graphs, labels);
  out.intra = group_intra_loss(stats);
  out.inter = group_inter_loss(stats);
  for (const auto& a : graphs) out.sparsity += sparsity_loss(a);
  const auto batch = static_cast<double>(graphs.size());
  out.sparsity /= batch;

  if (grads == nullptr) return out;
  if (grads->size() != graphs.size()) throw ShapeError("graph_regularizers: gradient buffer size mismatch");

  // d/dA_k of var_c is 2 (A_k - mean_c) / |S_c|; the mean's own dependence cancels.
  for (const auto& g : stats) {
    const double scale = weights.alpha * 2.0 / static_cast<double>(g.members.size());
    for (auto k : g.members) (*grads)[k] += scale * (graphs[k] - g.mean);
  }
  // Each ordered pair contributes twice per class, so d/dmean_a = -4 sum_b (mean_a - mean_b).
  if (stats.size() >= 2 && weights.beta != 0.0) {
    for (std::size_t a = 0; a < stats.size(); ++a) {
      Matrix dmean = Matrix::Zero(stats[a].mean.rows(), stats[a].mean.cols());
      for (std::size_t b = 0; b < stats.size(); ++b) {
        if (a != b) dmean -= 4.0 * (stats[a].mean - stats[b].mean);
      }
      dmean *= weights.beta / static_cast<double>(stats[a].members.size());
      for (auto k : stats[a].members) (*grads)[k] += dmean;
    }
  }
  if (weights.gamma != 0.0) {
    for (std::size_t k = 0; k < graphs.size(); ++k) {
      (*grads)[k].array() += weights.gamma / (batch * static_cast<double>(graphs[k].size()));
    }
  }
  return out;
}

}  // namespace netgen
