#include "netgen/interpret.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace netgen {

LabeledGraphs collect_graphs(Model& model, const Dataset& ds, const std::vector<std::size_t>& indices) {
  LabeledGraphs out;
  if (indices.empty()) return out;
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < indices.size(); start += kChunk) {
    const auto end = std::min(indices.size(), start + kChunk);
    std::vector<PreparedSample> prepared;
    prepared.reserve(end - start);
    for (std::size_t k = start; k < end; ++k) {
      const auto& s = ds.samples.at(indices[k]);
      prepared.push_back({zscore_normalize(s.x), pearson_features(s.x), s.label});
      out.labels.push_back(s.label);
    }
    std::vector<const PreparedSample*> ptrs;
    for (const auto& p : prepared) ptrs.push_back(&p);
    for (auto& g : model.generate_graphs(ptrs)) out.graphs.push_back(std::move(g));
  }
  return out;
}

Matrix mean_graph(std::span<const Matrix> graphs) {
  if (graphs.empty()) throw DataError("mean_graph: empty graph list");
  Matrix acc = graphs.front();
  for (std::size_t k = 1; k < graphs.size(); ++k) {
    if (graphs[k].rows() != acc.rows() || graphs[k].cols() != acc.cols()) throw ShapeError("mean_graph: shape mismatch");
    acc += graphs[k];
  }
  return acc / static_cast<double>(graphs.size());
}

EdgeSet edge_ttest(std::span<const Matrix> graphs, std::span<const int> labels, double alpha) {
  if (graphs.size() != labels.size()) throw ShapeError("edge_ttest: graphs and labels differ in length");
  std::vector<const Matrix*> group[2];
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    if (labels[k] == 0 || labels[k] == 1) group[labels[k]].push_back(&graphs[k]);
  }
  if (group[0].size() < 2 || group[1].size() < 2) {
    throw DataError("edge_ttest: each class needs at least two graphs");
  }
  const Index v = graphs.front().rows();
  for (const auto& g : graphs) {
    if (g.rows() != v || g.cols() != v) throw ShapeError("edge_ttest: graphs differ in shape");
  }

  // Per-class moments of every entry.
  Matrix mean[2], var[2];
  for (int c = 0; c < 2; ++c) {
    const auto n = static_cast<double>(group[c].size());
    mean[c] = Matrix::Zero(v, v);
    for (const auto* g : group[c]) mean[c] += *g;
    mean[c] /= n;
    var[c] = Matrix::Zero(v, v);
    for (const auto* g : group[c]) var[c] += (*g - mean[c]).cwiseAbs2();
    var[c] /= n - 1.0;
  }
  const auto n0 = static_cast<double>(group[0].size());
  const auto n1 = static_cast<double>(group[1].size());

  EdgeSet out;
  out.candidates = static_cast<std::size_t>(v * (v - 1) / 2);
  for (Index p = 0; p < v; ++p) {
    for (Index q = p + 1; q < v; ++q) {
      const double a = var[0](p, q) / n0;
      const double b = var[1](p, q) / n1;
      const double diff = mean[1](p, q) - mean[0](p, q);
      const double se2 = a + b;
      double t = 0.0;
      double pvalue = 1.0;
      if (se2 <= 0.0) {
        if (diff == 0.0) continue;
        t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        pvalue = 0.0;
      } else {
        t = diff / std::sqrt(se2);
        const double df = se2 * se2 / (a * a / (n0 - 1.0) + b * b / (n1 - 1.0));
        boost::math::students_t dist(df);
        pvalue = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
      }
      ++out.tested;
      if (pvalue < alpha) out.edges.push_back({static_cast<int>(p), static_cast<int>(q), t, pvalue});
    }
  }
  return out;
}

std::vector<ModuleScore> module_difference_scores(const EdgeSet& edges, const ModulePartition& partition, int v) {
  if (partition.empty()) throw DataError("module_difference_scores: empty partition");
  if (v < 1) throw DataError("module_difference_scores: v must be positive");
  partition.validate(v);
  std::vector<ModuleScore> out;
  for (const auto& [name, members] : partition.modules) {
    std::vector<bool> in(static_cast<std::size_t>(v), false);
    for (int roi : members) in[static_cast<std::size_t>(roi)] = true;
    double incidence = 0.0;
    for (const auto& e : edges.edges) {
      if (e.p < 0 || e.q < 0 || e.p >= v || e.q >= v) throw DataError("module_difference_scores: edge index out of range");
      incidence += (in[static_cast<std::size_t>(e.p)] ? 1.0 : 0.0) + (in[static_cast<std::size_t>(e.q)] ? 1.0 : 0.0);
    }
    out.push_back({name, incidence / (2.0 * v * static_cast<double>(members.size()))});
  }
  std::stable_sort(out.begin(), out.end(), [](const ModuleScore& a, const ModuleScore& b) {
    return a.score != b.score ? a.score > b.score : a.module < b.module;
  });
  return out;
}

void export_matrix(const Matrix& m, const std::filesystem::path& path) { write_matrix_csv(m, path); }

void export_heatmap(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  const double lo = m.size() ? m.minCoeff() : 0.0;
  const double hi = m.size() ? m.maxCoeff() : 0.0;
  const double range = hi - lo;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double scaled = range > 0 ? (m(i, j) - lo) / range : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled * 255.0))));
    }
  }
  if (!out) throw Error(path.string() + ": write failed");
}

void export_scores(const std::vector<ModuleScore>& scores, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  char buf[64];
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof buf, "%.9g", s.score);
    out << s.module << ',' << buf << '\n';
  }
  if (!out) throw Error(path.string() + ": write failed");
}

void export_edges(const EdgeSet& edges, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "p,q,t,pvalue\n";
  char buf[96];
  for (const auto& e : edges.edges) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g\n", e.p, e.q, e.t, e.pvalue);
    out << buf;
  }
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace netgen
