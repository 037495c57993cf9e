#pragma once

#include "netgen/dataset.hpp"
#include "netgen/model.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace netgen {

struct LabeledGraphs {
  std::vector<Matrix> graphs;
  std::vector<int> labels;
};

/// One graph per sample from the encoder and generator in evaluation mode
/// (fixed adjacencies for the uniform and Pearson pipelines).
LabeledGraphs collect_graphs(Model& model, const Dataset& ds, const std::vector<std::size_t>& indices);

/// Elementwise mean; throws DataError on an empty list.
Matrix mean_graph(std::span<const Matrix> graphs);

struct EdgeTest {
  int p = 0;
  int q = 0;
  double t = 0.0;
  double pvalue = 1.0;
};

struct EdgeSet {
  std::vector<EdgeTest> edges;  // significant edges, p < q, in row-major order
  std::size_t tested = 0;       // edges with a defined statistic
  std::size_t candidates = 0;   // v (v - 1) / 2
};

/// Two-sided Welch t-test between class 0 and class 1 on every upper-triangle
/// edge, t = (mean1 - mean0) / se. An edge is reported iff its p-value is below `alpha`. Edges that are
/// constant and equal in both classes have no statistic and are skipped.
EdgeSet edge_ttest(std::span<const Matrix> graphs, std::span<const int> labels, double alpha);

struct ModuleScore {
  std::string module;
  double score = 0.0;
};

/// T_u = sum over significant (p, q) of [1(p in M_u) + 1(q in M_u)] / (2 v |M_u|),
/// sorted by descending score, ties by module name.
std::vector<ModuleScore> module_difference_scores(const EdgeSet& edges, const ModulePartition& partition, int v);

void export_matrix(const Matrix& m, const std::filesystem::path& path);
/// Binary PGM (P5), min-max scaled to 0..255, row-major.
void export_heatmap(const Matrix& m, const std::filesystem::path& path);
/// `module,score` lines in ranked order.
void export_scores(const std::vector<ModuleScore>& scores, const std::filesystem::path& path);
/// Header `p,q,t,pvalue` then one line per edge.
void export_edges(const EdgeSet& edges, const std::filesystem::path& path);

}  // namespace netgen
