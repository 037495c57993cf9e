#pragma once

#include "netgen/adam.hpp"
#include "netgen/dataset.hpp"
#include "netgen/graphgen.hpp"
#include "netgen/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace netgen {

struct TrainConfig {
  ModelConfig model;
  LossWeights loss;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  int batch = 16;
  int epochs = 500;
  std::uint64_t seed = 0;
  SplitSpec split;  // ratios only; the split seed is derived from `seed`

  void validate(int t) const;
};

struct LossBreakdown {
  double total = 0.0;
  double ce = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  double sparsity = 0.0;
};

/// L = CE + alpha * intra + beta * inter + gamma * sparsity over one batch.
/// `graphs` may be empty (no graph regularization). Gradients are written
/// when the output pointers are non-null; `dgraphs` is resized to match.
LossBreakdown total_loss(const Matrix& logits, std::span<const int> labels, std::span<const Matrix> graphs,
                         const LossWeights& weights, Matrix* dlogits, std::vector<Matrix>* dgraphs);

struct Metrics {
  double auroc = 0.0;
  double accuracy = 0.0;
  LossBreakdown loss;
};

struct EpochRecord {
  int epoch = 0;
  Metrics train;
  Metrics val;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int selected_epoch = 0;
};

struct TrainResult {
  Model model;
  TrainHistory history;
  SplitIndices split;
};

/// Evaluation-mode metrics over a set of samples. When `require_auroc` is
/// false a single-class set yields auroc = NaN instead of an error.
Metrics evaluate(Model& model, std::span<const PreparedSample> samples, const LossWeights& weights,
                 bool require_auroc = true);

/// The train/val/test split a run with this config uses.
SplitIndices split_for_run(const TrainConfig& config, const Dataset& ds);

/// Mini-batch Adam on total_loss. Returns the parameters of the earliest
/// epoch with the highest validation AUROC.
TrainResult train(const TrainConfig& config, const Dataset& ds);

/// Same as train() on already prepared samples.
TrainResult train(const TrainConfig& config, const Dataset& ds, std::span<const PreparedSample> prepared);

/// train() followed by evaluate() on the test split.
struct RunResult {
  TrainResult trained;
  Metrics test;
};
RunResult run_once(const TrainConfig& config, const Dataset& ds, std::span<const PreparedSample> prepared);

/// Fixed-order batches for one epoch: a seeded shuffle cut into chunks of
/// `batch`; a trailing chunk of one sample is merged into the previous chunk.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& indices, int batch, Rng& rng);

struct MetricsSummary {
  std::vector<double> auroc, accuracy;
  double auroc_mean() const;
  double auroc_std() const;
  double accuracy_mean() const;
  double accuracy_std() const;
  void add(const Metrics& m);
};

struct AblationRow {
  std::string variant;  // All, CE, CE+GL, CE+SL
  LossWeights weights;
  MetricsSummary summary;
};

/// The four regularizer variants derived from the base weights.
std::vector<AblationRow> ablation_variants(const LossWeights& base);

std::vector<AblationRow> ablate(const TrainConfig& base, const Dataset& ds, std::span<const std::uint64_t> seeds);

struct SweepCell {
  int window = 0;
  int dim = 0;
  MetricsSummary summary;
};

std::vector<SweepCell> sweep(const TrainConfig& base, std::span<const int> windows, std::span<const int> dims,
                             const Dataset& ds, std::span<const std::uint64_t> seeds);

struct CompareRow {
  std::string pipeline;
  MetricsSummary summary;
};

/// Names of the compared pipelines, in table order.
std::vector<std::string> comparison_pipelines();
/// Model configuration of a named comparison pipeline on top of `base`.
ModelConfig comparison_model(const std::string& pipeline, const ModelConfig& base);

std::vector<CompareRow> compare(const TrainConfig& base, const Dataset& ds, std::span<const std::uint64_t> seeds);

}  // namespace netgen
