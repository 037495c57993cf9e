#include "netgen/training.hpp"

#include "netgen/log.hpp"
#include "netgen/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace netgen {

namespace {

// Stream tags for derive_seed(); one independent RNG per purpose.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kBatchStream = 3;

std::vector<const PreparedSample*> pointers(std::span<const PreparedSample> all, const std::vector<std::size_t>& idx) {
  std::vector<const PreparedSample*> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(&all[i]);
  return out;
}

std::vector<int> labels_of(Batch batch) {
  std::vector<int> out;
  out.reserve(batch.size());
  for (const auto* s : batch) out.push_back(s->label);
  return out;
}

Metrics evaluate_batch(Model& model, Batch batch, const LossWeights& weights, bool require_auroc) {
  if (batch.empty()) throw DataError("evaluate: empty sample set");
  auto out = model.forward(batch, false);
  const auto labels = labels_of(batch);
  Metrics m;
  const bool regularize = model.config().pipeline == Pipeline::LearnableGraph;
  m.loss = total_loss(out.logits, labels, regularize ? std::span<const Matrix>(out.graphs) : std::span<const Matrix>{},
                      weights, nullptr, nullptr);
  m.accuracy = accuracy(out.logits, labels);
  try {
    m.auroc = auroc_multiclass(nn::softmax_rows(out.logits), labels);
  } catch (const DataError&) {
    if (require_auroc) throw DataError("evaluate: AUROC undefined, the sample set holds a single class");
    m.auroc = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

struct Snapshot {
  std::vector<Matrix> values;

  static Snapshot take(Model& model) {
    Snapshot s;
    for (auto* p : model.params()) s.values.push_back(p->value);
    for (auto* p : model.buffers()) s.values.push_back(p->value);
    return s;
  }
  void restore(Model& model) const {
    std::size_t k = 0;
    for (auto* p : model.params()) p->value = values[k++];
    for (auto* p : model.buffers()) p->value = values[k++];
  }
};

void warn_if_ce_rises(const TrainHistory& history) {
  constexpr std::size_t kWindow = 10;
  const auto& e = history.epochs;
  if (e.size() < 2 * kWindow) return;
  auto smoothed = [&](std::size_t start) {
    double acc = 0.0;
    for (std::size_t k = start; k < start + kWindow; ++k) acc += e[k].train.loss.ce;
    return acc / kWindow;
  };
  const double first = smoothed(0);
  const double last = smoothed(e.size() - kWindow);
  if (last > first + 0.1 * std::abs(first)) {
    std::ostringstream msg;
    msg << "training CE rose from " << first << " to " << last << " (10-epoch smoothed)";
    log::warn(msg.str());
  }
}

}  // namespace

void TrainConfig::validate(int t) const {
  model.validate(t);
  loss.validate();
  split.validate();
  if (!(lr > 0) || !std::isfinite(lr)) throw ConfigError("train.lr must be positive");
  if (!(weight_decay >= 0) || !std::isfinite(weight_decay)) throw ConfigError("train.weight_decay must be non-negative");
  if (batch < 2) throw ConfigError("train.batch must be at least 2 (batch norm needs two samples)");
  if (epochs < 1) throw ConfigError("train.epochs must be positive");
}

LossBreakdown total_loss(const Matrix& logits, std::span<const int> labels, std::span<const Matrix> graphs,
                         const LossWeights& weights, Matrix* dlogits, std::vector<Matrix>* dgraphs) {
  LossBreakdown out;
  out.ce = cross_entropy(logits, labels, dlogits);
  if (dgraphs != nullptr) {
    dgraphs->clear();
    for (const auto& a : graphs) dgraphs->push_back(Matrix::Zero(a.rows(), a.cols()));
  }
  if (!graphs.empty()) {
    auto reg = graph_regularizers(graphs, labels, weights, dgraphs);
    out.intra = reg.intra;
    out.inter = reg.inter;
    out.sparsity = reg.sparsity;
  }
  out.total = out.ce + weights.alpha * out.intra + weights.beta * out.inter + weights.gamma * out.sparsity;
  return out;
}

Metrics evaluate(Model& model, std::span<const PreparedSample> samples, const LossWeights& weights,
                 bool require_auroc) {
  std::vector<const PreparedSample*> ptrs;
  ptrs.reserve(samples.size());
  for (const auto& s : samples) ptrs.push_back(&s);
  return evaluate_batch(model, ptrs, weights, require_auroc);
}

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& indices, int batch, Rng& rng) {
  auto order = indices;
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> out;
  const auto size = static_cast<std::size_t>(batch);
  for (std::size_t start = 0; start < order.size(); start += size) {
    const auto end = std::min(order.size(), start + size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (out.size() >= 2 && out.back().size() == 1) {
    out[out.size() - 2].push_back(out.back().front());
    out.pop_back();
  }
  return out;
}

SplitIndices split_for_run(const TrainConfig& config, const Dataset& ds) {
  SplitSpec spec = config.split;
  spec.seed = derive_seed(config.seed, kSplitStream);
  return split_indices(ds, spec);
}

TrainResult train(const TrainConfig& config, const Dataset& ds) {
  const auto prepared = prepare_samples(ds);
  return train(config, ds, prepared);
}

TrainResult train(const TrainConfig& config, const Dataset& ds, std::span<const PreparedSample> prepared) {
  ds.validate();
  config.validate(ds.t());
  if (prepared.size() != ds.size()) throw ShapeError("train: prepared samples do not match dataset");

  auto split = split_for_run(config, ds);
  if (split.train.size() < 2) throw DataError("train: training split needs at least two samples");

  ModelConfig model_config = config.model;
  model_config.predictor.classes = ds.num_classes();
  Model model(model_config, ds.v(), ds.t(), derive_seed(config.seed, kInitStream));
  const auto params = model.params();
  nn::Adam optimizer(params, {.lr = config.lr, .weight_decay = config.weight_decay});
  Rng batch_rng(derive_seed(config.seed, kBatchStream));

  const bool regularize = model_config.pipeline == Pipeline::LearnableGraph;
  const auto val_batch = pointers(prepared, split.val);

  TrainHistory history;
  Snapshot best = Snapshot::take(model);
  double best_score = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = make_batches(split.train, config.batch, batch_rng);
    Matrix epoch_probs(static_cast<Index>(split.train.size()), model_config.predictor.classes);
    Matrix epoch_logits(static_cast<Index>(split.train.size()), model_config.predictor.classes);
    std::vector<int> epoch_labels;
    epoch_labels.reserve(split.train.size());
    LossBreakdown sum;

    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto batch = pointers(prepared, batches[b]);
      const auto labels = labels_of(batch);
      auto out = model.forward(batch, true);
      Matrix dlogits;
      std::vector<Matrix> dgraphs;
      auto loss = total_loss(out.logits, labels,
                             regularize ? std::span<const Matrix>(out.graphs) : std::span<const Matrix>{},
                             config.loss, &dlogits, regularize ? &dgraphs : nullptr);
      if (!std::isfinite(loss.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      nn::zero_grads(params);
      model.backward(dlogits, regularize ? &dgraphs : nullptr);
      optimizer.step();

      const auto row = static_cast<Index>(epoch_labels.size());
      epoch_logits.middleRows(row, out.logits.rows()) = out.logits;
      epoch_probs.middleRows(row, out.logits.rows()) = nn::softmax_rows(out.logits);
      epoch_labels.insert(epoch_labels.end(), labels.begin(), labels.end());
      const auto w = static_cast<double>(labels.size());
      sum.total += w * loss.total;
      sum.ce += w * loss.ce;
      sum.intra += w * loss.intra;
      sum.inter += w * loss.inter;
      sum.sparsity += w * loss.sparsity;
    }

    EpochRecord record;
    record.epoch = epoch;
    const auto n = static_cast<double>(epoch_labels.size());
    record.train.loss = {sum.total / n, sum.ce / n, sum.intra / n, sum.inter / n, sum.sparsity / n};
    record.train.accuracy = accuracy(epoch_logits, epoch_labels);
    try {
      record.train.auroc = auroc_multiclass(epoch_probs, epoch_labels);
    } catch (const DataError&) {
      record.train.auroc = std::numeric_limits<double>::quiet_NaN();
    }

    double score = -std::numeric_limits<double>::infinity();
    if (!val_batch.empty()) {
      record.val = evaluate_batch(model, val_batch, config.loss, false);
      // A single-class validation split has no AUROC; rank epochs by CE then.
      score = std::isfinite(record.val.auroc) ? record.val.auroc : -record.val.loss.ce;
    } else {
      record.val.auroc = std::numeric_limits<double>::quiet_NaN();
      record.val.accuracy = std::numeric_limits<double>::quiet_NaN();
      score = -record.train.loss.ce;
    }
    if (!have_best || score > best_score) {
      have_best = true;
      best_score = score;
      best = Snapshot::take(model);
      history.selected_epoch = epoch;
    }
    history.epochs.push_back(record);
  }

  best.restore(model);
  warn_if_ce_rises(history);
  return {std::move(model), std::move(history), std::move(split)};
}

RunResult run_once(const TrainConfig& config, const Dataset& ds, std::span<const PreparedSample> prepared) {
  auto trained = train(config, ds, prepared);
  const auto test_batch = pointers(prepared, trained.split.test);
  if (test_batch.empty()) throw DataError("run: test split is empty");
  auto test = evaluate_batch(trained.model, test_batch, config.loss, true);
  return {std::move(trained), test};
}

double MetricsSummary::auroc_mean() const { return mean(auroc); }
double MetricsSummary::auroc_std() const { return stddev(auroc); }
double MetricsSummary::accuracy_mean() const { return mean(accuracy); }
double MetricsSummary::accuracy_std() const { return stddev(accuracy); }
void MetricsSummary::add(const Metrics& m) {
  auroc.push_back(m.auroc);
  accuracy.push_back(m.accuracy);
}

std::vector<AblationRow> ablation_variants(const LossWeights& base) {
  return {
      {"All", base, {}},
      {"CE", {0.0, 0.0, 0.0}, {}},
      {"CE+GL", {base.alpha, base.beta, 0.0}, {}},
      {"CE+SL", {0.0, 0.0, base.gamma}, {}},
  };
}

std::vector<AblationRow> ablate(const TrainConfig& base, const Dataset& ds, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("ablate: no seeds given");
  const auto prepared = prepare_samples(ds);
  auto rows = ablation_variants(base.loss);
  for (auto& row : rows) {
    for (auto seed : seeds) {
      TrainConfig cfg = base;
      cfg.loss = row.weights;
      cfg.seed = seed;
      row.summary.add(run_once(cfg, ds, prepared).test);
    }
  }
  return rows;
}

std::vector<SweepCell> sweep(const TrainConfig& base, std::span<const int> windows, std::span<const int> dims,
                             const Dataset& ds, std::span<const std::uint64_t> seeds) {
  if (windows.empty() || dims.empty()) throw ConfigError("sweep: empty grid");
  if (seeds.empty()) throw ConfigError("sweep: no seeds given");
  for (int w : windows) {
    for (int d : dims) {
      TrainConfig cfg = base;
      cfg.model.encoder.window = w;
      cfg.model.encoder.dim = d;
      cfg.validate(ds.t());
    }
  }
  const auto prepared = prepare_samples(ds);
  std::vector<SweepCell> cells;
  for (int w : windows) {
    for (int d : dims) {
      SweepCell cell{w, d, {}};
      for (auto seed : seeds) {
        TrainConfig cfg = base;
        cfg.model.encoder.window = w;
        cfg.model.encoder.dim = d;
        cfg.seed = seed;
        cell.summary.add(run_once(cfg, ds, prepared).test);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<std::string> comparison_pipelines() {
  return {"learnable-cnn", "learnable-gru", "gnn-uniform", "gnn-pearson", "seq-cnn", "seq-gru"};
}

ModelConfig comparison_model(const std::string& pipeline, const ModelConfig& base) {
  ModelConfig cfg = base;
  if (pipeline == "learnable-cnn" || pipeline == "learnable-gru") {
    cfg.pipeline = Pipeline::LearnableGraph;
  } else if (pipeline == "gnn-uniform") {
    cfg.pipeline = Pipeline::UniformGraph;
  } else if (pipeline == "gnn-pearson") {
    cfg.pipeline = Pipeline::PearsonGraph;
  } else if (pipeline == "seq-cnn" || pipeline == "seq-gru") {
    cfg.pipeline = Pipeline::SequenceOnly;
  } else {
    throw ConfigError("unknown comparison pipeline '" + pipeline + "'");
  }
  if (pipeline.ends_with("-cnn")) cfg.encoder.kind = EncoderKind::Cnn;
  if (pipeline.ends_with("-gru")) cfg.encoder.kind = EncoderKind::Gru;
  return cfg;
}

std::vector<CompareRow> compare(const TrainConfig& base, const Dataset& ds, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("compare: no seeds given");
  for (const auto& name : comparison_pipelines()) {
    TrainConfig cfg = base;
    cfg.model = comparison_model(name, base.model);
    cfg.validate(ds.t());
  }
  const auto prepared = prepare_samples(ds);
  std::vector<CompareRow> rows;
  for (const auto& name : comparison_pipelines()) {
    CompareRow row{name, {}};
    for (auto seed : seeds) {
      TrainConfig cfg = base;
      cfg.model = comparison_model(name, base.model);
      cfg.seed = seed;
      row.summary.add(run_once(cfg, ds, prepared).test);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace netgen
