#include "netgen/checkpoint.hpp"
#include "netgen/metrics.hpp"
#include "netgen/synthetic.hpp"
#include "netgen/training.hpp"

#include "composite.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

using namespace netgen;
using testing::random_matrix;

namespace {

// Concordant pairs plus half the ties over all positive/negative pairs.
double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

Dataset small_dataset(std::uint64_t seed = 3) {
  SynthSpec spec;
  spec.v = 6;
  spec.t = 40;
  spec.n = 40;
  spec.modules = {{"a", 3}, {"b", 3}};
  spec.planted = "a";
  return generate_synthetic(spec, seed);
}

TrainConfig small_config(EncoderKind kind = EncoderKind::Gru) {
  TrainConfig c;
  c.model.encoder.kind = kind;
  c.model.encoder.window = 4;
  c.model.encoder.dim = 4;
  c.model.predictor.widths = {8, 8};
  c.model.predictor.mlp_hidden = 8;
  c.lr = 1e-3;
  c.batch = 8;
  c.epochs = 3;
  c.seed = 5;
  return c;
}

std::vector<PreparedSample> gather(const std::vector<PreparedSample>& all, const std::vector<std::size_t>& idx) {
  std::vector<PreparedSample> out;
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace

TEST_CASE("total loss components recombine") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix logits = random_matrix(6, 2, rng, 2.0);
    const std::vector<int> labels{0, 1, 0, 1, 1, 0};
    std::vector<Matrix> graphs;
    for (int k = 0; k < 6; ++k) graphs.push_back(random_matrix(3, 3, rng).cwiseAbs());
    const LossWeights w{uniform01(rng), uniform01(rng), uniform01(rng)};
    const auto loss = total_loss(logits, labels, graphs, w, nullptr, nullptr);
    CHECK(std::abs(loss.total - (loss.ce + w.alpha * loss.intra + w.beta * loss.inter + w.gamma * loss.sparsity)) < 1e-9);
    CHECK(loss.ce == doctest::Approx(cross_entropy(logits, labels, nullptr)).epsilon(1e-15));
  }
}

TEST_CASE("zero weights reduce the total to cross-entropy") {
  Rng rng(2);
  const Matrix logits = random_matrix(4, 2, rng);
  const std::vector<int> labels{0, 1, 1, 0};
  const std::vector<Matrix> graphs(4, Matrix::Constant(3, 3, 0.3));
  const auto loss = total_loss(logits, labels, graphs, LossWeights{0.0, 0.0, 0.0}, nullptr, nullptr);
  CHECK(loss.total == loss.ce);
  CHECK(loss.sparsity > 0.0);
}

TEST_CASE("cross-entropy vanishes as the correct margin grows") {
  const std::vector<int> labels{0, 1};
  double previous = 1e9;
  for (double margin : {1.0, 5.0, 20.0, 40.0}) {
    Matrix logits(2, 2);
    logits << margin, 0.0, 0.0, margin;
    const double ce = total_loss(logits, labels, {}, LossWeights{0.0, 0.0, 0.0}, nullptr, nullptr).total;
    CHECK(ce < previous);
    previous = ce;
  }
  CHECK(previous < 1e-15);
}

TEST_CASE("cross-entropy for two classes with equal logits is log 2") {
  const std::vector<int> labels{0, 1, 1};
  Matrix dlogits;
  CHECK(cross_entropy(Matrix::Zero(3, 2), labels, &dlogits) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(dlogits(0, 0) == doctest::Approx(-0.5 / 3.0));
  CHECK(dlogits(0, 1) == doctest::Approx(0.5 / 3.0));
}

TEST_CASE("default loss weights") {
  const TrainConfig c;
  CHECK(c.loss.alpha == 1e-3);
  CHECK(c.loss.beta == 1e-3);
  CHECK(c.loss.gamma == 1e-4);
  CHECK(c.lr == 1e-4);
  CHECK(c.weight_decay == 1e-4);
  CHECK(c.batch == 16);
  CHECK(c.epochs == 500);
}

TEST_CASE("auroc hand cases") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  CHECK(auroc(s, y) == 0.75);
  const std::vector<double> separated{0.1, 0.2, 0.7, 0.9};
  CHECK(auroc(separated, y) == 1.0);
  const std::vector<double> equal(4, 0.3);
  CHECK(auroc(equal, y) == 0.5);
  const std::vector<int> one_class{1, 1, 1, 1};
  CHECK_THROWS_AS(auroc(s, one_class), DataError);
  const std::vector<int> short_labels{0, 1};
  CHECK_THROWS_AS(auroc(s, short_labels), ShapeError);
}

TEST_CASE("auroc equals the pairwise concordance oracle, resists monotone maps and flips") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(2 + below(rng, 49));
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial % 2 == 0 ? static_cast<double>(below(rng, 5)) : normal(rng);
      y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(below(rng, 2));
    }
    const double a = auroc(s, y);
    CHECK(a == pairwise_auroc(s, y));

    std::vector<double> mapped(n);
    std::transform(s.begin(), s.end(), mapped.begin(), [](double x) { return std::exp(3.0 * x) + x * x * x; });
    CHECK(auroc(mapped, y) == a);

    if (trial % 2 == 1) {
      std::vector<int> flipped(n);
      std::transform(y.begin(), y.end(), flipped.begin(), [](int l) { return 1 - l; });
      CHECK(auroc(s, y) + auroc(s, flipped) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("accuracy and constant predictions") {
  Matrix logits(4, 2);
  logits << 2, 1,  //
      0, 3,        //
      1, 0,        //
      0, 1;
  const std::vector<int> labels{0, 1, 1, 1};
  CHECK(accuracy(logits, labels) == 0.75);

  const Matrix constant = Matrix::Zero(4, 2);
  CHECK(accuracy(constant, labels) == 0.25);
  Matrix probs(4, 2);
  probs.col(0).setConstant(0.5);
  probs.col(1).setConstant(0.5);
  CHECK(auroc_multiclass(probs, labels) == 0.5);
}

TEST_CASE("constant-logit model: accuracy is the class-0 share under the tie rule, auroc 0.5") {
  auto ds = small_dataset();
  auto prepared = prepare_samples(ds);
  std::vector<PreparedSample> lopsided;
  for (std::size_t i = 0, zeros = 0; i < prepared.size(); ++i) {
    if (prepared[i].label == 0 && zeros++ >= 4) continue;
    lopsided.push_back(prepared[i]);
  }
  const double share0 = 4.0 / static_cast<double>(lopsided.size());
  auto cfg = small_config();
  Model model(cfg.model, ds.v(), ds.t(), 1);
  for (auto* p : model.params()) {
    if (p->name.rfind("head.", 0) == 0 && p->name.find("fc2") != std::string::npos) p->value.setZero();
  }
  const auto m = evaluate(model, lopsided, cfg.loss);
  CHECK(m.auroc == 0.5);
  CHECK(m.accuracy == doctest::Approx(share0).epsilon(1e-15));
}

TEST_CASE("evaluate on a single-class set") {
  auto ds = small_dataset();
  auto prepared = prepare_samples(ds);
  std::vector<PreparedSample> zeros;
  for (const auto& s : prepared) {
    if (s.label == 0) zeros.push_back(s);
  }
  auto cfg = small_config();
  Model model(cfg.model, ds.v(), ds.t(), 1);
  CHECK_THROWS_AS(evaluate(model, zeros, cfg.loss), DataError);
  const auto m = evaluate(model, zeros, cfg.loss, false);
  CHECK(std::isnan(m.auroc));
  CHECK(m.accuracy >= 0.0);
  CHECK(m.accuracy <= 1.0);
}

TEST_CASE("make_batches covers every index once and merges a trailing singleton") {
  std::vector<std::size_t> idx(17);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(4);
  const auto batches = make_batches(idx, 8, rng);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].size() == 8);
  CHECK(batches[1].size() == 9);
  std::set<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  CHECK(seen.size() == 17);

  Rng again(4);
  CHECK(make_batches(idx, 8, again) == batches);

  idx.resize(18);
  idx[17] = 17;
  Rng r3(4);
  const auto even = make_batches(idx, 8, r3);
  REQUIRE(even.size() == 3);
  CHECK(even[2].size() == 2);
}

TEST_CASE("training history has one record per epoch and selects the best validation auroc") {
  const auto ds = small_dataset();
  auto cfg = small_config();
  cfg.epochs = 4;
  const auto result = train(cfg, ds);
  REQUIRE(result.history.epochs.size() == 4);
  double best = -1.0;
  int best_epoch = 0;
  for (const auto& e : result.history.epochs) {
    CHECK(e.val.auroc >= 0.0);
    CHECK(e.val.auroc <= 1.0);
    CHECK(e.train.accuracy >= 0.0);
    CHECK(e.train.accuracy <= 1.0);
    if (e.val.auroc > best) {
      best = e.val.auroc;
      best_epoch = e.epoch;
    }
  }
  CHECK(result.history.selected_epoch == best_epoch);
  CHECK(result.split.train.size() + result.split.val.size() + result.split.test.size() == ds.size());
}

TEST_CASE("training is deterministic per seed") {
  const auto ds = small_dataset();
  for (auto kind : {EncoderKind::Cnn, EncoderKind::Gru}) {
    auto cfg = small_config(kind);
    cfg.epochs = 2;
    const auto a = train(cfg, ds);
    const auto b = train(cfg, ds);
    CHECK(a.history.epochs.back().val.auroc == b.history.epochs.back().val.auroc);
    CHECK(a.history.epochs.back().train.loss.total == b.history.epochs.back().train.loss.total);
    cfg.seed += 1;
    const auto c = train(cfg, ds);
    CHECK(a.history.epochs.back().train.loss.total != c.history.epochs.back().train.loss.total);
  }
}

TEST_CASE("train config validation") {
  auto cfg = small_config();
  CHECK_NOTHROW(cfg.validate(40));
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(40), ConfigError);
  cfg = small_config();
  cfg.batch = 1;
  CHECK_THROWS_AS(cfg.validate(40), ConfigError);
  cfg = small_config();
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(40), ConfigError);
  cfg = small_config(EncoderKind::Cnn);
  CHECK_THROWS_AS(cfg.validate(20), ConfigError);
}

TEST_CASE("checkpoint round trip reproduces validation metrics bit-exactly") {
  const auto ds = small_dataset();
  auto cfg = small_config();
  cfg.epochs = 2;
  auto result = train(cfg, ds);
  const auto prepared = prepare_samples(ds);
  const auto val = gather(prepared, result.split.val);
  const auto before = evaluate(result.model, val, cfg.loss);

  testing::TempDir dir("ckpt");
  save_checkpoint(dir / "model.json", result.model, cfg, ds.classes);
  auto loaded = load_checkpoint(dir / "model.json");
  const auto after = evaluate(loaded.model, val, loaded.config.loss);
  CHECK(after.auroc == before.auroc);
  CHECK(after.accuracy == before.accuracy);
  CHECK(after.loss.total == before.loss.total);
  CHECK(loaded.classes == ds.classes);
  CHECK(loaded.config.seed == cfg.seed);
  CHECK(loaded.config.lr == cfg.lr);
}

TEST_CASE("checkpoint load rejects tampered files") {
  const auto ds = small_dataset();
  auto cfg = small_config();
  Model model(cfg.model, ds.v(), ds.t(), 1);
  testing::TempDir dir("ckpt-bad");
  save_checkpoint(dir / "model.json", model, cfg, ds.classes);
  nlohmann::json j;
  {
    std::ifstream in(dir / "model.json");
    in >> j;
  }
  auto write_and_load = [&](const nlohmann::json& doc) {
    std::ofstream(dir / "bad.json") << doc.dump();
    return load_checkpoint(dir / "bad.json");
  };
  SUBCASE("shape mismatch") {
    auto doc = j;
    doc["params"][0]["shape"][0] = doc["params"][0]["shape"][0].get<int>() + 1;
    CHECK_THROWS_AS(write_and_load(doc), DataError);
  }
  SUBCASE("name mismatch") {
    auto doc = j;
    doc["params"][0]["name"] = "encoder.other";
    CHECK_THROWS_AS(write_and_load(doc), DataError);
  }
  SUBCASE("value count") {
    auto doc = j;
    doc["params"][0]["values"].erase(0);
    CHECK_THROWS_AS(write_and_load(doc), DataError);
  }
  SUBCASE("version") {
    auto doc = j;
    doc["version"] = 2;
    CHECK_THROWS_AS(write_and_load(doc), DataError);
  }
  SUBCASE("config echo with another width") {
    auto doc = j;
    doc["config"]["predictor"]["widths"] = {16, 8};
    CHECK_THROWS_AS(write_and_load(doc), DataError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_checkpoint(dir / "absent.json"), DataError); }
}

TEST_CASE("ablation variants use the listed weights") {
  const LossWeights base{0.1, 0.2, 0.3};
  const auto rows = ablation_variants(base);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].variant == "All");
  CHECK(rows[0].weights.alpha == 0.1);
  CHECK(rows[0].weights.beta == 0.2);
  CHECK(rows[0].weights.gamma == 0.3);
  CHECK(rows[1].variant == "CE");
  CHECK(rows[1].weights.alpha == 0.0);
  CHECK(rows[1].weights.beta == 0.0);
  CHECK(rows[1].weights.gamma == 0.0);
  CHECK(rows[2].variant == "CE+GL");
  CHECK(rows[2].weights.alpha == 0.1);
  CHECK(rows[2].weights.beta == 0.2);
  CHECK(rows[2].weights.gamma == 0.0);
  CHECK(rows[3].variant == "CE+SL");
  CHECK(rows[3].weights.alpha == 0.0);
  CHECK(rows[3].weights.beta == 0.0);
  CHECK(rows[3].weights.gamma == 0.3);
}

TEST_CASE("ablate and compare tables have one row per variant and one value per seed") {
  const auto ds = small_dataset();
  auto cfg = small_config();
  cfg.epochs = 1;
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto rows = ablate(cfg, ds, seeds);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.summary.auroc.size() == 2);

  const auto names = comparison_pipelines();
  const std::vector<std::string> expected{"learnable-cnn", "learnable-gru", "gnn-uniform",
                                          "gnn-pearson",   "seq-cnn",       "seq-gru"};
  CHECK(names == expected);
  const std::vector<std::uint64_t> one{1};
  const auto table = compare(cfg, ds, one);
  REQUIRE(table.size() == 6);
  for (std::size_t k = 0; k < table.size(); ++k) {
    CHECK(table[k].pipeline == expected[k]);
    CHECK(table[k].summary.auroc.size() == 1);
  }
  CHECK_THROWS_AS(comparison_model("gnn-random", cfg.model), ConfigError);
}

TEST_CASE("sweep has one row per grid cell; a single cell reduces to train") {
  const auto ds = small_dataset();
  auto cfg = small_config();
  cfg.epochs = 1;
  const std::vector<std::uint64_t> seeds{cfg.seed};
  const std::vector<int> windows{2, 4}, dims{3, 4, 5};
  const auto cells = sweep(cfg, windows, dims, ds, seeds);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].window == 2);
  CHECK(cells[0].dim == 3);
  CHECK(cells[5].window == 4);
  CHECK(cells[5].dim == 5);

  const std::vector<int> w1{4}, d1{4};
  const auto single = sweep(cfg, w1, d1, ds, seeds);
  REQUIRE(single.size() == 1);
  const auto prepared = prepare_samples(ds);
  const auto direct = run_once(cfg, ds, prepared);
  CHECK(single[0].summary.auroc[0] == direct.test.auroc);
  CHECK(single[0].summary.accuracy[0] == direct.test.accuracy);

  const std::vector<int> none;
  CHECK_THROWS_AS(sweep(cfg, none, dims, ds, seeds), ConfigError);
}

TEST_CASE("summary statistics use the sample standard deviation") {
  MetricsSummary s;
  for (double a : {0.7, 0.8, 0.9}) s.add(Metrics{a, 0.5, {}});
  CHECK(s.auroc_mean() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.auroc_std() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s.accuracy_std() == 0.0);
}
