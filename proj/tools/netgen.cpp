// netgen command-line entry point.
//
//   netgen synth|train|compare|ablate|sweep|interpret --config FILE
//          [--seed N] [--epochs N] [--out DIR] [--checkpoint FILE] [-v]
//
// Exit codes: 0 ok, 1 runtime failure, 2 config or usage error.

#include "netgen/checkpoint.hpp"
#include "netgen/experiment.hpp"
#include "netgen/interpret.hpp"
#include "netgen/log.hpp"
#include "netgen/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netgen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string command;
  fs::path config;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<fs::path> out;
  std::optional<fs::path> checkpoint;
  bool verbose = false;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

json metrics_json(const Metrics& m) {
  return {{"auroc", m.auroc},
          {"accuracy", m.accuracy},
          {"loss",
           {{"total", m.loss.total},
            {"ce", m.loss.ce},
            {"intra", m.loss.intra},
            {"inter", m.loss.inter},
            {"sparsity", m.loss.sparsity}}}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot write");
  out << text;
  if (!out) throw Error(path.string() + ": write failed");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Output directory plus the timestamped log that lives inside it.
class RunDir {
 public:
  explicit RunDir(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    log_.open(dir_ / "netgen.log", std::ios::app);
    if (log_) log::set_file(&log_);
  }
  ~RunDir() { log::set_file(nullptr); }
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  fs::path operator/(const std::string& name) {
    artifacts_.push_back(name);
    return dir_ / name;
  }
  const std::vector<std::string>& artifacts() const { return artifacts_; }
  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  std::ofstream log_;
  std::vector<std::string> artifacts_;
};

void write_manifest(RunDir& dir, const std::string& command, const ExperimentConfig& config, const json& extra) {
  json j{{"format", "netgen-run"}, {"version", 1}, {"command", command}, {"config", to_json(config)}};
  for (const auto& [key, value] : extra.items()) j[key] = value;
  auto artifacts = dir.artifacts();
  artifacts.push_back("run.json");
  j["artifacts"] = artifacts;
  write_json(dir.path() / "run.json", j);
}

json dataset_json(const Dataset& ds) {
  return {{"n", ds.size()}, {"v", ds.v()}, {"t", ds.t()}, {"classes", ds.classes}};
}

ExperimentConfig load_config(const Options& opt) {
  auto config = load_experiment_config(opt.config);
  if (opt.epochs) {
    if (*opt.epochs < 1) throw ConfigError("--epochs must be positive");
    config.train.epochs = *opt.epochs;
  }
  if (opt.out) config.output = *opt.out;
  if (opt.seed) {
    config.seeds = {*opt.seed};
    config.synth_seed = *opt.seed;
  }
  config.train.seed = config.seeds.front();
  if (config.dataset && !fs::is_directory(*config.dataset)) {
    throw ConfigError("dataset directory " + config.dataset->string() + " does not exist");
  }
  return config;
}

Dataset load_data(const ExperimentConfig& config) {
  auto ds = resolve_dataset(config);
  ds.validate();
  return ds;
}

std::string summary_line(const std::string& name, const MetricsSummary& s) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << name << "  AUROC " << s.auroc_mean() << " +- " << s.auroc_std() << "  Accuracy " << s.accuracy_mean()
      << " +- " << s.accuracy_std();
  return out.str();
}

// `name,<auroc per seed...>,auroc_mean,auroc_std,accuracy_mean,accuracy_std`
std::string summary_header(const std::string& first, std::span<const std::uint64_t> seeds) {
  std::string h = first;
  for (auto s : seeds) h += ",auroc_seed" + std::to_string(s);
  return h + ",auroc_mean,auroc_std,accuracy_mean,accuracy_std\n";
}

std::string summary_cells(const MetricsSummary& s) {
  std::string row;
  for (double a : s.auroc) row += "," + fmt(a);
  row += "," + fmt(s.auroc_mean()) + "," + fmt(s.auroc_std()) + "," + fmt(s.accuracy_mean()) + "," +
         fmt(s.accuracy_std());
  return row;
}

int cmd_synth(const Options& opt) {
  auto config = load_config(opt);
  if (!config.synth) throw ConfigError("synth: config has no 'synth' section");
  auto ds = generate_synthetic(*config.synth, config.synth_seed);
  RunDir dir(config.output);
  write_dataset(ds, dir.path());
  log::info("wrote synthetic dataset with " + std::to_string(ds.size()) + " samples to " + dir.path().string());
  std::cout << "wrote " << ds.size() << " samples to " << dir.path().string() << "\n";
  return kExitOk;
}

std::string history_csv(const TrainHistory& history) {
  std::string out =
      "epoch,train_loss,train_ce,train_intra,train_inter,train_sparsity,train_auroc,train_accuracy,"
      "val_loss,val_ce,val_intra,val_inter,val_sparsity,val_auroc,val_accuracy\n";
  auto cells = [](const Metrics& m) {
    return fmt(m.loss.total) + "," + fmt(m.loss.ce) + "," + fmt(m.loss.intra) + "," + fmt(m.loss.inter) + "," +
           fmt(m.loss.sparsity) + "," + fmt(m.auroc) + "," + fmt(m.accuracy);
  };
  for (const auto& e : history.epochs) {
    out += std::to_string(e.epoch) + "," + cells(e.train) + "," + cells(e.val) + "\n";
  }
  return out;
}

int cmd_train(const Options& opt) {
  auto config = load_config(opt);
  const auto ds = load_data(config);
  config.train.validate(ds.t());
  RunDir dir(config.output);
  log::info("train: seed " + std::to_string(config.train.seed) + ", " + std::to_string(config.train.epochs) +
            " epochs");

  const auto prepared = prepare_samples(ds);
  auto run = run_once(config.train, ds, prepared);
  const auto& history = run.trained.history;
  const auto& selected = history.epochs.at(static_cast<std::size_t>(history.selected_epoch));

  save_checkpoint(dir / "checkpoint.json", run.trained.model, config.train, ds.classes);
  write_text(dir / "history.csv", history_csv(history));
  write_json(dir / "metrics.json", {{"selected_epoch", history.selected_epoch},
                                    {"val", metrics_json(selected.val)},
                                    {"test", metrics_json(run.test)}});
  write_manifest(dir, "train", config,
                 {{"seed", config.train.seed},
                  {"dataset", dataset_json(ds)},
                  {"split", {{"train", run.trained.split.train.size()},
                             {"val", run.trained.split.val.size()},
                             {"test", run.trained.split.test.size()}}}});
  log::info("train: selected epoch " + std::to_string(history.selected_epoch) + ", test AUROC " +
            fmt(run.test.auroc));
  std::cout << "selected epoch " << history.selected_epoch << "  test AUROC " << fmt(run.test.auroc)
            << "  accuracy " << fmt(run.test.accuracy) << "\n";
  return kExitOk;
}

int cmd_compare(const Options& opt) {
  auto config = load_config(opt);
  const auto ds = load_data(config);
  for (const auto& name : comparison_pipelines()) {
    TrainConfig cfg = config.train;
    cfg.model = comparison_model(name, config.train.model);
    cfg.validate(ds.t());
  }
  RunDir dir(config.output);
  log::info("compare: " + std::to_string(config.seeds.size()) + " seeds");
  const auto rows = compare(config.train, ds, config.seeds);
  std::string csv = summary_header("pipeline", config.seeds);
  for (const auto& row : rows) {
    csv += row.pipeline + summary_cells(row.summary) + "\n";
    std::cout << summary_line(row.pipeline, row.summary) << "\n";
  }
  write_text(dir / "compare.csv", csv);
  write_manifest(dir, "compare", config, {{"dataset", dataset_json(ds)}});
  return kExitOk;
}

int cmd_ablate(const Options& opt) {
  auto config = load_config(opt);
  const auto ds = load_data(config);
  config.train.validate(ds.t());
  RunDir dir(config.output);
  log::info("ablate: " + std::to_string(config.seeds.size()) + " seeds");
  const auto rows = ablate(config.train, ds, config.seeds);
  std::string csv = summary_header("variant,alpha,beta,gamma", config.seeds);
  for (const auto& row : rows) {
    csv += row.variant + "," + fmt(row.weights.alpha) + "," + fmt(row.weights.beta) + "," + fmt(row.weights.gamma) +
           summary_cells(row.summary) + "\n";
    std::cout << summary_line(row.variant, row.summary) << "\n";
  }
  write_text(dir / "ablation.csv", csv);
  write_manifest(dir, "ablate", config, {{"dataset", dataset_json(ds)}});
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  auto config = load_config(opt);
  const auto ds = load_data(config);
  for (int w : config.sweep_windows) {
    for (int d : config.sweep_dims) {
      TrainConfig cfg = config.train;
      cfg.model.encoder.window = w;
      cfg.model.encoder.dim = d;
      cfg.validate(ds.t());
    }
  }
  RunDir dir(config.output);
  const auto cells = sweep(config.train, config.sweep_windows, config.sweep_dims, ds, config.seeds);
  std::string csv = summary_header("window,dim", config.seeds);
  for (const auto& cell : cells) {
    csv += std::to_string(cell.window) + "," + std::to_string(cell.dim) + summary_cells(cell.summary) + "\n";
    std::cout << summary_line("window " + std::to_string(cell.window) + " dim " + std::to_string(cell.dim),
                              cell.summary)
              << "\n";
  }
  write_text(dir / "sweep.csv", csv);
  write_manifest(dir, "sweep", config, {{"dataset", dataset_json(ds)}});
  return kExitOk;
}

int cmd_interpret(const Options& opt) {
  if (!opt.checkpoint) throw ConfigError("interpret: --checkpoint is required");
  auto config = load_config(opt);
  const auto ds = load_data(config);
  if (!fs::exists(*opt.checkpoint)) throw ConfigError("checkpoint " + opt.checkpoint->string() + " does not exist");
  auto loaded = load_checkpoint(*opt.checkpoint);
  if (loaded.model.config().pipeline == Pipeline::SequenceOnly) {
    throw ConfigError("interpret: a sequence-only model generates no graphs");
  }
  if (loaded.model.v() != ds.v() || loaded.model.t() != ds.t()) {
    throw ConfigError("interpret: checkpoint expects v=" + std::to_string(loaded.model.v()) +
                      ", t=" + std::to_string(loaded.model.t()) + " but the dataset has v=" + std::to_string(ds.v()) +
                      ", t=" + std::to_string(ds.t()));
  }
  if (ds.num_classes() != 2) throw ConfigError("interpret: edge tests need exactly two classes");

  std::vector<std::size_t> indices;
  if (config.interpret_split == "all") {
    indices.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) indices[i] = i;
  } else {
    const auto split = split_for_run(loaded.config, ds);
    indices = config.interpret_split == "train" ? split.train : config.interpret_split == "val" ? split.val : split.test;
  }

  RunDir dir(config.output);
  const auto collected = collect_graphs(loaded.model, ds, indices);
  const auto all_mean = mean_graph(collected.graphs);
  export_matrix(all_mean, dir / "mean_graph_all.csv");
  export_heatmap(all_mean, dir / "mean_graph_all.pgm");
  for (int c = 0; c < ds.num_classes(); ++c) {
    std::vector<Matrix> members;
    for (std::size_t k = 0; k < collected.graphs.size(); ++k) {
      if (collected.labels[k] == c) members.push_back(collected.graphs[k]);
    }
    if (members.empty()) continue;
    const auto m = mean_graph(members);
    export_matrix(m, dir / ("mean_graph_class" + std::to_string(c) + ".csv"));
    export_heatmap(m, dir / ("mean_graph_class" + std::to_string(c) + ".pgm"));
  }

  const auto edges = edge_ttest(collected.graphs, collected.labels, config.interpret_alpha);
  export_edges(edges, dir / "edges_significant.csv");
  std::cout << edges.edges.size() << " of " << edges.tested << " tested edges significant at alpha "
            << fmt(config.interpret_alpha) << "\n";
  if (ds.partition.empty()) {
    log::warn("interpret: dataset has no module partition; module_scores.csv not written");
  } else {
    const auto scores = module_difference_scores(edges, ds.partition, ds.v());
    export_scores(scores, dir / "module_scores.csv");
    for (const auto& s : scores) std::cout << s.module << "  " << fmt(s.score) << "\n";
  }
  write_manifest(dir, "interpret", config,
                 {{"checkpoint", opt.checkpoint->string()},
                  {"dataset", dataset_json(ds)},
                  {"graphs", collected.graphs.size()},
                  {"edges", {{"significant", edges.edges.size()}, {"tested", edges.tested}, {"candidates", edges.candidates}}}});
  return kExitOk;
}

int dispatch(const Options& opt) {
  if (opt.command == "synth") return cmd_synth(opt);
  if (opt.command == "train") return cmd_train(opt);
  if (opt.command == "compare") return cmd_compare(opt);
  if (opt.command == "ablate") return cmd_ablate(opt);
  if (opt.command == "sweep") return cmd_sweep(opt);
  return cmd_interpret(opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable functional-connectivity graphs for time-series classification"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"synth", "Generate a planted synthetic dataset directory"},
      {"train", "Train one model and write checkpoint, history and metrics"},
      {"compare", "Compare the learnable-graph pipelines against graph and sequence baselines"},
      {"ablate", "Train the four regularizer variants"},
      {"sweep", "Grid over encoder window and embedding size"},
      {"interpret", "Mean graphs, edge t-tests and module difference scores from a checkpoint"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", opt.seed, "Seed overriding the config's seed list");
    sub->add_option("--out", opt.out, "Output directory overriding the config");
    if (std::string(name) != "synth" && std::string(name) != "interpret") {
      sub->add_option("--epochs", opt.epochs, "Epoch count overriding the config");
    }
    if (std::string(name) == "interpret") {
      sub->add_option("--checkpoint", opt.checkpoint, "Checkpoint written by train")->required();
    }
    sub->add_flag("-v,--verbose", opt.verbose, "Log progress to stderr");
    sub->callback([&opt, n = std::string(name)] { opt.command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (opt.verbose) log::set_level(log::Level::Info);
  try {
    return dispatch(opt);
  } catch (const ConfigError& e) {
    std::cerr << "netgen " << opt.command << ": config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "netgen " << opt.command << ": error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
