#pragma once

#include "netgen/synthetic.hpp"
#include "netgen/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace netgen {

/// Everything a CLI command needs, parsed from one JSON document:
///
///   {
///     "dataset": "path/to/dir"            (or "synth": {...}),
///     "pipeline": "learnable",
///     "encoder":   {"kind": "gru", "window": 8, "dim": 8},
///     "predictor": {"pooling": "concat", "widths": [32, 32, 8], "mlp_hidden": 32},
///     "loss":      {"alpha": 1e-3, "beta": 1e-3, "gamma": 1e-4},
///     "train":     {"lr": 1e-4, "weight_decay": 1e-4, "batch": 16, "epochs": 500,
///                   "split": {"train": 0.7, "val": 0.1, "test": 0.2}},
///     "seeds": [0, 1, 2, 3, 4],
///     "output": "runs/example",
///     "sweep":     {"windows": [4, 6, 8], "dims": [4, 8, 12]},
///     "interpret": {"alpha": 0.05, "split": "all"}
///   }
///
/// Every section is optional except a data source. Unknown keys are errors.
struct ExperimentConfig {
  std::optional<std::filesystem::path> dataset;
  std::optional<SynthSpec> synth;
  std::uint64_t synth_seed = 0;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output = "runs";
  std::vector<int> sweep_windows{4, 6, 8};
  std::vector<int> sweep_dims{4, 8, 12};
  double interpret_alpha = 0.05;
  std::string interpret_split = "all";
};

/// Throws ConfigError describing the first schema violation.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);

/// Loads the configured dataset directory or generates the synthetic one.
Dataset resolve_dataset(const ExperimentConfig& config);

}  // namespace netgen
