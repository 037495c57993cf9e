#pragma once

#include "netgen/model.hpp"
#include "netgen/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace netgen {

/// JSON container, format "netgen-checkpoint" version 1:
///   { "format", "version", "config": <train config>, "v", "t", "classes",
///     "params": [{"name", "shape": [rows, cols], "values": [...]}],
///     "buffers": [...same layout...] }
/// Doubles are written with round-trip precision.
void save_checkpoint(const std::filesystem::path& path, Model& model, const TrainConfig& config,
                     const std::vector<std::string>& classes);

struct LoadedCheckpoint {
  TrainConfig config;
  Model model;
  std::vector<std::string> classes;
};

/// Rebuilds the model from the config echo and fills its parameters.
/// Throws DataError on a version, name or shape mismatch.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace netgen
