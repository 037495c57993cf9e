#pragma once

#include "netgen/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace netgen {

/// One subject: a v x t signal matrix (one row per ROI) and a class label.
struct TimeSeriesSample {
  std::string id;
  Matrix x;
  int label = 0;
};

/// Named, disjoint groups of ROI indices. Need not cover every ROI.
struct ModulePartition {
  std::map<std::string, std::vector<int>> modules;

  bool empty() const { return modules.empty(); }
  std::optional<std::string> module_of(int roi) const;
  /// Throws DataError when sets overlap, are empty, or index outside [0, v).
  void validate(int v) const;
};

struct Dataset {
  std::vector<std::string> classes;
  std::vector<TimeSeriesSample> samples;
  ModulePartition partition;

  std::size_t size() const { return samples.size(); }
  int v() const { return samples.empty() ? 0 : static_cast<int>(samples.front().x.rows()); }
  int t() const { return samples.empty() ? 0 : static_cast<int>(samples.front().x.cols()); }
  int num_classes() const { return static_cast<int>(classes.size()); }
  std::vector<int> labels() const;

  /// Checks shape uniformity, finiteness, label range and class coverage.
  void validate() const;
  /// Subset in the given order; partition and class names are shared.
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Reads `manifest.json`, the per-sample CSV files and the modules file.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the directory layout read by load_dataset. Values are printed
/// with 9 significant digits.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

/// Rounds to the 9-significant-digit text representation used on disk.
double quantize_text(double value);

/// Pairwise Pearson correlation of the rows of x. Zero-variance rows
/// correlate 0 with every other row and 1 with themselves.
Matrix pearson_features(const Matrix& x);

/// Per-row z-scoring (population variance). Zero-variance rows map to zero.
Matrix zscore_normalize(const Matrix& x);

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

struct DatasetSplits {
  Dataset train, val, test;
};

/// Label-stratified, seeded split. Throws DataError if a class would be
/// missing from the training set.
SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec);
DatasetSplits split(const Dataset& ds, const SplitSpec& spec);

// CSV matrix helpers shared by every numeric output file: one line per row,
// comma-separated values.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace netgen
