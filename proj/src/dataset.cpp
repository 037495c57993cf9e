#include "netgen/dataset.hpp"

#include "netgen/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace netgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_value(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double parse_value(std::string_view token, const fs::path& file, std::size_t line) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
    token.remove_suffix(1);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError(file.string() + ":" + std::to_string(line) + ": cannot parse number '" +
                    std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError(file.string() + ":" + std::to_string(line) + ": non-finite value");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::ifstream open_in(const fs::path& path) {
  if (!fs::exists(path)) throw DataError(path.string() + ": file not found");
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  return out;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (auto tok : split_commas(line)) row.push_back(parse_value(tok, path, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T manifest_field(const json& j, const char* key, const fs::path& file) {
  if (!j.contains(key)) throw DataError(file.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(file.string() + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace

std::optional<std::string> ModulePartition::module_of(int roi) const {
  for (const auto& [name, members] : modules) {
    if (std::find(members.begin(), members.end(), roi) != members.end()) return name;
  }
  return std::nullopt;
}

void ModulePartition::validate(int v) const {
  std::set<int> seen;
  for (const auto& [name, members] : modules) {
    if (name.empty()) throw DataError("module partition: empty module name");
    if (members.empty()) throw DataError("module partition: module '" + name + "' is empty");
    for (int roi : members) {
      if (roi < 0 || roi >= v) {
        throw DataError("module partition: ROI " + std::to_string(roi) + " of module '" + name +
                        "' outside [0, " + std::to_string(v) + ")");
      }
      if (!seen.insert(roi).second) {
        throw DataError("module partition: ROI " + std::to_string(roi) +
                        " assigned to more than one module");
      }
    }
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

void Dataset::validate() const {
  if (samples.empty()) throw DataError("dataset is empty");
  if (classes.empty()) throw DataError("dataset declares no classes");
  const Index v = samples.front().x.rows();
  const Index t = samples.front().x.cols();
  if (v < 2 || t < 2) throw DataError("dataset needs v >= 2 and t >= 2");
  std::vector<int> counts(classes.size(), 0);
  for (const auto& s : samples) {
    if (s.x.rows() != v || s.x.cols() != t) {
      throw DataError("sample '" + s.id + "' has shape " + shape_str(s.x) + ", expected " +
                      std::to_string(v) + "x" + std::to_string(t));
    }
    if (!s.x.allFinite()) throw DataError("sample '" + s.id + "' contains non-finite values");
    if (s.label < 0 || s.label >= num_classes()) {
      throw DataError("sample '" + s.id + "' has unknown label " + std::to_string(s.label));
    }
    ++counts[static_cast<std::size_t>(s.label)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw DataError("class '" + classes[c] + "' has no samples");
  }
  partition.validate(static_cast<int>(v));
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.classes = classes;
  out.partition = partition;
  out.samples.reserve(indices.size());
  for (auto i : indices) out.samples.push_back(samples.at(i));
  return out;
}

double quantize_text(double value) {
  auto text = format_value(value);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

void write_matrix_csv(const Matrix& m, const fs::path& path) {
  auto out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_value(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(path.string() + ": write failed");
}

Matrix read_matrix_csv(const fs::path& path) {
  auto rows = read_csv_rows(path);
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": ragged row");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Dataset load_dataset(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  auto in = open_in(manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": malformed JSON: " + e.what());
  }
  if (!manifest.is_object()) throw DataError(manifest_path.string() + ": not a JSON object");

  const int v = manifest_field<int>(manifest, "v", manifest_path);
  const int t = manifest_field<int>(manifest, "t", manifest_path);
  if (v < 2 || t < 2) throw DataError(manifest_path.string() + ": need v >= 2 and t >= 2");

  Dataset ds;
  ds.classes = manifest_field<std::vector<std::string>>(manifest, "classes", manifest_path);
  if (ds.classes.empty()) throw DataError(manifest_path.string() + ": 'classes' is empty");

  const auto samples = manifest_field<json>(manifest, "samples", manifest_path);
  if (!samples.is_array() || samples.empty()) {
    throw DataError(manifest_path.string() + ": 'samples' must be a non-empty array");
  }
  for (const auto& entry : samples) {
    TimeSeriesSample s;
    s.id = manifest_field<std::string>(entry, "id", manifest_path);
    s.label = manifest_field<int>(entry, "label", manifest_path);
    const auto file = dir / manifest_field<std::string>(entry, "file", manifest_path);
    if (s.label < 0 || s.label >= static_cast<int>(ds.classes.size())) {
      throw DataError(file.string() + ": unknown label " + std::to_string(s.label));
    }
    auto rows = read_csv_rows(file);
    if (static_cast<int>(rows.size()) != v) {
      throw DataError(file.string() + ": shape mismatch: " + std::to_string(rows.size()) +
                      " rows, manifest declares v=" + std::to_string(v));
    }
    s.x.resize(v, t);
    for (int i = 0; i < v; ++i) {
      if (static_cast<int>(rows[i].size()) != t) {
        throw DataError(file.string() + ":" + std::to_string(i + 1) + ": shape mismatch: " +
                        std::to_string(rows[i].size()) + " values, manifest declares t=" +
                        std::to_string(t));
      }
      for (int j = 0; j < t; ++j) s.x(i, j) = rows[i][j];
    }
    ds.samples.push_back(std::move(s));
  }

  const auto modules_path = dir / manifest_field<std::string>(manifest, "modules_file", manifest_path);
  auto min = open_in(modules_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(min, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError(modules_path.string() + ":" + std::to_string(line_no) +
                      ": expected 'roi_index,module_name'");
    }
    int roi = -1;
    auto idx = std::string_view(line).substr(0, comma);
    auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), roi);
    if (ec != std::errc() || ptr != idx.data() + idx.size()) {
      throw DataError(modules_path.string() + ":" + std::to_string(line_no) + ": bad ROI index");
    }
    ds.partition.modules[line.substr(comma + 1)].push_back(roi);
  }
  try {
    ds.partition.validate(v);
  } catch (const DataError& e) {
    throw DataError(modules_path.string() + ": " + e.what());
  }

  try {
    ds.validate();
  } catch (const DataError& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
  return ds;
}

void write_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir / "samples");

  json manifest;
  manifest["v"] = ds.v();
  manifest["t"] = ds.t();
  manifest["classes"] = ds.classes;
  manifest["modules_file"] = "modules.csv";
  json samples = json::array();
  for (const auto& s : ds.samples) {
    const std::string rel = "samples/" + s.id + ".csv";
    samples.push_back({{"id", s.id}, {"label", s.label}, {"file", rel}});
    write_matrix_csv(s.x, dir / rel);
  }
  manifest["samples"] = std::move(samples);

  {
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw Error((dir / "manifest.json").string() + ": write failed");
  }

  std::vector<std::pair<int, std::string>> rows;
  for (const auto& [name, members] : ds.partition.modules) {
    for (int roi : members) rows.emplace_back(roi, name);
  }
  std::sort(rows.begin(), rows.end());
  auto out = open_out(dir / "modules.csv");
  for (const auto& [roi, name] : rows) out << roi << ',' << name << '\n';
  if (!out) throw Error((dir / "modules.csv").string() + ": write failed");
}

Matrix pearson_features(const Matrix& x) {
  if (x.cols() < 2) throw DataError("pearson_features: need t >= 2");
  const Index v = x.rows();
  Matrix centered = x.colwise() - x.rowwise().mean();
  Eigen::VectorXd norms = centered.rowwise().norm();
  Matrix f = Matrix::Identity(v, v);
  for (Index p = 0; p < v; ++p) {
    for (Index q = p + 1; q < v; ++q) {
      double r = 0.0;
      if (norms(p) > 0.0 && norms(q) > 0.0) {
        r = centered.row(p).dot(centered.row(q)) / (norms(p) * norms(q));
        r = std::clamp(r, -1.0, 1.0);
      }
      f(p, q) = r;
      f(q, p) = r;
    }
  }
  return f;
}

Matrix zscore_normalize(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) {
      out.row(i).setZero();
    } else {
      out.row(i) = (x.row(i).array() - mean) / sd;
    }
  }
  return out;
}

void SplitSpec::validate() const {
  if (train < 0 || val < 0 || test < 0) throw ConfigError("split ratios must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (train <= 0) throw ConfigError("split: training ratio must be positive");
}

SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = ds.size();
  const int num_classes = ds.num_classes();

  Rng rng(spec.seed);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
  for (auto& members : by_class) shuffle(members, rng);

  // Interleave classes by fractional rank so that every prefix of the order
  // holds each class in proportion (within one sample).
  struct Slot {
    double position;
    int label;
    std::size_t index;
  };
  std::vector<Slot> order;
  order.reserve(n);
  for (int c = 0; c < num_classes; ++c) {
    const auto& members = by_class[static_cast<std::size_t>(c)];
    for (std::size_t k = 0; k < members.size(); ++k) {
      order.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(members.size()), c, members[k]});
    }
  }
  std::sort(order.begin(), order.end(), [](const Slot& a, const Slot& b) {
    return a.position != b.position ? a.position < b.position : a.label < b.label;
  });

  auto count_for = [n](double ratio) {
    auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (ratio > 0 && k == 0) k = 1;
    return k;
  };
  std::size_t n_train = std::min(count_for(spec.train), n);
  std::size_t n_val = std::min(count_for(spec.val), n - n_train);

  SplitIndices out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k < n_train) {
      out.train.push_back(order[k].index);
    } else if (k < n_train + n_val) {
      out.val.push_back(order[k].index);
    } else {
      out.test.push_back(order[k].index);
    }
  }

  std::vector<int> train_counts(static_cast<std::size_t>(num_classes), 0);
  for (auto i : out.train) ++train_counts[static_cast<std::size_t>(ds.samples[i].label)];
  for (int c = 0; c < num_classes; ++c) {
    if (train_counts[static_cast<std::size_t>(c)] == 0) {
      throw DataError("split leaves class '" + ds.classes[static_cast<std::size_t>(c)] +
                      "' absent from the training set");
    }
  }
  return out;
}

DatasetSplits split(const Dataset& ds, const SplitSpec& spec) {
  auto idx = split_indices(ds, spec);
  return {ds.subset(idx.train), ds.subset(idx.val), ds.subset(idx.test)};
}

}  // namespace netgen
