#include "netgen/checkpoint.hpp"

#include "netgen/experiment.hpp"

#include <fstream>

namespace netgen {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "netgen-checkpoint";
constexpr int kVersion = 1;

json tensors_to_json(const nn::ParamList& list) {
  json out = json::array();
  for (const auto* p : list) {
    std::vector<double> values(p->value.data(), p->value.data() + p->value.size());
    out.push_back({{"name", p->name}, {"shape", {p->value.rows(), p->value.cols()}}, {"values", values}});
  }
  return out;
}

void tensors_from_json(const json& arr, const nn::ParamList& list, const std::string& what,
                       const std::filesystem::path& path) {
  if (!arr.is_array() || arr.size() != list.size()) {
    throw DataError(path.string() + ": " + what + " count does not match the model (expected " +
                    std::to_string(list.size()) + ")");
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto* p = list[i];
    const auto& entry = arr[i];
    const auto name = entry.at("name").get<std::string>();
    if (name != p->name) {
      throw DataError(path.string() + ": " + what + " " + std::to_string(i) + " is '" + name + "', expected '" +
                      p->name + "'");
    }
    const auto shape = entry.at("shape").get<std::vector<Index>>();
    if (shape.size() != 2 || shape[0] != p->value.rows() || shape[1] != p->value.cols()) {
      throw DataError(path.string() + ": " + what + " '" + name + "' has the wrong shape, expected " +
                      shape_str(p->value));
    }
    const auto values = entry.at("values").get<std::vector<double>>();
    if (static_cast<Index>(values.size()) != p->value.size()) {
      throw DataError(path.string() + ": " + what + " '" + name + "' has the wrong number of values");
    }
    std::copy(values.begin(), values.end(), p->value.data());
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, const TrainConfig& config,
                     const std::vector<std::string>& classes) {
  json j{{"format", kFormat},
         {"version", kVersion},
         {"config", to_json(config)},
         {"v", model.v()},
         {"t", model.t()},
         {"classes", classes},
         {"params", tensors_to_json(model.params())},
         {"buffers", tensors_to_json(model.buffers())}};
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot write checkpoint");
  out << j.dump() << '\n';
  if (!out) throw Error(path.string() + ": write failed");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open checkpoint");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed checkpoint: " + e.what());
  }
  try {
    if (j.value("format", std::string{}) != kFormat) throw DataError(path.string() + ": not a netgen checkpoint");
    if (j.value("version", -1) != kVersion) {
      throw DataError(path.string() + ": unsupported checkpoint version " + j.at("version").dump());
    }
    TrainConfig config = train_config_from_json(j.at("config"));
    const int v = j.at("v").get<int>();
    const int t = j.at("t").get<int>();
    auto classes = j.at("classes").get<std::vector<std::string>>();
    Model model(config.model, v, t, config.seed);
    tensors_from_json(j.at("params"), model.params(), "parameter", path);
    tensors_from_json(j.at("buffers"), model.buffers(), "buffer", path);
    return {std::move(config), std::move(model), std::move(classes)};
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed checkpoint: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": bad config in checkpoint: " + e.what());
  }
}

}  // namespace netgen
