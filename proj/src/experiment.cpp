#include "netgen/experiment.hpp"

#include <fstream>
#include <set>

namespace netgen {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> known) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

double read_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

int read_int(const json& j, const char* key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return j.at(key).get<int>();
}

std::vector<int> read_int_list(const json& j, const char* key, std::vector<int> fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ConfigError(where + "." + key + ": expected an array of integers");
  std::vector<int> out;
  for (const auto& x : arr) {
    if (!x.is_number_integer()) throw ConfigError(where + "." + key + ": expected an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

SynthSpec parse_synth(const json& j, std::uint64_t& seed) {
  const std::string where = "synth";
  require_object(j, where);
  reject_unknown(j, where, {"v", "t", "n", "modules", "planted", "delta", "noise", "driver_noise", "min_frequency",
                            "max_frequency", "seed"});
  SynthSpec s;
  s.v = read_int(j, "v", s.v, where);
  s.t = read_int(j, "t", s.t, where);
  s.n = read_int(j, "n", s.n, where);
  read(j, "planted", s.planted, where);
  s.delta = read_number(j, "delta", s.delta, where);
  s.noise = read_number(j, "noise", s.noise, where);
  s.driver_noise = read_number(j, "driver_noise", s.driver_noise, where);
  s.min_frequency = read_number(j, "min_frequency", s.min_frequency, where);
  s.max_frequency = read_number(j, "max_frequency", s.max_frequency, where);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("synth.seed: expected a non-negative integer");
    seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("modules")) {
    const auto& mods = j.at("modules");
    if (!mods.is_array()) throw ConfigError("synth.modules: expected an array");
    s.modules.clear();
    for (const auto& m : mods) {
      require_object(m, "synth.modules[]");
      reject_unknown(m, "synth.modules[]", {"name", "size"});
      if (!m.contains("name") || !m.at("name").is_string()) throw ConfigError("synth.modules[].name: expected a string");
      if (!m.contains("size") || !m.at("size").is_number_integer()) {
        throw ConfigError("synth.modules[].size: expected an integer");
      }
      s.modules.emplace_back(m.at("name").get<std::string>(), m.at("size").get<int>());
    }
  }
  s.validate();
  return s;
}

}  // namespace

json to_json(const SynthSpec& s) {
  json mods = json::array();
  for (const auto& [name, size] : s.modules) mods.push_back({{"name", name}, {"size", size}});
  return {{"v", s.v},
          {"t", s.t},
          {"n", s.n},
          {"modules", mods},
          {"planted", s.planted},
          {"delta", s.delta},
          {"noise", s.noise},
          {"driver_noise", s.driver_noise},
          {"min_frequency", s.min_frequency},
          {"max_frequency", s.max_frequency}};
}

json to_json(const TrainConfig& c) {
  return {
      {"pipeline", to_string(c.model.pipeline)},
      {"encoder", {{"kind", to_string(c.model.encoder.kind)}, {"window", c.model.encoder.window}, {"dim", c.model.encoder.dim}}},
      {"predictor",
       {{"pooling", to_string(c.model.predictor.pooling)},
        {"widths", c.model.predictor.widths},
        {"mlp_hidden", c.model.predictor.mlp_hidden},
        {"classes", c.model.predictor.classes}}},
      {"loss", {{"alpha", c.loss.alpha}, {"beta", c.loss.beta}, {"gamma", c.loss.gamma}}},
      {"train",
       {{"lr", c.lr},
        {"weight_decay", c.weight_decay},
        {"batch", c.batch},
        {"epochs", c.epochs},
        {"seed", c.seed},
        {"split", {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}}}}},
  };
}

namespace {

void parse_model_sections(const json& j, TrainConfig& c) {
  if (j.contains("pipeline")) {
    if (!j.at("pipeline").is_string()) throw ConfigError("pipeline: expected a string");
    c.model.pipeline = pipeline_from_string(j.at("pipeline").get<std::string>());
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    require_object(e, "encoder");
    reject_unknown(e, "encoder", {"kind", "window", "dim"});
    if (e.contains("kind")) {
      if (!e.at("kind").is_string()) throw ConfigError("encoder.kind: expected a string");
      c.model.encoder.kind = encoder_kind_from_string(e.at("kind").get<std::string>());
    }
    c.model.encoder.window = read_int(e, "window", c.model.encoder.window, "encoder");
    c.model.encoder.dim = read_int(e, "dim", c.model.encoder.dim, "encoder");
  }
  if (j.contains("predictor")) {
    const auto& p = j.at("predictor");
    require_object(p, "predictor");
    reject_unknown(p, "predictor", {"pooling", "widths", "mlp_hidden", "classes"});
    if (p.contains("pooling")) {
      if (!p.at("pooling").is_string()) throw ConfigError("predictor.pooling: expected a string");
      c.model.predictor.pooling = pooling_from_string(p.at("pooling").get<std::string>());
    }
    c.model.predictor.widths = read_int_list(p, "widths", c.model.predictor.widths, "predictor");
    c.model.predictor.mlp_hidden = read_int(p, "mlp_hidden", c.model.predictor.mlp_hidden, "predictor");
    c.model.predictor.classes = read_int(p, "classes", c.model.predictor.classes, "predictor");
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    require_object(l, "loss");
    reject_unknown(l, "loss", {"alpha", "beta", "gamma"});
    c.loss.alpha = read_number(l, "alpha", c.loss.alpha, "loss");
    c.loss.beta = read_number(l, "beta", c.loss.beta, "loss");
    c.loss.gamma = read_number(l, "gamma", c.loss.gamma, "loss");
    c.loss.validate();
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    require_object(t, "train");
    reject_unknown(t, "train", {"lr", "weight_decay", "batch", "epochs", "split", "seed"});
    c.lr = read_number(t, "lr", c.lr, "train");
    c.weight_decay = read_number(t, "weight_decay", c.weight_decay, "train");
    c.batch = read_int(t, "batch", c.batch, "train");
    c.epochs = read_int(t, "epochs", c.epochs, "train");
    if (t.contains("seed")) {
      if (!t.at("seed").is_number_unsigned()) throw ConfigError("train.seed: expected a non-negative integer");
      c.seed = t.at("seed").get<std::uint64_t>();
    }
    if (t.contains("split")) {
      const auto& s = t.at("split");
      require_object(s, "train.split");
      reject_unknown(s, "train.split", {"train", "val", "test"});
      c.split.train = read_number(s, "train", c.split.train, "train.split");
      c.split.val = read_number(s, "val", c.split.val, "train.split");
      c.split.test = read_number(s, "test", c.split.test, "train.split");
      c.split.validate();
    }
    if (!(c.lr > 0)) throw ConfigError("train.lr must be positive");
    if (c.batch < 2) throw ConfigError("train.batch must be at least 2");
    if (c.epochs < 1) throw ConfigError("train.epochs must be positive");
  }
  c.model.predictor.validate();
}

}  // namespace

TrainConfig train_config_from_json(const json& j) {
  require_object(j, "config");
  reject_unknown(j, "config", {"pipeline", "encoder", "predictor", "loss", "train"});
  TrainConfig c;
  parse_model_sections(j, c);
  return c;
}

ExperimentConfig parse_experiment_config(const json& j) {
  require_object(j, "config");
  reject_unknown(j, "config", {"dataset", "synth", "pipeline", "encoder", "predictor", "loss", "train", "seeds",
                               "output", "sweep", "interpret"});
  ExperimentConfig c;
  if (j.contains("dataset")) {
    if (!j.at("dataset").is_string()) throw ConfigError("dataset: expected a directory path");
    c.dataset = j.at("dataset").get<std::string>();
  }
  if (j.contains("synth")) c.synth = parse_synth(j.at("synth"), c.synth_seed);
  if (c.dataset && c.synth) throw ConfigError("config: give either 'dataset' or 'synth', not both");

  parse_model_sections(j, c.train);

  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("seeds: expected a non-empty array of integers");
    c.seeds.clear();
    for (const auto& x : s) {
      if (!x.is_number_unsigned()) throw ConfigError("seeds: expected non-negative integers");
      c.seeds.push_back(x.get<std::uint64_t>());
    }
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output: expected a directory path");
    c.output = j.at("output").get<std::string>();
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    require_object(s, "sweep");
    reject_unknown(s, "sweep", {"windows", "dims"});
    c.sweep_windows = read_int_list(s, "windows", c.sweep_windows, "sweep");
    c.sweep_dims = read_int_list(s, "dims", c.sweep_dims, "sweep");
    if (c.sweep_windows.empty() || c.sweep_dims.empty()) throw ConfigError("sweep: grid must be non-empty");
  }
  if (j.contains("interpret")) {
    const auto& s = j.at("interpret");
    require_object(s, "interpret");
    reject_unknown(s, "interpret", {"alpha", "split"});
    c.interpret_alpha = read_number(s, "alpha", c.interpret_alpha, "interpret");
    read(s, "split", c.interpret_split, "interpret");
    if (!(c.interpret_alpha > 0 && c.interpret_alpha < 1)) throw ConfigError("interpret.alpha must lie in (0, 1)");
    static const std::set<std::string> splits{"all", "train", "val", "test"};
    if (!splits.count(c.interpret_split)) throw ConfigError("interpret.split must be all, train, val or test");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  try {
    return parse_experiment_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json j = to_json(c.train);
  if (c.dataset) j["dataset"] = c.dataset->string();
  if (c.synth) {
    j["synth"] = to_json(*c.synth);
    j["synth"]["seed"] = c.synth_seed;
  }
  j["seeds"] = c.seeds;
  j["output"] = c.output.string();
  j["sweep"] = {{"windows", c.sweep_windows}, {"dims", c.sweep_dims}};
  j["interpret"] = {{"alpha", c.interpret_alpha}, {"split", c.interpret_split}};
  return j;
}

Dataset resolve_dataset(const ExperimentConfig& config) {
  if (config.dataset) return load_dataset(*config.dataset);
  if (config.synth) return generate_synthetic(*config.synth, config.synth_seed);
  throw ConfigError("config names no data source: add 'dataset' or 'synth'");
}

}  // namespace netgen
