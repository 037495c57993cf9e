#include "netgen/dataset.hpp"

#include "support.hpp"

#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome run_cli(const testing::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("'") + NETGEN_CLI_PATH + "' " + args + " > '" + out.string() + "' 2> '" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

json base_config(const fs::path& output) {
  return {
      {"synth",
       {{"v", 6},
        {"t", 40},
        {"n", 40},
        {"modules", {{{"name", "a"}, {"size", 3}}, {{"name", "b"}, {"size", 3}}}},
        {"planted", "a"},
        {"seed", 11}}},
      {"encoder", {{"kind", "gru"}, {"window", 4}, {"dim", 4}}},
      {"predictor", {{"widths", {8, 8}}, {"mlp_hidden", 8}}},
      {"train", {{"lr", 1e-3}, {"batch", 8}, {"epochs", 3}}},
      {"seeds", {1}},
      {"output", output.string()},
  };
}

fs::path write_config(const testing::TempDir& dir, const json& config, const std::string& name = "config.json") {
  const auto path = dir / name;
  std::ofstream(path) << config.dump(2);
  return path;
}

// Every file below `root` except the timestamped log.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() == "netgen.log") continue;
    files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

std::size_t line_count(const fs::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("cli usage errors exit with 2") {
  testing::TempDir dir("cli-usage");
  CHECK(run_cli(dir, "").code == 2);
  CHECK(run_cli(dir, "train").code == 2);
  CHECK(run_cli(dir, "frobnicate --config x.json").code == 2);
  const auto missing = run_cli(dir, "train --config '" + (dir / "absent.json").string() + "'");
  CHECK(missing.code == 2);
  CHECK(missing.err.find("absent.json") != std::string::npos);
}

TEST_CASE("cli synth writes a loadable dataset and is reproducible") {
  testing::TempDir dir("cli-synth");
  const auto out = dir / "data";
  const auto config = write_config(dir, base_config(out));
  const auto first = run_cli(dir, "synth --config '" + config.string() + "'");
  REQUIRE(first.code == 0);
  const auto ds = netgen::load_dataset(out);
  CHECK(ds.size() == 40);
  CHECK(ds.v() == 6);
  CHECK(ds.t() == 40);
  CHECK(ds.partition.modules.size() == 2);
  const auto before = snapshot(out);
  fs::remove_all(out);
  REQUIRE(run_cli(dir, "synth --config '" + config.string() + "'").code == 0);
  CHECK(snapshot(out) == before);

  REQUIRE(run_cli(dir, "synth --seed 12 --config '" + config.string() + "' --out '" + (dir / "other").string() + "'")
              .code == 0);
  CHECK(snapshot(dir / "other") != before);
}

TEST_CASE("cli rejects invalid configs before creating output") {
  testing::TempDir dir("cli-bad");
  const auto out = dir / "run";

  SUBCASE("unknown planted module") {
    auto cfg = base_config(out);
    cfg["synth"]["planted"] = "zz";
    const auto o = run_cli(dir, "synth --config '" + write_config(dir, cfg).string() + "'");
    CHECK(o.code == 2);
    CHECK(o.err.find("zz") != std::string::npos);
  }
  SUBCASE("unknown key") {
    auto cfg = base_config(out);
    cfg["train"]["learning_rate"] = 0.1;
    const auto o = run_cli(dir, "train --config '" + write_config(dir, cfg).string() + "'");
    CHECK(o.code == 2);
    CHECK(o.err.find("learning_rate") != std::string::npos);
  }
  SUBCASE("wrong type") {
    auto cfg = base_config(out);
    cfg["encoder"]["window"] = "four";
    CHECK(run_cli(dir, "train --config '" + write_config(dir, cfg).string() + "'").code == 2);
  }
  SUBCASE("window too long for the cnn") {
    auto cfg = base_config(out);
    cfg["encoder"]["kind"] = "cnn";
    cfg["encoder"]["window"] = 20;
    CHECK(run_cli(dir, "train --config '" + write_config(dir, cfg).string() + "'").code == 2);
  }
  SUBCASE("missing dataset directory") {
    auto cfg = base_config(out);
    cfg.erase("synth");
    cfg["dataset"] = (dir / "nowhere").string();
    CHECK(run_cli(dir, "train --config '" + write_config(dir, cfg).string() + "'").code == 2);
  }
  SUBCASE("non-positive epoch override") {
    CHECK(run_cli(dir, "train --epochs 0 --config '" + write_config(dir, base_config(out)).string() + "'").code == 2);
  }
  SUBCASE("malformed json") {
    std::ofstream(dir / "broken.json") << "{\"train\": ";
    CHECK(run_cli(dir, "train --config '" + (dir / "broken.json").string() + "'").code == 2);
  }
  CHECK(!fs::exists(out));
}

TEST_CASE("cli train emits its artifacts, honors --epochs and reruns byte-identically") {
  testing::TempDir dir("cli-train");
  const auto out = dir / "run";
  const auto config = write_config(dir, base_config(out));
  const std::string args = "train --epochs 2 --config '" + config.string() + "'";
  const auto first = run_cli(dir, args);
  REQUIRE(first.code == 0);
  for (const char* name : {"checkpoint.json", "history.csv", "metrics.json", "run.json", "netgen.log"}) {
    CAPTURE(name);
    CHECK(fs::exists(out / name));
  }
  CHECK(line_count(out / "history.csv") == 3);
  const auto metrics = json::parse(slurp(out / "metrics.json"));
  CHECK(metrics.contains("test"));
  CHECK(metrics["test"]["auroc"].get<double>() >= 0.0);
  const auto manifest = json::parse(slurp(out / "run.json"));
  CHECK(manifest["format"] == "netgen-run");
  CHECK(manifest["command"] == "train");
  CHECK(manifest["config"]["train"]["epochs"] == 2);

  const auto before = snapshot(out);
  fs::remove_all(out);
  REQUIRE(run_cli(dir, args).code == 0);
  CHECK(snapshot(out) == before);

  const auto reseeded = run_cli(dir, "train --epochs 2 --seed 2 --out '" + (dir / "seed2").string() + "' --config '" +
                                         config.string() + "'");
  REQUIRE(reseeded.code == 0);
  CHECK(slurp(dir / "seed2" / "metrics.json") != before.at("metrics.json"));

  SUBCASE("interpret writes the mean graphs, edge list and module scores") {
    const auto interp = dir / "interp";
    const auto o = run_cli(dir, "interpret --config '" + config.string() + "' --checkpoint '" +
                                    (out / "checkpoint.json").string() + "' --out '" + interp.string() + "'");
    REQUIRE(o.code == 0);
    for (const char* name : {"mean_graph_all.csv", "mean_graph_class0.csv", "mean_graph_class1.csv",
                             "edges_significant.csv", "module_scores.csv", "mean_graph_all.pgm", "run.json"}) {
      CAPTURE(name);
      CHECK(fs::exists(interp / name));
    }
    CHECK(line_count(interp / "mean_graph_all.csv") == 6);
    CHECK(line_count(interp / "module_scores.csv") >= 2);
  }
  SUBCASE("interpret on a corrupt checkpoint is a runtime failure") {
    std::ofstream(dir / "corrupt.json") << "{\"format\": \"netgen-checkpoint\", \"version\": 1}";
    const auto o = run_cli(dir, "interpret --config '" + config.string() + "' --checkpoint '" +
                                    (dir / "corrupt.json").string() + "' --out '" + (dir / "i2").string() + "'");
    CHECK(o.code == 1);
    CHECK(o.err.find("netgen interpret: error:") != std::string::npos);
  }
}

TEST_CASE("cli compare, ablate and sweep tables") {
  testing::TempDir dir("cli-tables");
  auto cfg = base_config(dir / "compare");
  cfg["train"]["epochs"] = 1;
  cfg["seeds"] = {1, 2};
  cfg["sweep"] = {{"windows", {2, 4}}, {"dims", {3, 4}}};
  const auto config = write_config(dir, cfg);
  const std::string tail = " --config '" + config.string() + "'";

  REQUIRE(run_cli(dir, "compare" + tail).code == 0);
  const auto compare = slurp(dir / "compare" / "compare.csv");
  CHECK(line_count(dir / "compare" / "compare.csv") == 7);
  CHECK(compare.rfind("pipeline,auroc_seed1,auroc_seed2,auroc_mean,auroc_std,accuracy_mean,accuracy_std\n", 0) == 0);
  for (const char* name : {"learnable-cnn", "learnable-gru", "gnn-uniform", "gnn-pearson", "seq-cnn", "seq-gru"}) {
    CHECK(compare.find(std::string("\n") + name + ",") != std::string::npos);
  }

  REQUIRE(run_cli(dir, "ablate --out '" + (dir / "ablate").string() + "'" + tail).code == 0);
  const auto ablation = slurp(dir / "ablate" / "ablation.csv");
  CHECK(line_count(dir / "ablate" / "ablation.csv") == 5);
  for (const char* name : {"\nAll,", "\nCE,", "\nCE+GL,", "\nCE+SL,"}) CHECK(ablation.find(name) != std::string::npos);

  REQUIRE(run_cli(dir, "sweep --seed 3 --out '" + (dir / "sweep").string() + "'" + tail).code == 0);
  CHECK(line_count(dir / "sweep" / "sweep.csv") == 5);
  CHECK(slurp(dir / "sweep" / "sweep.csv").rfind("window,dim,auroc_seed3,", 0) == 0);
}
