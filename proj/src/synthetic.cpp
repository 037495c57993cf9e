#include "netgen/synthetic.hpp"

#include "netgen/random.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace netgen {

void SynthSpec::validate() const {
  constexpr int kClasses = 2;
  if (v < 2 || t < 2) throw ConfigError("synth: need v >= 2 and t >= 2");
  if (n < 2 * kClasses) throw ConfigError("synth: need n >= 2 * number of classes");
  if (!(noise >= 0) || !(delta >= 0) || !(driver_noise >= 0)) {
    throw ConfigError("synth: noise, delta and driver_noise must be non-negative");
  }
  if (!(min_frequency > 0) || !(max_frequency >= min_frequency)) {
    throw ConfigError("synth: bad frequency range");
  }
  if (modules.empty()) throw ConfigError("synth: at least one module required");
  int total = 0;
  bool found = false;
  for (const auto& [name, size] : modules) {
    if (size < 1) throw ConfigError("synth: module '" + name + "' must have at least one ROI");
    total += size;
    found = found || name == planted;
  }
  if (total > v) throw ConfigError("synth: module sizes exceed v");
  if (!found) throw ConfigError("synth: planted module '" + planted + "' is not in the partition");
}

Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);

  Dataset ds;
  ds.classes = {"class0", "class1"};
  std::vector<int> module_of(static_cast<std::size_t>(spec.v), -1);
  std::vector<bool> is_planted;
  int next = 0;
  for (std::size_t m = 0; m < spec.modules.size(); ++m) {
    const auto& [name, size] = spec.modules[m];
    auto& members = ds.partition.modules[name];
    for (int k = 0; k < size; ++k) {
      module_of[static_cast<std::size_t>(next)] = static_cast<int>(m);
      members.push_back(next++);
    }
    is_planted.push_back(name == spec.planted);
  }

  const int id_width = std::max(4, static_cast<int>(std::to_string(spec.n - 1).size()));
  Matrix drivers(static_cast<Index>(spec.modules.size()), spec.t);
  for (int s = 0; s < spec.n; ++s) {
    TimeSeriesSample sample;
    sample.label = s % 2;
    const auto digits = std::to_string(s);
    sample.id = "s" + std::string(static_cast<std::size_t>(id_width) - digits.size(), '0') + digits;

    for (Index m = 0; m < drivers.rows(); ++m) {
      const double freq = uniform(rng, spec.min_frequency, spec.max_frequency);
      const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      for (int k = 0; k < spec.t; ++k) {
        drivers(m, k) = std::sin(2.0 * std::numbers::pi * freq * k + phase) + spec.driver_noise * normal(rng);
      }
    }

    sample.x.resize(spec.v, spec.t);
    for (int i = 0; i < spec.v; ++i) {
      const int m = module_of[static_cast<std::size_t>(i)];
      double coupling = 0.0;
      if (m >= 0) {
        coupling = 1.0;
        if (sample.label == 1 && is_planted[static_cast<std::size_t>(m)]) coupling += spec.delta;
      }
      for (int k = 0; k < spec.t; ++k) {
        const double driver = m >= 0 ? drivers(m, k) : 0.0;
        sample.x(i, k) = quantize_text(coupling * driver + spec.noise * normal(rng));
      }
    }
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

}  // namespace netgen
