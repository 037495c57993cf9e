#pragma once

#include "netgen/dataset.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace netgen {

/// Parameters of the planted latent-driver generator.
///
/// Each module owns a latent driver per sample (a sinusoid with random
/// frequency and phase plus white noise). An ROI in a module follows
/// `coupling * driver + noise * N(0,1)`. Class-1 samples add `delta` to the
/// coupling of every ROI in the planted module; nothing else depends on the
/// label. ROIs outside every module are pure noise.
struct SynthSpec {
  int v = 20;
  int t = 64;
  int n = 400;
  std::vector<std::pair<std::string, int>> modules{{"m0", 5}, {"m1", 5}, {"m2", 5}, {"m3", 5}};
  std::string planted = "m0";
  double delta = 2.0;
  double noise = 1.0;
  double driver_noise = 0.5;
  double min_frequency = 0.03;
  double max_frequency = 0.12;

  void validate() const;
};

/// Balanced two-class dataset ("class0", "class1"), labels alternating by
/// sample index. Values are pre-rounded to the on-disk precision so that
/// write/load round-trips exactly.
Dataset generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

}  // namespace netgen
