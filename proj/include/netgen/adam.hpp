#pragma once

#include "netgen/layers.hpp"

#include <vector>

namespace netgen::nn {

struct AdamOptions {
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction and coupled L2 weight decay
/// (the decay term is added to the gradient before the moment updates).
class Adam {
 public:
  Adam(ParamList params, AdamOptions options);

  /// Applies one update from the gradients currently stored in the params.
  /// Throws NumericError on a non-finite gradient, leaving parameters intact.
  void step();

  long steps() const { return steps_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return s_; }

 private:
  ParamList params_;
  AdamOptions options_;
  std::vector<Matrix> m_, s_;
  long steps_ = 0;
};

}  // namespace netgen::nn
