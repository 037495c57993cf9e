#pragma once

#include "netgen/layers.hpp"

#include <functional>
#include <string>

namespace netgen::nn {

/// Evaluates a scalar loss. When `with_grad` is true it must also zero and
/// then fill the gradients of the parameters under test.
using ScalarFragment = std::function<double(bool with_grad)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Compares analytic gradients with central differences over every
/// coordinate of every parameter. The error of one coordinate is
/// |a - f| / max(|a|, |f|, 1e-8).
GradCheckReport gradient_check(const ScalarFragment& fragment, const ParamList& params, double step = 1e-5);

}  // namespace netgen::nn
