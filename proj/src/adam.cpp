#include "netgen/adam.hpp"

#include <cmath>

namespace netgen::nn {

Adam::Adam(ParamList params, AdamOptions options) : params_(std::move(params)), options_(options) {
  if (!(options_.lr > 0)) throw ConfigError("adam: learning rate must be positive");
  if (!(options_.weight_decay >= 0)) throw ConfigError("adam: weight decay must be non-negative");
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    s_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  for (const auto* p : params_) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) {
      throw ShapeError("adam: gradient of '" + p->name + "' has shape " + shape_str(p->grad) +
                       ", parameter has " + shape_str(p->value));
    }
    if (!p->grad.allFinite()) throw NumericError("adam: non-finite gradient in '" + p->name + "'");
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    Matrix g = p.grad;
    if (options_.weight_decay != 0.0) g += options_.weight_decay * p.value;
    m_[k] = options_.beta1 * m_[k] + (1.0 - options_.beta1) * g;
    s_[k] = options_.beta2 * s_[k] + (1.0 - options_.beta2) * g.cwiseAbs2();
    p.value.array() -= options_.lr * (m_[k].array() / c1) / ((s_[k].array() / c2).sqrt() + options_.eps);
  }
}

}  // namespace netgen::nn
