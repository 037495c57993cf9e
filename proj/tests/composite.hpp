#pragma once

#include "netgen/gradcheck.hpp"
#include "netgen/model.hpp"
#include "netgen/training.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace testing {

// Random samples with z-scored series and Pearson node features.
inline std::vector<netgen::PreparedSample> random_prepared(int count, int v, int t, netgen::Rng& rng) {
  std::vector<netgen::PreparedSample> out;
  for (int k = 0; k < count; ++k) {
    const netgen::Matrix x = random_matrix(v, t, rng);
    out.push_back({netgen::zscore_normalize(x), netgen::pearson_features(x), k % 2});
  }
  return out;
}

inline std::vector<const netgen::PreparedSample*> pointers(const std::vector<netgen::PreparedSample>& samples) {
  std::vector<const netgen::PreparedSample*> out;
  for (const auto& s : samples) out.push_back(&s);
  return out;
}

struct CompositeCheck {
  double max_rel_error = 0.0;
  std::string worst_param;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  std::size_t remeasured = 0;
  double strict_max_rel_error = 0.0;  // every coordinate at step 1e-5
  double largest_remeasured_gradient = 0.0;  // among the step-1e-3 coordinates
  std::size_t kinks = 0;                     // coordinates remeasured with step 1e-7
};

// Full training loss of a model on a random batch, differentiated by central
// differences with step 1e-5. A coordinate that misses the tolerance is measured
// once more and counted in `remeasured`: with step 1e-3 when |grad| < 1e-6 (the
// loss roundoff dominates), otherwise with step 1e-7 (a ReLU or max-pool switch
// lies within 1e-5 of the point).
inline CompositeCheck composite_gradient_check(const netgen::ModelConfig& config, int v, int t, std::uint64_t seed,
                                               const netgen::LossWeights& weights, int batch = 4,
                                               double tolerance = 1e-4) {
  using namespace netgen;
  Rng rng(derive_seed(seed, 77));
  const auto samples = random_prepared(batch, v, t, rng);
  const auto ptrs = pointers(samples);
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);

  Model model(config, v, t, seed);
  const bool learnable = config.pipeline == Pipeline::LearnableGraph;
  const auto params = model.params();
  auto loss_at = [&](bool with_grad) {
    auto out = model.forward(ptrs, true);
    Matrix dlogits;
    std::vector<Matrix> dgraphs;
    const auto loss = total_loss(out.logits, labels, learnable ? std::span<const Matrix>(out.graphs) : std::span<const Matrix>{},
                                 weights, with_grad ? &dlogits : nullptr, with_grad && learnable ? &dgraphs : nullptr);
    if (with_grad) {
      nn::zero_grads(params);
      model.backward(dlogits, learnable ? &dgraphs : nullptr);
    }
    return loss.total;
  };

  loss_at(true);
  std::vector<Matrix> analytic;
  for (const auto* p : params) analytic.push_back(p->grad);
  auto rel = [](double a, double f) { return std::abs(a - f) / std::max({std::abs(a), std::abs(f), 1e-8}); };

  CompositeCheck report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (Index i = 0; i < params[k]->value.size(); ++i) {
      double& w = params[k]->value.data()[i];
      const double saved = w;
      auto numeric = [&](double h) {
        w = saved + h;
        const double up = loss_at(false);
        w = saved - h;
        const double down = loss_at(false);
        w = saved;
        return (up - down) / (2.0 * h);
      };
      const double a = analytic[k].data()[i];
      double f = numeric(1e-5);
      double err = rel(a, f);
      report.strict_max_rel_error = std::max(report.strict_max_rel_error, err);
      if (err >= tolerance) {
        if (std::max(std::abs(a), std::abs(f)) < 1e-6) {
          report.largest_remeasured_gradient = std::max(report.largest_remeasured_gradient, std::abs(a));
          f = numeric(1e-3);
        } else {
          ++report.kinks;
          f = numeric(1e-7);
        }
        err = rel(a, f);
        ++report.remeasured;
      }
      ++report.coordinates;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = params[k]->name;
        report.worst_analytic = a;
        report.worst_numeric = f;
      }
    }
  }
  return report;
}

}  // namespace testing
