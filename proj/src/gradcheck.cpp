#include "netgen/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace netgen::nn {

GradCheckReport gradient_check(const ScalarFragment& fragment, const ParamList& params, double step) {
  fragment(true);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    for (Index i = 0; i < p.value.size(); ++i) {
      double& w = p.value.data()[i];
      const double saved = w;
      w = saved + step;
      const double up = fragment(false);
      w = saved - step;
      const double down = fragment(false);
      w = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k].data()[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++report.coordinates;
      if (err > report.max_rel_error || report.worst_index < 0) {
        report.max_rel_error = err;
        report.worst_param = p.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace netgen::nn
