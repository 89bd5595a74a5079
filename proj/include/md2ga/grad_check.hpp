#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "md2ga/tensor.hpp"

namespace md2ga {

struct GradCheckReport {
  std::vector<double> param_max_rel_error;  // one entry per checked parameter
  double max_rel_error = 0.0;
  double step = 0.0;
  bool pass = false;
};

// Compares reverse-mode gradients of `loss_fn` against central differences
// (f(θ+h) − f(θ−h)) / (2h), element by element. `loss_fn` must rebuild the
// graph from the parameters' current values on every call and return the
// scalar loss. Parameter values are perturbed in place and restored.
inline GradCheckReport grad_check(const std::function<Tensor(void)>& loss_fn,
                                  std::vector<Tensor> params, double step,
                                  double tol) {
  GradCheckReport report;
  report.step = step;

  for (auto& p : params) p.zero_grad();
  backward(loss_fn());
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params)
    analytic.emplace_back(p.grad().begin(), p.grad().end());

  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    auto vals = p.values_mut();
    double worst = 0.0;
    for (size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + step;
      const double up = loss_fn().item();
      vals[i] = saved - step;
      const double down = loss_fn().item();
      vals[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi][i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
    report.param_max_rel_error.push_back(worst);
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  report.pass = report.max_rel_error < tol;
  return report;
}

}  // namespace md2ga
