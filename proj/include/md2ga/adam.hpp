#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "md2ga/tensor.hpp"

namespace md2ga {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // 0 disables global-norm gradient clipping
};

struct AdamState {
  long long steps = 0;
  std::vector<std::vector<double>> m1, m2;  // aligned with the param list
};

inline AdamState init_adam(const std::vector<std::pair<std::string, Tensor>>& params) {
  AdamState s;
  for (const auto& [name, t] : params) {
    s.m1.emplace_back(t.size(), 0.0);
    s.m2.emplace_back(t.size(), 0.0);
  }
  return s;
}

// Bias-corrected Adam over the tensors' accumulated gradients, in place.
// Gradients are validated first: a non-finite entry aborts naming the
// parameter, since continuing would silently poison every later step.
inline void adam_step(std::vector<std::pair<std::string, Tensor>> params,
                      AdamState& state, const AdamConfig& cfg) {
  if (params.size() != state.m1.size())
    throw std::invalid_argument("adam_step: state tracks " +
                                std::to_string(state.m1.size()) + " tensors, got " +
                                std::to_string(params.size()));

  double sq_norm = 0.0;
  for (auto& [name, t] : params) {
    for (double g : t.grad()) {
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient in '" + name + "'");
      sq_norm += g * g;
    }
  }
  const double norm = std::sqrt(sq_norm);
  const double clip_scale =
      (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;

  ++state.steps;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.steps));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.steps));
  for (size_t i = 0; i < params.size(); ++i) {
    auto& t = params[i].second;
    auto values = t.values_mut();
    auto grad = t.grad();
    auto& m1 = state.m1[i];
    auto& m2 = state.m2[i];
    if (m1.size() != t.size())
      throw std::invalid_argument("adam_step: state shape mismatch for '" +
                                  params[i].first + "'");
    for (size_t j = 0; j < values.size(); ++j) {
      const double g = grad[j] * clip_scale;
      m1[j] = cfg.beta1 * m1[j] + (1.0 - cfg.beta1) * g;
      m2[j] = cfg.beta2 * m2[j] + (1.0 - cfg.beta2) * g * g;
      values[j] -= cfg.lr * (m1[j] / bc1) / (std::sqrt(m2[j] / bc2) + cfg.eps);
    }
  }
}

}  // namespace md2ga
