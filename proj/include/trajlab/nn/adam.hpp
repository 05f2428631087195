#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "trajlab/contract.hpp"

namespace trajlab::nn {

// Bias-corrected Adam over a flat parameter vector. Defaults are the usual
// TD3 reference settings (lr 1e-3, betas 0.9/0.999, eps 1e-8).
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t num_params = 0, double lr = 1e-3)
      : learning_rate(lr), m(num_params, 0.0), v(num_params, 0.0) {}
};

inline void adam_step(std::vector<double>& params, const std::vector<double>& grad,
                      AdamState& state) {
  check_contract(params.size() == grad.size() && params.size() == state.m.size(),
                 "adam_step: shape mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

// theta_target <- (1 - rate) * theta_target + rate * theta.
inline void polyak_update(std::vector<double>& target, const std::vector<double>& online,
                          double rate) {
  check_contract(target.size() == online.size(), "polyak_update: shape mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = (1.0 - rate) * target[i] + rate * online[i];
  }
}

}  // namespace trajlab::nn
