#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "glmsnn/error.hpp"
#include "glmsnn/glm.hpp"
#include "glmsnn/rng.hpp"

namespace glmsnn::detail {

/// Shared minibatch-of-one ascent loop. `grad_fn(example)` returns a
/// LossAndGradient-like value with `loglik` and `grads`.
template <typename Example, typename GradFn>
double run_sgd_epoch(ModelParams& params, std::span<const Example> data, double learning_rate,
                     Rng& rng, const char* trainer, GradFn&& grad_fn) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError(std::string(trainer) + ": learning rate must be finite and >= 0");
  }
  if (data.empty()) return 0.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  double total = 0.0;
  for (std::size_t idx : order) {
    auto result = grad_fn(data[idx]);
    if (!std::isfinite(result.loglik) || !all_finite(result.grads.neurons)) {
      throw NumericError(std::string(trainer) + ": non-finite log-likelihood or gradient at example " +
                         std::to_string(idx) + " (loglik = " + std::to_string(result.loglik) + ")");
    }
    total += result.loglik;
    if (learning_rate != 0.0) ascend(params, result.grads, learning_rate);
  }
  if (!all_finite(params.neurons)) {
    throw NumericError(std::string(trainer) + ": parameters became non-finite");
  }
  return total / static_cast<double>(data.size());
}

}  // namespace glmsnn::detail
