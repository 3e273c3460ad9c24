#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glmsnn/encoding.hpp"
#include "glmsnn/glm.hpp"
#include "glmsnn/rng.hpp"

namespace glmsnn {

/// Target train for the correct neuron: a spike at every step divisible by
/// `period` (period = 4 gives one spike after every three zeros).
struct DesiredOutputScheme {
  int period = 4;
};

/// Log-likelihood of one example together with its gradient.
struct LossAndGradient {
  double loglik = 0.0;
  GradientSet grads;
};

std::vector<std::uint8_t> desired_output(int label, int neuron, int horizon,
                                         const DesiredOutputScheme& scheme);

/// All N_Y desired trains for `label`.
SpikeRaster desired_outputs(int label, int n_outputs, int horizon,
                            const DesiredOutputScheme& scheme);

/// Sum over output neurons of log p(y_i(c) | x) with the desired trains fed
/// back through the feedback kernels.
double conventional_log_likelihood(const ModelParams& params, const EncodedExample& example,
                                   const DesiredOutputScheme& scheme);

/// Log-likelihood and its exact gradient. Per neuron and step the error signal
/// e = y - g(u), scaled by rho, is projected onto the input windows (dW), the
/// feedback window (dV) and the bias.
LossAndGradient grad_conventional(const ModelParams& params, const EncodedExample& example,
                                  const DesiredOutputScheme& scheme);

/// One pass of per-example gradient ascent in an order shuffled by `rng`.
/// Returns the mean per-example log-likelihood (evaluated before each update).
/// Throws NumericError on a non-finite log-likelihood or gradient.
double sgd_epoch_conventional(ModelParams& params, std::span<const EncodedExample> data,
                              double learning_rate, const DesiredOutputScheme& scheme, Rng& rng);

}  // namespace glmsnn
