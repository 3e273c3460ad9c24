#pragma once

#include <span>
#include <vector>

#include "glmsnn/conventional.hpp"
#include "glmsnn/encoding.hpp"
#include "glmsnn/glm.hpp"
#include "glmsnn/rng.hpp"

namespace glmsnn {

/// Per-step quantities of the first-to-spike likelihood for one example.
struct FirstSpikeStats {
  /// log p_t: probability that the correct neuron fires first, alone, at t.
  std::vector<double> log_p;
  /// q_t = p_t / sum p.
  std::vector<double> q;
  /// h_t = sum_{t' >= t} q_t'.
  std::vector<double> h;
  /// log sum_t p_t.
  double loglik = 0.0;
};

/// Evaluates the statistics with every feedback spike held at zero. All
/// probabilities are combined in the log domain; q is normalized after
/// shifting by the largest log p_t.
FirstSpikeStats first_spike_stats(const ModelParams& params, const EncodedExample& example,
                                  int correct_class);

/// Same statistics from precomputed potentials (N_Y x T).
FirstSpikeStats first_spike_stats(const Eigen::MatrixXd& potentials, int correct_class);

/// q computed by shifting log p by its minimum before exponentiating. Equal to
/// the max-shift result on moderate inputs; overflows when the spread of
/// log p exceeds ~709.
std::vector<double> posterior_weights_min_shift(std::span<const double> log_p);

/// log sum_t p_t and its gradient. For wrong neurons the per-step coefficient
/// is -rho h_t g(u); for the correct neuron it is -rho (h_t g(u) - q_t). The
/// feedback gradient is identically zero. Throws NumericError naming the step
/// of the first non-finite intermediate.
LossAndGradient grad_first_to_spike(const ModelParams& params, const EncodedExample& example,
                                    int correct_class);

inline LossAndGradient grad_first_to_spike(const ModelParams& params, const EncodedExample& example) {
  return grad_first_to_spike(params, example, example.label);
}

double sgd_epoch_first_to_spike(ModelParams& params, std::span<const EncodedExample> data,
                                double learning_rate, Rng& rng);

}  // namespace glmsnn
