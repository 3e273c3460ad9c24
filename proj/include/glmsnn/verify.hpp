#pragma once

#include <functional>
#include <string>
#include <vector>

#include "glmsnn/conventional.hpp"
#include "glmsnn/encoding.hpp"
#include "glmsnn/glm.hpp"
#include "glmsnn/rng.hpp"

namespace glmsnn {

inline constexpr double kDefaultFiniteDiffStep = 1e-5;
/// Denominator floor of relative_error, so coordinates whose true gradient is
/// zero are judged on absolute error.
inline constexpr double kRelativeErrorFloor = 1e-3;
/// Enumeration budget: at most 2^16 output patterns.
inline constexpr int kMaxEnumeratedBits = 16;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_coordinate;
  double step = kDefaultFiniteDiffStep;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t coordinates = 0;
};

using LossFn = std::function<double(const ModelParams&)>;

/// Central differences (loss(theta + h e_k) - loss(theta - h e_k)) / 2h over
/// every coordinate. Throws DomainError for h <= 0, NumericError if the loss
/// is non-finite at any probe.
GradientSet finite_diff_gradient(const LossFn& loss, const ModelParams& params,
                                 double step = kDefaultFiniteDiffStep);

/// |a - b| / max(|a|, |b|, kRelativeErrorFloor).
double relative_error(double analytic, double numeric);

GradCheckReport compare_gradients(const ModelDims& dims, const GradientSet& analytic,
                                  const GradientSet& numeric, double step);

GradCheckReport gradcheck_conventional(const ModelParams& params, const EncodedExample& example,
                                       const DesiredOutputScheme& scheme,
                                       double step = kDefaultFiniteDiffStep);

GradCheckReport gradcheck_first_to_spike(const ModelParams& params, const EncodedExample& example,
                                         double step = kDefaultFiniteDiffStep);

/// Brute-force probability, per step t, that neuron `correct_class` fires at t
/// while every neuron was silent before t and every other neuron is silent at
/// t. Sums over all 2^(N_Y T) output patterns with zero feedback, computing
/// potentials window by window. Throws CapacityError when N_Y T > 16.
std::vector<double> enumerate_first_spike_probability(const ModelParams& params,
                                                      const EncodedExample& example,
                                                      int correct_class);

/// Size limits for random gradient-check instances.
struct InstanceLimits {
  int max_inputs = 4;
  int max_outputs = 3;
  int max_horizon = 4;
  int max_basis = 3;
};

struct RandomInstance {
  ModelParams params;
  EncodedExample example;
};

/// Small model with U[-1, 1] parameters, a dense random basis (explicit kind)
/// and random input spikes. The label is uniform over the outputs.
RandomInstance random_instance(Rng& rng, const InstanceLimits& limits = {});

}  // namespace glmsnn
