#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glmsnn/data_io.hpp"
#include "glmsnn/encoding.hpp"
#include "glmsnn/glm.hpp"
#include "glmsnn/rng.hpp"

namespace glmsnn {

enum class Decoder { kRate, kFirstToSpike };
enum class Sampling { kStochastic, kExpected };

std::string to_string(Decoder decoder);
Decoder decoder_from_string(const std::string& name);
std::string to_string(Sampling sampling);
Sampling sampling_from_string(const std::string& name);

/// Operation accounting. Evaluating u_{i,t} costs one addition per nonzero
/// entry of the input and feedback windows (spikes are binary, so each nonzero
/// entry adds one kernel tap), one addition for the bias, and a flat
/// kActivationOps for the nonlinearity. Kernels A w are precomputed once per
/// model and are not charged per input.
inline constexpr std::uint64_t kActivationOps = 4;

struct InferenceResult {
  int predicted = 0;
  /// 1-based step at which the decision was taken; T for rate decoding.
  int decision_time = 0;
  /// First-to-spike only: no output spike occurred within T.
  bool horizon_fallback = false;
  std::uint64_t op_count = 0;
  /// Rate decoding only: sampled spike count per output neuron.
  std::vector<int> per_neuron_spikes;
};

/// Samples every output neuron for all T steps with the sampled spikes fed
/// back; predicts the neuron with most spikes (ties: larger sum of firing
/// probabilities, then lower index).
InferenceResult decode_rate(const ModelParams& params, const SpikeRaster& x, Rng& rng);

/// Deterministic variant: feedback carries firing probabilities instead of
/// sampled spikes and the prediction is argmax_i sum_t g(u_{i,t}).
InferenceResult decode_rate_expected(const ModelParams& params, const SpikeRaster& x);

/// Steps forward with zero feedback, sampling every neuron each step, and
/// stops at the first step where any neuron fires (ties: larger g(u), then
/// lower index). Without any spike by T, falls back to argmax_i sum_t g(u_{i,t})
/// and flags the result.
InferenceResult decode_first_to_spike(const ModelParams& params, const SpikeRaster& x, Rng& rng);

/// Deterministic variant: predicts the neuron with the largest exact
/// probability of being first (and alone) to fire within T. Charged as a full
/// horizon run.
InferenceResult decode_first_to_spike_expected(const ModelParams& params, const SpikeRaster& x);

InferenceResult decode(const ModelParams& params, const SpikeRaster& x, Decoder decoder,
                       Sampling sampling, Rng& rng);

/// Closed-form complexity estimates for a model at input spike fraction s_x
/// and output spike fraction s_y.
struct ComplexityModel {
  ModelDims dims;
  double input_sparsity = 0.0;
  double output_sparsity = 0.0;

  /// steps * (N_X s_x + s_y): the per-class order of growth.
  double per_class_order(double steps) const;
  /// Expected count under the accounting of kActivationOps, all classes:
  /// N_Y * steps * (N_X s_x tau_y + tau'_y s_y + 1 + kActivationOps).
  /// Window truncation at early steps makes the measured count slightly lower.
  double expected_ops(double steps) const;
};

struct EvalOptions {
  Decoder decoder = Decoder::kFirstToSpike;
  Sampling sampling = Sampling::kStochastic;
  int trials_per_example = 1;
  std::uint64_t seed = 0;
};

struct EvalSummary {
  double accuracy = 0.0;
  double mean_ops = 0.0;
  double mean_decision_time = 0.0;
  double fallback_fraction = 0.0;
  /// Mean fraction of input spikes over all evaluated encodings.
  double mean_input_sparsity = 0.0;
  std::size_t decisions = 0;
};

/// Encodes every image afresh per trial (seeded per example and trial) and
/// decodes it. Throws DomainError on an empty dataset or trials < 1.
EvalSummary evaluate(const ModelParams& params, std::span<const LabeledImage> data,
                     const EvalOptions& options);

/// Same over fixed encodings.
EvalSummary evaluate(const ModelParams& params, std::span<const EncodedExample> data,
                     const EvalOptions& options);

}  // namespace glmsnn
