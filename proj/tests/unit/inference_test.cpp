#include <cmath>

#include "doctest.h"
#include "glmsnn/error.hpp"
#include "glmsnn/inference.hpp"
#include "test_util.hpp"

using namespace glmsnn;
using namespace glmsnn::testing;

namespace {

/// Class c is signalled by input c firing at every step; weights make the
/// matching output fire from t = 2 on and keep every other output silent.
ModelParams saturated_model(int n_classes, int horizon) {
  ModelParams m = zero_model(n_classes, n_classes, horizon, horizon);
  for (int i = 0; i < n_classes; ++i) {
    auto& n = m.neurons[static_cast<std::size_t>(i)];
    n.bias = -50.0;
    n.weights.setConstant(-100.0);
    n.weights.row(i).setConstant(100.0);
  }
  return m;
}

std::vector<EncodedExample> saturated_data(int n_classes, int horizon, int per_class) {
  std::vector<EncodedExample> out;
  for (int k = 0; k < per_class; ++k) {
    for (int c = 0; c < n_classes; ++c) {
      EncodedExample ex = silent_example(n_classes, horizon, c);
      for (int t = 0; t < horizon; ++t) ex.inputs.set(static_cast<std::size_t>(c), static_cast<std::size_t>(t), true);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("rate decoding of a saturated neuron") {
  ModelParams m = zero_model(4, 3, 5, 2);
  m.neurons[0].bias = -60.0;
  m.neurons[1].bias = -60.0;
  m.neurons[2].bias = 60.0;
  Rng rng(1);
  const InferenceResult r = decode_rate(m, random_example(4, 5, 2, 0.3, 1).inputs, rng);
  CHECK(r.predicted == 2);
  CHECK(r.per_neuron_spikes[2] == 5);
  CHECK(r.per_neuron_spikes[0] == 0);
  CHECK(r.decision_time == 5);
  CHECK_FALSE(r.horizon_fallback);
  CHECK(decode_rate_expected(m, random_example(4, 5, 2, 0.3, 1).inputs).predicted == 2);
}

TEST_CASE("first-to-spike decoding with a neuron saturated at the first step") {
  ModelParams m = zero_model(50, 3, 8, 4);
  for (auto& n : m.neurons) n.bias = -60.0;
  m.neurons[1].bias = 60.0;
  const EncodedExample ex = random_example(50, 8, 1, 0.4, 2);
  Rng a(3), b(3);
  const InferenceResult f = decode_first_to_spike(m, ex.inputs, a);
  const InferenceResult r = decode_rate(m, ex.inputs, b);
  CHECK(f.predicted == 1);
  CHECK(f.decision_time == 1);
  CHECK_FALSE(f.horizon_fallback);
  CHECK(f.op_count * 8 <= r.op_count);
}

TEST_CASE("horizon fallback when nobody fires") {
  ModelParams m = zero_model(2, 3, 4, 2);
  for (auto& n : m.neurons) n.bias = -80.0;
  m.neurons[2].bias = -70.0;
  Rng rng(1);
  const InferenceResult f = decode_first_to_spike(m, random_example(2, 4, 0, 0.5, 1).inputs, rng);
  CHECK(f.horizon_fallback);
  CHECK(f.decision_time == 4);
  CHECK(f.predicted == 2);
}

TEST_CASE("decoding is deterministic given the seed") {
  const ModelParams m = random_model(20, 3, 6, 3, 4);
  const EncodedExample ex = random_example(20, 6, 0, 0.3, 5);
  for (Decoder d : {Decoder::kRate, Decoder::kFirstToSpike}) {
    Rng a(17), b(17);
    const InferenceResult x = decode(m, ex.inputs, d, Sampling::kStochastic, a);
    const InferenceResult y = decode(m, ex.inputs, d, Sampling::kStochastic, b);
    CHECK(x.predicted == y.predicted);
    CHECK(x.op_count == y.op_count);
    CHECK(x.decision_time == y.decision_time);
    CHECK(x.per_neuron_spikes == y.per_neuron_spikes);
  }
}

TEST_CASE("sparse inputs cost fewer operations") {
  const ModelParams z = zero_model(784, 2, 4, 4);
  const EncodedExample sparse = random_example(784, 4, 0, 0.1, 1);
  const EncodedExample dense = random_example(784, 4, 0, 0.5, 2);
  Rng a(1), b(1);
  const auto ops_sparse = decode_rate(z, sparse.inputs, a).op_count;
  const auto ops_dense = decode_rate(z, dense.inputs, b).op_count;
  CHECK(ops_sparse > 0);
  CHECK(4 * ops_sparse <= ops_dense);
}

TEST_CASE("first-spike time at zero parameters is truncated geometric") {
  constexpr int horizon = 4;
  const ModelParams z = zero_model(3, 2, horizon, 2);
  const EncodedExample ex = silent_example(3, horizon, 0);
  double expected = 0.0;
  for (int t = 1; t <= horizon; ++t) expected += t * std::pow(0.25, t - 1) * 0.75;
  expected += horizon * std::pow(0.25, horizon);
  double sum = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    Rng rng(derive_seed(5, {static_cast<std::uint64_t>(trial)}));
    sum += decode_first_to_spike(z, ex.inputs, rng).decision_time;
  }
  CHECK(std::abs(sum / 10000.0 - expected) <= 0.05 * expected);
}

TEST_CASE("early exit never costs more than rate decoding") {
  Rng pick(6);
  for (int trial = 0; trial < 200; ++trial) {
    const int horizon = 1 + static_cast<int>(pick() % 8);
    const ModelParams m = random_model(30, 2 + static_cast<int>(pick() % 3), horizon,
                                       1 + static_cast<int>(pick() % static_cast<std::uint64_t>(horizon)), pick());
    const EncodedExample ex = random_example(30, horizon, 0, 0.3, pick());
    const std::uint64_t seed = pick();
    Rng a(seed), b(seed);
    const InferenceResult f = decode_first_to_spike(m, ex.inputs, a);
    const InferenceResult r = decode_rate(m, ex.inputs, b);
    CHECK(f.op_count <= r.op_count);
    CHECK(f.decision_time <= horizon);
    CHECK(f.decision_time >= 1);
    CHECK(r.decision_time == horizon);
    CHECK(decode_first_to_spike_expected(m, ex.inputs).op_count >= f.op_count);
  }
}

TEST_CASE("measured operations against the complexity model") {
  // With tau = T the input windows are partly empty at early steps, so the
  // measured count sits below the full-window formula by a fixed factor.
  const ModelParams z = zero_model(784, 2, 4, 4);
  double measured = 0.0, sparsity = 0.0, out_sparsity = 0.0;
  constexpr int runs = 50;
  for (int k = 0; k < runs; ++k) {
    const EncodedExample ex = random_example(784, 4, 0, 0.2, 100 + k);
    Rng rng(k);
    const InferenceResult r = decode_rate(z, ex.inputs, rng);
    measured += static_cast<double>(r.op_count);
    sparsity += spike_fraction(ex.inputs);
    out_sparsity += (r.per_neuron_spikes[0] + r.per_neuron_spikes[1]) / 8.0;
  }
  const ComplexityModel model{z.dims, sparsity / runs, out_sparsity / runs};
  const double factor = measured / runs / model.expected_ops(4);
  MESSAGE("calibration factor (T = tau = 4): " << factor);
  CHECK(factor >= 0.35);
  CHECK(factor <= 0.45);
  CHECK(model.per_class_order(2.0) == doctest::Approx(0.5 * model.per_class_order(4.0)));
}

TEST_CASE("evaluation of a saturated model is perfect") {
  const ModelParams m = saturated_model(3, 4);
  const auto data = saturated_data(3, 4, 10);
  for (Decoder d : {Decoder::kRate, Decoder::kFirstToSpike}) {
    for (Sampling s : {Sampling::kStochastic, Sampling::kExpected}) {
      const EvalSummary r = evaluate(m, std::span<const EncodedExample>(data), EvalOptions{d, s, 2, 1});
      CHECK(r.accuracy == 1.0);
      CHECK(r.decisions == 60);
    }
  }
  const EvalSummary f = evaluate(m, std::span<const EncodedExample>(data), EvalOptions{Decoder::kFirstToSpike, Sampling::kStochastic, 1, 1});
  CHECK(f.mean_decision_time == doctest::Approx(2.0));
}

TEST_CASE("random guessing sits at chance") {
  const ModelParams z = zero_model(784, 2, 4, 4);
  std::vector<LabeledImage> data;
  Rng rng(3);
  for (int k = 0; k < 2000; ++k) {
    LabeledImage img;
    img.label = k % 2;
    img.pixels.resize(784);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
    data.push_back(std::move(img));
  }
  for (Decoder d : {Decoder::kRate, Decoder::kFirstToSpike}) {
    const EvalSummary r = evaluate(z, std::span<const LabeledImage>(data), EvalOptions{d, Sampling::kStochastic, 1, 9});
    CHECK(std::abs(r.accuracy - 0.5) <= 0.03);
    CHECK(r.mean_input_sparsity == doctest::Approx(127.5 / 510.0).epsilon(0.02));
  }
}

TEST_CASE("evaluation errors") {
  const ModelParams z = zero_model(2, 2, 4, 4);
  CHECK_THROWS_AS(evaluate(z, std::span<const LabeledImage>{}, EvalOptions{}), DomainError);
  const auto data = saturated_data(2, 4, 1);
  EvalOptions bad;
  bad.trials_per_example = 0;
  CHECK_THROWS_AS(evaluate(z, std::span<const EncodedExample>(data), bad), DomainError);
  Rng rng(1);
  CHECK_THROWS_AS(decode_rate(z, SpikeRaster(3, 4), rng), ShapeError);
}

TEST_CASE("decoder names") {
  CHECK(decoder_from_string(to_string(Decoder::kRate)) == Decoder::kRate);
  CHECK(decoder_from_string(to_string(Decoder::kFirstToSpike)) == Decoder::kFirstToSpike);
  CHECK(sampling_from_string("expected") == Sampling::kExpected);
  CHECK_THROWS_AS(decoder_from_string("majority"), DomainError);
}
