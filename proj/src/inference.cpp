#include "glmsnn/inference.hpp"

#include <algorithm>

#include "glmsnn/error.hpp"
#include "glmsnn/first_to_spike.hpp"

namespace glmsnn {

std::string to_string(Decoder decoder) {
  return decoder == Decoder::kRate ? "rate" : "first_to_spike";
}

Decoder decoder_from_string(const std::string& name) {
  if (name == "rate" || name == "conventional") return Decoder::kRate;
  if (name == "first_to_spike" || name == "first-to-spike") return Decoder::kFirstToSpike;
  throw DomainError("unknown decoder '" + name + "'");
}

std::string to_string(Sampling sampling) {
  return sampling == Sampling::kStochastic ? "stochastic" : "expected";
}

Sampling sampling_from_string(const std::string& name) {
  if (name == "stochastic") return Sampling::kStochastic;
  if (name == "expected") return Sampling::kExpected;
  throw DomainError("unknown sampling mode '" + name + "'");
}

namespace {

struct Drive {
  Eigen::MatrixXd u;                     // synaptic drive + bias, N_Y x T
  std::vector<std::size_t> x_terms;      // nonzero input-window entries per step
  std::vector<Eigen::VectorXd> beta;     // feedback kernels
};

Drive make_drive(const ModelParams& params, const SpikeRaster& x) {
  if (x.n_trains() != static_cast<std::size_t>(params.dims.n_inputs) ||
      x.horizon() != static_cast<std::size_t>(params.dims.horizon)) {
    throw ShapeError("decode: input raster shape disagrees with model dimensions");
  }
  Drive d;
  const std::vector<SpikeEvent> events = spike_events(x);
  d.u = synaptic_drive(params, events, &d.x_terms);
  for (const NeuronParams& n : params.neurons) {
    d.beta.push_back(kernel_from_weights(params.basis.feedback, n.feedback));
  }
  return d;
}

std::uint64_t step_ops(std::size_t x_terms, std::size_t y_terms) {
  return static_cast<std::uint64_t>(x_terms + y_terms) + 1 + kActivationOps;
}

/// Index of the best neuron among `candidates` by (primary, secondary) with
/// lower index winning remaining ties.
template <typename Primary, typename Secondary>
int lexicographic_argmax(int n, Primary primary, Secondary secondary) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    const auto pi = primary(i);
    const auto pb = primary(best);
    if (pi > pb || (pi == pb && secondary(i) > secondary(best))) best = i;
  }
  return best;
}

}  // namespace

InferenceResult decode_rate(const ModelParams& params, const SpikeRaster& x, Rng& rng) {
  const Drive d = make_drive(params, x);
  const int n_out = params.dims.n_outputs;
  const int horizon = params.dims.horizon;
  const auto fb_window = static_cast<std::size_t>(params.dims.fb_window);

  SpikeRaster y(static_cast<std::size_t>(n_out), static_cast<std::size_t>(horizon));
  std::vector<double> mass(static_cast<std::size_t>(n_out), 0.0);
  InferenceResult r;
  r.per_neuron_spikes.assign(static_cast<std::size_t>(n_out), 0);

  for (int t = 0; t < horizon; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    for (int i = 0; i < n_out; ++i) {
      const auto is = static_cast<std::size_t>(i);
      const auto yi = y.train(is);
      std::size_t y_terms = 0;
      for (std::size_t lag = 1; lag <= fb_window && lag <= ts; ++lag) y_terms += yi[ts - lag];
      const double u = d.u(i, t) + feedback_drive(d.beta[is], yi, ts);
      const double p = activation(u);
      mass[is] += p;
      if (bernoulli(rng, p)) {
        y.set(is, ts, true);
        ++r.per_neuron_spikes[is];
      }
      r.op_count += step_ops(d.x_terms[ts], y_terms);
    }
  }
  r.predicted = lexicographic_argmax(
      n_out, [&](int i) { return r.per_neuron_spikes[static_cast<std::size_t>(i)]; },
      [&](int i) { return mass[static_cast<std::size_t>(i)]; });
  r.decision_time = horizon;
  return r;
}

InferenceResult decode_rate_expected(const ModelParams& params, const SpikeRaster& x) {
  const Drive d = make_drive(params, x);
  const int n_out = params.dims.n_outputs;
  const int horizon = params.dims.horizon;
  const int fb_window = params.dims.fb_window;

  Eigen::MatrixXd prob = Eigen::MatrixXd::Zero(n_out, horizon);
  InferenceResult r;
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n_out; ++i) {
      double u = d.u(i, t);
      const int reach = std::min(fb_window, t);
      for (int lag = 1; lag <= reach; ++lag) u += d.beta[static_cast<std::size_t>(i)](lag - 1) * prob(i, t - lag);
      prob(i, t) = activation(u);
      r.op_count += step_ops(d.x_terms[static_cast<std::size_t>(t)], static_cast<std::size_t>(reach));
    }
  }
  const Eigen::VectorXd mass = prob.rowwise().sum();
  r.predicted = lexicographic_argmax(n_out, [&](int i) { return mass(i); }, [](int i) { return -i; });
  r.decision_time = horizon;
  return r;
}

InferenceResult decode_first_to_spike(const ModelParams& params, const SpikeRaster& x, Rng& rng) {
  const Drive d = make_drive(params, x);
  const int n_out = params.dims.n_outputs;
  const int horizon = params.dims.horizon;

  std::vector<double> mass(static_cast<std::size_t>(n_out), 0.0);
  std::vector<double> p(static_cast<std::size_t>(n_out));
  std::vector<bool> fired(static_cast<std::size_t>(n_out));
  InferenceResult r;
  for (int t = 0; t < horizon; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    bool any = false;
    for (int i = 0; i < n_out; ++i) {
      const auto is = static_cast<std::size_t>(i);
      p[is] = activation(d.u(i, t));
      mass[is] += p[is];
      fired[is] = bernoulli(rng, p[is]);
      any = any || fired[is];
      r.op_count += step_ops(d.x_terms[ts], 0);
    }
    if (any) {
      r.predicted = lexicographic_argmax(
          n_out, [&](int i) { return fired[static_cast<std::size_t>(i)] ? 1 : 0; },
          [&](int i) { return p[static_cast<std::size_t>(i)]; });
      r.decision_time = t + 1;
      return r;
    }
  }
  r.predicted = lexicographic_argmax(n_out, [&](int i) { return mass[static_cast<std::size_t>(i)]; },
                                     [](int i) { return -i; });
  r.decision_time = horizon;
  r.horizon_fallback = true;
  return r;
}

InferenceResult decode_first_to_spike_expected(const ModelParams& params, const SpikeRaster& x) {
  const Drive d = make_drive(params, x);
  const int n_out = params.dims.n_outputs;
  std::vector<double> win(static_cast<std::size_t>(n_out));
  for (int c = 0; c < n_out; ++c) win[static_cast<std::size_t>(c)] = first_spike_stats(d.u, c).loglik;
  InferenceResult r;
  r.predicted = lexicographic_argmax(n_out, [&](int i) { return win[static_cast<std::size_t>(i)]; },
                                     [](int i) { return -i; });
  r.decision_time = params.dims.horizon;
  for (std::size_t terms : d.x_terms) r.op_count += static_cast<std::uint64_t>(n_out) * step_ops(terms, 0);
  return r;
}

InferenceResult decode(const ModelParams& params, const SpikeRaster& x, Decoder decoder,
                       Sampling sampling, Rng& rng) {
  if (decoder == Decoder::kRate) {
    return sampling == Sampling::kStochastic ? decode_rate(params, x, rng)
                                             : decode_rate_expected(params, x);
  }
  return sampling == Sampling::kStochastic ? decode_first_to_spike(params, x, rng)
                                           : decode_first_to_spike_expected(params, x);
}

double ComplexityModel::per_class_order(double steps) const {
  return steps * (dims.n_inputs * input_sparsity + output_sparsity);
}

double ComplexityModel::expected_ops(double steps) const {
  const double per_step = dims.n_inputs * input_sparsity * dims.syn_window +
                          dims.fb_window * output_sparsity + 1.0 +
                          static_cast<double>(kActivationOps);
  return dims.n_outputs * steps * per_step;
}

namespace {

struct Accumulator {
  std::size_t correct = 0;
  std::size_t fallbacks = 0;
  double ops = 0.0;
  double time = 0.0;
  double sparsity = 0.0;
  std::size_t n = 0;

  void add(const InferenceResult& r, int label, double input_sparsity) {
    correct += r.predicted == label ? 1 : 0;
    fallbacks += r.horizon_fallback ? 1 : 0;
    ops += static_cast<double>(r.op_count);
    time += r.decision_time;
    sparsity += input_sparsity;
    ++n;
  }

  EvalSummary finish() const {
    const auto dn = static_cast<double>(n);
    return EvalSummary{static_cast<double>(correct) / dn, ops / dn, time / dn,
                       static_cast<double>(fallbacks) / dn, sparsity / dn, n};
  }
};

void check_options(std::size_t n, const EvalOptions& options) {
  if (n == 0) throw DomainError("evaluate: empty dataset");
  if (options.trials_per_example < 1) throw DomainError("evaluate: trials_per_example must be >= 1");
}

}  // namespace

EvalSummary evaluate(const ModelParams& params, std::span<const LabeledImage> data,
                     const EvalOptions& options) {
  check_options(data.size(), options);
  Accumulator acc;
  const auto horizon = static_cast<std::size_t>(params.dims.horizon);
  for (std::size_t e = 0; e < data.size(); ++e) {
    for (int trial = 0; trial < options.trials_per_example; ++trial) {
      const auto tr = static_cast<std::uint64_t>(trial);
      Rng enc_rng(derive_seed(options.seed, {e, tr, 0}));
      const SpikeRaster x = rate_encode(data[e].pixels, horizon, enc_rng);
      Rng dec_rng(derive_seed(options.seed, {e, tr, 1}));
      acc.add(decode(params, x, options.decoder, options.sampling, dec_rng), data[e].label,
              spike_fraction(x));
    }
  }
  return acc.finish();
}

EvalSummary evaluate(const ModelParams& params, std::span<const EncodedExample> data,
                     const EvalOptions& options) {
  check_options(data.size(), options);
  Accumulator acc;
  for (std::size_t e = 0; e < data.size(); ++e) {
    for (int trial = 0; trial < options.trials_per_example; ++trial) {
      Rng dec_rng(derive_seed(options.seed, {e, static_cast<std::uint64_t>(trial), 1}));
      acc.add(decode(params, data[e].inputs, options.decoder, options.sampling, dec_rng),
              data[e].label, spike_fraction(data[e].inputs));
    }
  }
  return acc.finish();
}

}  // namespace glmsnn
