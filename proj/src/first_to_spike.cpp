#include "glmsnn/first_to_spike.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "glmsnn/error.hpp"
#include "sgd_loop.hpp"

namespace glmsnn {

FirstSpikeStats first_spike_stats(const Eigen::MatrixXd& u, int correct_class) {
  const auto n_out = static_cast<int>(u.rows());
  const auto horizon = static_cast<std::size_t>(u.cols());
  if (correct_class < 0 || correct_class >= n_out) throw DomainError("class index out of range");
  if (n_out < 2) throw DomainError("first-to-spike needs at least two output neurons");

  FirstSpikeStats s;
  s.log_p.resize(horizon);
  double others_silent = 0.0;   // sum_{i != c} sum_{t' <= t} log(1 - g(u_{i,t'}))
  double correct_silent = 0.0;  // sum_{t' < t} log(1 - g(u_{c,t'}))
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto col = static_cast<Eigen::Index>(t);
    for (int i = 0; i < n_out; ++i) {
      if (i != correct_class) others_silent += Link::log_complement(u(i, col));
    }
    s.log_p[t] = others_silent + Link::log_value(u(correct_class, col)) + correct_silent;
    correct_silent += Link::log_complement(u(correct_class, col));
  }

  const double shift = *std::max_element(s.log_p.begin(), s.log_p.end());
  s.q.resize(horizon);
  double norm = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    s.q[t] = std::exp(s.log_p[t] - shift);
    norm += s.q[t];
  }
  for (double& q : s.q) q /= norm;
  s.loglik = shift + std::log(norm);

  s.h.resize(horizon);
  double tail = 0.0;
  for (std::size_t t = horizon; t-- > 0;) {
    tail += s.q[t];
    s.h[t] = tail;
  }
  return s;
}

FirstSpikeStats first_spike_stats(const ModelParams& params, const EncodedExample& example,
                                  int correct_class) {
  return first_spike_stats(potentials(params, example.inputs, nullptr), correct_class);
}

std::vector<double> posterior_weights_min_shift(std::span<const double> log_p) {
  if (log_p.empty()) throw DomainError("posterior_weights_min_shift: empty input");
  const double shift = *std::min_element(log_p.begin(), log_p.end());
  std::vector<double> q(log_p.size());
  double norm = 0.0;
  for (std::size_t t = 0; t < log_p.size(); ++t) {
    q[t] = std::exp(log_p[t] - shift);
    norm += q[t];
  }
  for (double& v : q) v /= norm;
  return q;
}

LossAndGradient grad_first_to_spike(const ModelParams& params, const EncodedExample& example,
                                    int correct_class) {
  if (example.inputs.n_trains() != static_cast<std::size_t>(params.dims.n_inputs) ||
      example.inputs.horizon() != static_cast<std::size_t>(params.dims.horizon)) {
    throw ShapeError("grad_first_to_spike: input raster shape disagrees with model dimensions");
  }
  const std::vector<SpikeEvent> events = spike_events(example.inputs);
  const Eigen::MatrixXd u = synaptic_drive(params, events);
  const FirstSpikeStats stats = first_spike_stats(u, correct_class);

  Eigen::MatrixXd coef(u.rows(), u.cols());
  for (Eigen::Index t = 0; t < u.cols(); ++t) {
    const auto ts = static_cast<std::size_t>(t);
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double weighted = stats.h[ts] * Link::value(u(i, t));
      const double c = i == correct_class ? weighted - stats.q[ts] : weighted;
      coef(i, t) = -Link::rho(u(i, t)) * c;
      if (!std::isfinite(coef(i, t))) {
        throw NumericError("grad_first_to_spike: non-finite coefficient at t = " +
                           std::to_string(t + 1) + ", neuron " + std::to_string(i));
      }
    }
  }

  LossAndGradient out;
  out.loglik = stats.loglik;
  out.grads = zero_gradient(params.dims);
  accumulate_potential_gradient(params, events, nullptr, coef, out.grads);
  return out;
}

double sgd_epoch_first_to_spike(ModelParams& params, std::span<const EncodedExample> data,
                                double learning_rate, Rng& rng) {
  return detail::run_sgd_epoch(params, data, learning_rate, rng, "first-to-spike trainer",
                               [&](const EncodedExample& ex) { return grad_first_to_spike(params, ex); });
}

}  // namespace glmsnn
