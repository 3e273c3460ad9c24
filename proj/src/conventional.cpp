#include "glmsnn/conventional.hpp"

#include "glmsnn/error.hpp"
#include "sgd_loop.hpp"

namespace glmsnn {

std::vector<std::uint8_t> desired_output(int label, int neuron, int horizon,
                                         const DesiredOutputScheme& scheme) {
  if (scheme.period < 1) throw DomainError("desired output period must be >= 1");
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  std::vector<std::uint8_t> y(static_cast<std::size_t>(horizon), 0);
  if (neuron != label) return y;
  for (int t = scheme.period; t <= horizon; t += scheme.period) y[static_cast<std::size_t>(t - 1)] = 1;
  return y;
}

SpikeRaster desired_outputs(int label, int n_outputs, int horizon,
                            const DesiredOutputScheme& scheme) {
  if (label < 0 || label >= n_outputs) throw DomainError("label out of range");
  SpikeRaster y(static_cast<std::size_t>(n_outputs), static_cast<std::size_t>(horizon));
  const std::vector<std::uint8_t> target = desired_output(label, label, horizon, scheme);
  std::copy(target.begin(), target.end(), y.train(static_cast<std::size_t>(label)).begin());
  return y;
}

double conventional_log_likelihood(const ModelParams& params, const EncodedExample& example,
                                   const DesiredOutputScheme& scheme) {
  const SpikeRaster y =
      desired_outputs(example.label, params.dims.n_outputs, params.dims.horizon, scheme);
  const Eigen::MatrixXd u = potentials(params, example.inputs, &y);
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const auto yi = y.train(static_cast<std::size_t>(i));
    for (Eigen::Index t = 0; t < u.cols(); ++t) {
      total += yi[static_cast<std::size_t>(t)] ? Link::log_value(u(i, t)) : Link::log_complement(u(i, t));
    }
  }
  return total;
}

LossAndGradient grad_conventional(const ModelParams& params, const EncodedExample& example,
                                  const DesiredOutputScheme& scheme) {
  const SpikeRaster y =
      desired_outputs(example.label, params.dims.n_outputs, params.dims.horizon, scheme);
  if (example.inputs.n_trains() != static_cast<std::size_t>(params.dims.n_inputs) ||
      example.inputs.horizon() != static_cast<std::size_t>(params.dims.horizon)) {
    throw ShapeError("grad_conventional: input raster shape disagrees with model dimensions");
  }
  const std::vector<SpikeEvent> events = spike_events(example.inputs);
  Eigen::MatrixXd u = synaptic_drive(params, events);
  for (int i = 0; i < params.dims.n_outputs; ++i) {
    const Eigen::VectorXd beta =
        kernel_from_weights(params.basis.feedback, params.neurons[static_cast<std::size_t>(i)].feedback);
    for (int t = 0; t < params.dims.horizon; ++t) {
      u(i, t) += feedback_drive(beta, y.train(static_cast<std::size_t>(i)), static_cast<std::size_t>(t));
    }
  }

  LossAndGradient out;
  Eigen::MatrixXd coef(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const auto yi = y.train(static_cast<std::size_t>(i));
    for (Eigen::Index t = 0; t < u.cols(); ++t) {
      const bool spike = yi[static_cast<std::size_t>(t)] != 0;
      out.loglik += spike ? Link::log_value(u(i, t)) : Link::log_complement(u(i, t));
      // e = y - g(u); for y = 1 this is 1 - g(u) = g(-u), evaluated directly.
      const double error = spike ? Link::complement(u(i, t)) : -Link::value(u(i, t));
      coef(i, t) = error * Link::rho(u(i, t));
    }
  }
  out.grads = zero_gradient(params.dims);
  accumulate_potential_gradient(params, events, &y, coef, out.grads);
  return out;
}

double sgd_epoch_conventional(ModelParams& params, std::span<const EncodedExample> data,
                              double learning_rate, const DesiredOutputScheme& scheme, Rng& rng) {
  return detail::run_sgd_epoch(params, data, learning_rate, rng, "conventional trainer",
                               [&](const EncodedExample& ex) { return grad_conventional(params, ex, scheme); });
}

}  // namespace glmsnn
