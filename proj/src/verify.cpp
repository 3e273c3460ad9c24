#include "glmsnn/verify.hpp"

#include <algorithm>
#include <cmath>

#include "glmsnn/error.hpp"
#include "glmsnn/first_to_spike.hpp"

namespace glmsnn {

GradientSet finite_diff_gradient(const LossFn& loss, const ModelParams& params, double step) {
  if (!(step > 0.0)) throw DomainError("finite_diff_gradient: step must be > 0");
  ModelParams probe = params;
  GradientSet grads = zero_gradient(params.dims);
  const std::size_t n = parameter_count(params.dims);
  for (std::size_t k = 0; k < n; ++k) {
    double& theta = coordinate(probe.neurons, probe.dims, k);
    const double saved = theta;
    theta = saved + step;
    const double up = loss(probe);
    theta = saved - step;
    const double down = loss(probe);
    theta = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_gradient: non-finite loss while probing " +
                         coordinate_name(params.dims, k));
    }
    coordinate(grads.neurons, params.dims, k) = (up - down) / (2.0 * step);
  }
  return grads;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport compare_gradients(const ModelDims& dims, const GradientSet& analytic,
                                  const GradientSet& numeric, double step) {
  GradCheckReport report;
  report.step = step;
  report.coordinates = parameter_count(dims);
  for (std::size_t k = 0; k < report.coordinates; ++k) {
    const double a = coordinate(analytic.neurons, dims, k);
    const double f = coordinate(numeric.neurons, dims, k);
    const double err = relative_error(a, f);
    if (err > report.max_rel_error || report.worst_coordinate.empty()) {
      report.max_rel_error = err;
      report.worst_coordinate = coordinate_name(dims, k);
      report.analytic_at_worst = a;
      report.numeric_at_worst = f;
    }
  }
  return report;
}

GradCheckReport gradcheck_conventional(const ModelParams& params, const EncodedExample& example,
                                       const DesiredOutputScheme& scheme, double step) {
  const LossAndGradient analytic = grad_conventional(params, example, scheme);
  const GradientSet numeric = finite_diff_gradient(
      [&](const ModelParams& p) { return conventional_log_likelihood(p, example, scheme); }, params, step);
  return compare_gradients(params.dims, analytic.grads, numeric, step);
}

GradCheckReport gradcheck_first_to_spike(const ModelParams& params, const EncodedExample& example,
                                         double step) {
  const LossAndGradient analytic = grad_first_to_spike(params, example);
  const GradientSet numeric = finite_diff_gradient(
      [&](const ModelParams& p) { return first_spike_stats(p, example, example.label).loglik; },
      params, step);
  return compare_gradients(params.dims, analytic.grads, numeric, step);
}

namespace {

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

std::vector<double> enumerate_first_spike_probability(const ModelParams& params,
                                                      const EncodedExample& example,
                                                      int correct_class) {
  const int n_out = params.dims.n_outputs;
  const int horizon = params.dims.horizon;
  if (n_out * horizon > kMaxEnumeratedBits) {
    throw CapacityError("enumeration budget exceeded: N_Y * T = " + std::to_string(n_out * horizon));
  }
  if (correct_class < 0 || correct_class >= n_out) throw DomainError("class index out of range");
  const SpikeRaster& x = example.inputs;
  if (x.n_trains() != static_cast<std::size_t>(params.dims.n_inputs) ||
      x.horizon() != static_cast<std::size_t>(horizon)) {
    throw ShapeError("enumerate_first_spike_probability: input shape mismatch");
  }

  // Potentials with zero feedback do not depend on the output pattern.
  Eigen::MatrixXd log_fire(n_out, horizon);
  Eigen::MatrixXd log_silent(n_out, horizon);
  const Eigen::VectorXd silent_y = Eigen::VectorXd::Zero(params.dims.fb_window);
  for (int t = 1; t <= horizon; ++t) {
    Eigen::MatrixXd windows(params.dims.n_inputs, params.dims.syn_window);
    for (int j = 0; j < params.dims.n_inputs; ++j) {
      windows.row(j) = lag_window(x.train(static_cast<std::size_t>(j)), t, params.dims.syn_window).transpose();
    }
    for (int i = 0; i < n_out; ++i) {
      const double u = membrane_potential(params.neurons[static_cast<std::size_t>(i)], params.basis,
                                          windows, silent_y);
      log_fire(i, t - 1) = std::log(activation(u));
      log_silent(i, t - 1) = std::log(activation_complement(u));
    }
  }

  std::vector<CompensatedSum> mass(static_cast<std::size_t>(horizon));
  const std::uint32_t n_patterns = 1u << (n_out * horizon);
  for (std::uint32_t pattern = 0; pattern < n_patterns; ++pattern) {
    // Bit i * T + t is y_{i, t + 1}.
    const auto spike = [&](int i, int t) { return ((pattern >> (i * horizon + t)) & 1u) != 0; };
    int first = -1;
    bool unique = false;
    for (int t = 0; t < horizon && first < 0; ++t) {
      int firing = 0;
      for (int i = 0; i < n_out; ++i) firing += spike(i, t) ? 1 : 0;
      if (firing > 0) {
        first = t;
        unique = firing == 1 && spike(correct_class, t);
      }
    }
    if (first < 0 || !unique) continue;
    double log_prob = 0.0;
    for (int i = 0; i < n_out; ++i) {
      for (int t = 0; t < horizon; ++t) log_prob += spike(i, t) ? log_fire(i, t) : log_silent(i, t);
    }
    mass[static_cast<std::size_t>(first)].add(std::exp(log_prob));
  }

  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = mass[t].value();
  return out;
}

RandomInstance random_instance(Rng& rng, const InstanceLimits& limits) {
  const auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
  };
  ModelDims dims;
  dims.n_inputs = pick(1, limits.max_inputs);
  dims.n_outputs = pick(2, std::max(2, limits.max_outputs));
  dims.horizon = pick(1, limits.max_horizon);
  dims.syn_window = pick(1, dims.horizon);
  dims.fb_window = pick(1, dims.horizon);
  dims.syn_basis = pick(1, limits.max_basis);
  dims.fb_basis = pick(1, limits.max_basis);

  const auto random_basis = [&](int window, int count) {
    BasisSpec spec{BasisKind::kExplicit, count, window, {}};
    Eigen::MatrixXd m(window, count);
    for (int r = 0; r < window; ++r) {
      for (int c = 0; c < count; ++c) m(r, c) = 0.1 + uniform01(rng);
    }
    return std::pair{spec, m};
  };
  auto [syn_spec, syn] = random_basis(dims.syn_window, dims.syn_basis);
  auto [fb_spec, fb] = random_basis(dims.fb_window, dims.fb_basis);

  RandomInstance inst;
  inst.params.dims = dims;
  inst.params.basis = BasisMatrix{syn, fb, syn_spec, fb_spec};
  inst.params.neurons = zero_gradient(dims).neurons;
  init_uniform(inst.params, rng);
  inst.params.validate();

  inst.example.inputs = SpikeRaster(static_cast<std::size_t>(dims.n_inputs),
                                    static_cast<std::size_t>(dims.horizon));
  for (std::size_t j = 0; j < inst.example.inputs.n_trains(); ++j) {
    for (std::size_t t = 0; t < inst.example.inputs.horizon(); ++t) {
      inst.example.inputs.set(j, t, bernoulli(rng, 0.5));
    }
  }
  inst.example.label = pick(0, dims.n_outputs - 1);
  return inst;
}

}  // namespace glmsnn
