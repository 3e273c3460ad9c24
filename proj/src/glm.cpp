#include "glmsnn/glm.hpp"

#include <algorithm>
#include <numbers>

#include "glmsnn/error.hpp"

namespace glmsnn {

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::kRaisedCosine:
      return "raised_cosine";
    case BasisKind::kIdentity:
      return "identity";
    case BasisKind::kExplicit:
      return "explicit";
  }
  return "unknown";
}

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "raised_cosine") return BasisKind::kRaisedCosine;
  if (name == "identity") return BasisKind::kIdentity;
  if (name == "explicit") return BasisKind::kExplicit;
  throw DomainError("unknown basis kind '" + name + "'");
}

std::vector<int> raised_cosine_center_lags(int count, int window,
                                           const RaisedCosineConfig& config) {
  if (count < 1 || window < 1) throw DomainError("raised_cosine_basis: K and tau must be >= 1");
  if (!(config.log_stretch > 0.0)) throw DomainError("raised_cosine_basis: a must be > 0");
  if (!(config.offset > -1.0)) throw DomainError("raised_cosine_basis: c must be > -1");
  const int first = config.first_center_lag;
  const int last = config.last_center_lag == 0 ? window : config.last_center_lag;
  if (first < 1 || last < first || last > window) {
    throw DomainError("raised_cosine_basis: center lags must satisfy 1 <= first <= last <= tau");
  }

  const auto warp = [&](double t) { return config.log_stretch * std::log(t + config.offset); };
  const double lo = warp(first);
  const double hi = warp(last);

  std::vector<int> lags(static_cast<std::size_t>(count), first);
  for (int k = 0; k < count; ++k) {
    const double target = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    int best = first;
    for (int t = first + 1; t <= last; ++t) {
      if (std::abs(warp(t) - target) < std::abs(warp(best) - target)) best = t;
    }
    lags[static_cast<std::size_t>(k)] = best;
  }

  // Resolve collisions from snapping when there is room for distinct centers.
  if (count <= last - first + 1) {
    for (std::size_t k = 1; k < lags.size(); ++k) lags[k] = std::max(lags[k], lags[k - 1] + 1);
    lags.back() = std::min(lags.back(), last);
    for (std::size_t k = lags.size() - 1; k-- > 0;) lags[k] = std::min(lags[k], lags[k + 1] - 1);
  }
  return lags;
}

Eigen::MatrixXd raised_cosine_basis(int count, int window, const RaisedCosineConfig& config) {
  const std::vector<int> centers = raised_cosine_center_lags(count, window, config);
  const auto warp = [&](double t) { return config.log_stretch * std::log(t + config.offset); };
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(window, count);
  for (int k = 0; k < count; ++k) {
    const double phase = warp(centers[static_cast<std::size_t>(k)]);
    for (int t = 1; t <= window; ++t) {
      const double arg = warp(t) - phase;
      if (std::abs(arg) <= std::numbers::pi) basis(t - 1, k) = 0.5 * std::cos(arg) + 0.5;
    }
  }
  return basis;
}

Eigen::MatrixXd identity_basis(int window) {
  if (window < 1) throw DomainError("identity_basis: tau must be >= 1");
  return Eigen::MatrixXd::Identity(window, window);
}

Eigen::MatrixXd build_basis(const BasisSpec& spec) {
  switch (spec.kind) {
    case BasisKind::kRaisedCosine:
      return raised_cosine_basis(spec.count, spec.window, spec.cosine);
    case BasisKind::kIdentity:
      if (spec.count != spec.window) {
        throw DomainError("identity basis requires K == tau");
      }
      return identity_basis(spec.window);
    case BasisKind::kExplicit:
      break;
  }
  throw DomainError("explicit bases carry their own matrix and cannot be rebuilt from a spec");
}

Eigen::VectorXd kernel_from_weights(const Eigen::MatrixXd& basis, const Eigen::VectorXd& weights) {
  if (basis.cols() != weights.size()) {
    throw ShapeError("kernel_from_weights: basis has " + std::to_string(basis.cols()) +
                     " columns but weights have length " + std::to_string(weights.size()));
  }
  return basis * weights;
}

BasisMatrix BasisMatrix::from_specs(const BasisSpec& synaptic, const BasisSpec& feedback) {
  BasisMatrix b;
  b.synaptic = build_basis(synaptic);
  b.feedback = build_basis(feedback);
  b.synaptic_spec = synaptic;
  b.feedback_spec = feedback;
  return b;
}

namespace {

void validate_basis(const Eigen::MatrixXd& m, const char* which) {
  if (m.rows() < 1 || m.cols() < 1) throw ShapeError(std::string(which) + " basis is empty");
  if (!m.allFinite()) throw DomainError(std::string(which) + " basis has non-finite entries");
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if ((m.col(k).array() == 0.0).all()) {
      throw DomainError(std::string(which) + " basis column " + std::to_string(k) +
                        " is identically zero");
    }
  }
}

}  // namespace

void BasisMatrix::validate() const {
  validate_basis(synaptic, "synaptic");
  validate_basis(feedback, "feedback");
}

void ModelDims::validate() const {
  if (n_inputs < 1 || horizon < 1 || syn_window < 1 || fb_window < 1 || syn_basis < 1 ||
      fb_basis < 1) {
    throw DomainError("all model dimensions must be >= 1");
  }
  if (n_outputs < 2) throw DomainError("at least two output neurons are required");
}

void ModelParams::validate() const {
  dims.validate();
  basis.validate();
  if (basis.synaptic.rows() != dims.syn_window || basis.synaptic.cols() != dims.syn_basis ||
      basis.feedback.rows() != dims.fb_window || basis.feedback.cols() != dims.fb_basis) {
    throw ShapeError("basis shape disagrees with model dimensions");
  }
  if (neurons.size() != static_cast<std::size_t>(dims.n_outputs)) {
    throw ShapeError("neuron count disagrees with N_Y");
  }
  for (const NeuronParams& n : neurons) {
    if (n.weights.rows() != dims.n_inputs || n.weights.cols() != dims.syn_basis ||
        n.feedback.size() != dims.fb_basis) {
      throw ShapeError("neuron parameter shape disagrees with model dimensions");
    }
  }
  if (!all_finite(neurons)) throw DomainError("model parameters contain non-finite values");
}

ModelParams make_model(const ModelDims& dims, const BasisSpec& synaptic,
                       const BasisSpec& feedback) {
  dims.validate();
  if (synaptic.count != dims.syn_basis || synaptic.window != dims.syn_window ||
      feedback.count != dims.fb_basis || feedback.window != dims.fb_window) {
    throw ShapeError("basis specs disagree with model dimensions");
  }
  ModelParams p;
  p.dims = dims;
  p.basis = BasisMatrix::from_specs(synaptic, feedback);
  p.neurons = zero_gradient(dims).neurons;
  p.validate();
  return p;
}

void init_uniform(ModelParams& params, Rng& rng, double lo, double hi) {
  const auto draw = [&] { return lo + (hi - lo) * uniform01(rng); };
  for (NeuronParams& n : params.neurons) {
    for (Eigen::Index j = 0; j < n.weights.rows(); ++j) {
      for (Eigen::Index k = 0; k < n.weights.cols(); ++k) n.weights(j, k) = draw();
    }
    for (Eigen::Index k = 0; k < n.feedback.size(); ++k) n.feedback(k) = draw();
    n.bias = draw();
  }
}

GradientSet zero_gradient(const ModelDims& dims) {
  GradientSet g;
  g.neurons.resize(static_cast<std::size_t>(dims.n_outputs));
  for (NeuronParams& n : g.neurons) {
    n.weights = Eigen::MatrixXd::Zero(dims.n_inputs, dims.syn_basis);
    n.feedback = Eigen::VectorXd::Zero(dims.fb_basis);
    n.bias = 0.0;
  }
  return g;
}

void ascend(ModelParams& params, const GradientSet& grads, double step) {
  if (grads.neurons.size() != params.neurons.size()) throw ShapeError("gradient shape mismatch");
  for (std::size_t i = 0; i < params.neurons.size(); ++i) {
    params.neurons[i].weights += step * grads.neurons[i].weights;
    params.neurons[i].feedback += step * grads.neurons[i].feedback;
    params.neurons[i].bias += step * grads.neurons[i].bias;
  }
}

bool all_finite(const std::vector<NeuronParams>& neurons) {
  return std::all_of(neurons.begin(), neurons.end(), [](const NeuronParams& n) {
    return n.weights.allFinite() && n.feedback.allFinite() && std::isfinite(n.bias);
  });
}

std::size_t parameter_count(const ModelDims& dims) {
  const auto per_neuron = static_cast<std::size_t>(dims.n_inputs * dims.syn_basis + dims.fb_basis + 1);
  return per_neuron * static_cast<std::size_t>(dims.n_outputs);
}

namespace {

struct CoordinateRef {
  std::size_t neuron;
  int block;  // 0 = W, 1 = v, 2 = gamma
  std::size_t row;
  std::size_t col;
};

CoordinateRef locate(const ModelDims& dims, std::size_t k) {
  if (k >= parameter_count(dims)) throw DomainError("coordinate index out of range");
  const auto n_w = static_cast<std::size_t>(dims.n_inputs * dims.syn_basis);
  const std::size_t per_neuron = n_w + static_cast<std::size_t>(dims.fb_basis) + 1;
  const std::size_t neuron = k / per_neuron;
  std::size_t r = k % per_neuron;
  if (r < n_w) {
    const auto kb = static_cast<std::size_t>(dims.syn_basis);
    return {neuron, 0, r / kb, r % kb};
  }
  r -= n_w;
  if (r < static_cast<std::size_t>(dims.fb_basis)) return {neuron, 1, r, 0};
  return {neuron, 2, 0, 0};
}

}  // namespace

double& coordinate(std::vector<NeuronParams>& neurons, const ModelDims& dims, std::size_t k) {
  const CoordinateRef c = locate(dims, k);
  NeuronParams& n = neurons.at(c.neuron);
  switch (c.block) {
    case 0:
      return n.weights(static_cast<Eigen::Index>(c.row), static_cast<Eigen::Index>(c.col));
    case 1:
      return n.feedback(static_cast<Eigen::Index>(c.row));
    default:
      return n.bias;
  }
}

double coordinate(const std::vector<NeuronParams>& neurons, const ModelDims& dims, std::size_t k) {
  return coordinate(const_cast<std::vector<NeuronParams>&>(neurons), dims, k);
}

std::string coordinate_name(const ModelDims& dims, std::size_t k) {
  const CoordinateRef c = locate(dims, k);
  const std::string i = std::to_string(c.neuron);
  switch (c.block) {
    case 0:
      return "W[" + i + "][" + std::to_string(c.row) + "][" + std::to_string(c.col) + "]";
    case 1:
      return "v[" + i + "][" + std::to_string(c.row) + "]";
    default:
      return "gamma[" + i + "]";
  }
}

Eigen::VectorXd lag_window(std::span<const std::uint8_t> train, int t, int window) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(window);
  for (int d = 1; d <= window; ++d) {
    const int s = t - d;  // 1-based sample index
    if (s >= 1 && s <= static_cast<int>(train.size())) w(d - 1) = train[static_cast<std::size_t>(s - 1)];
  }
  return w;
}

double membrane_potential(const NeuronParams& params, const BasisMatrix& basis,
                          const Eigen::MatrixXd& x_windows, const Eigen::VectorXd& y_window) {
  if (x_windows.rows() != params.weights.rows() || x_windows.cols() != basis.synaptic.rows() ||
      params.weights.cols() != basis.synaptic.cols() || y_window.size() != basis.feedback.rows() ||
      params.feedback.size() != basis.feedback.cols()) {
    throw ShapeError("membrane_potential: window or parameter shape mismatch");
  }
  double u = params.bias;
  for (Eigen::Index j = 0; j < x_windows.rows(); ++j) {
    const Eigen::VectorXd kernel = kernel_from_weights(basis.synaptic, params.weights.row(j).transpose());
    u += kernel.dot(x_windows.row(j).transpose());
  }
  u += kernel_from_weights(basis.feedback, params.feedback).dot(y_window);
  return u;
}

std::vector<SpikeEvent> spike_events(const SpikeRaster& raster) {
  std::vector<SpikeEvent> events;
  for (std::size_t j = 0; j < raster.n_trains(); ++j) {
    const auto row = raster.train(j);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (row[t]) events.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(t)});
    }
  }
  return events;
}

Eigen::MatrixXd synaptic_drive(const ModelParams& params, std::span<const SpikeEvent> x_events,
                               std::vector<std::size_t>* terms_per_step) {
  const int n_out = params.dims.n_outputs;
  const int horizon = params.dims.horizon;
  const Eigen::MatrixXd& basis = params.basis.synaptic;
  const int window = static_cast<int>(basis.rows());

  Eigen::MatrixXd drive(n_out, horizon);
  for (int i = 0; i < n_out; ++i) drive.row(i).setConstant(params.neurons[static_cast<std::size_t>(i)].bias);
  if (terms_per_step != nullptr) terms_per_step->assign(static_cast<std::size_t>(horizon), 0);

  // A spike of input j at step s reaches u_{i, s + d} through the kernel entry
  // at lag d, which is row d - 1 of A times w_{j,i}.
  for (const SpikeEvent& e : x_events) {
    const int reach = std::min(window, horizon - 1 - static_cast<int>(e.t));
    for (int d = 1; d <= reach; ++d) {
      const int t = static_cast<int>(e.t) + d;
      for (int i = 0; i < n_out; ++i) {
        drive(i, t) += basis.row(d - 1).dot(params.neurons[static_cast<std::size_t>(i)].weights.row(e.train));
      }
      if (terms_per_step != nullptr) ++(*terms_per_step)[static_cast<std::size_t>(t)];
    }
  }
  return drive;
}

double feedback_drive(const Eigen::VectorXd& feedback_kernel, std::span<const std::uint8_t> y,
                      std::size_t t) {
  double acc = 0.0;
  const std::size_t window = static_cast<std::size_t>(feedback_kernel.size());
  for (std::size_t d = 1; d <= window && d <= t; ++d) {
    if (y[t - d]) acc += feedback_kernel(static_cast<Eigen::Index>(d - 1));
  }
  return acc;
}

Eigen::MatrixXd potentials(const ModelParams& params, const SpikeRaster& x, const SpikeRaster* y) {
  if (x.n_trains() != static_cast<std::size_t>(params.dims.n_inputs) ||
      x.horizon() != static_cast<std::size_t>(params.dims.horizon)) {
    throw ShapeError("potentials: input raster shape disagrees with model dimensions");
  }
  const std::vector<SpikeEvent> events = spike_events(x);
  Eigen::MatrixXd u = synaptic_drive(params, events);
  if (y != nullptr) {
    if (y->n_trains() != static_cast<std::size_t>(params.dims.n_outputs) ||
        y->horizon() != x.horizon()) {
      throw ShapeError("potentials: feedback raster shape disagrees with model dimensions");
    }
    for (int i = 0; i < params.dims.n_outputs; ++i) {
      const Eigen::VectorXd beta =
          kernel_from_weights(params.basis.feedback, params.neurons[static_cast<std::size_t>(i)].feedback);
      for (int t = 0; t < params.dims.horizon; ++t) {
        u(i, t) += feedback_drive(beta, y->train(static_cast<std::size_t>(i)), static_cast<std::size_t>(t));
      }
    }
  }
  return u;
}

void accumulate_potential_gradient(const ModelParams& params,
                                   std::span<const SpikeEvent> x_events, const SpikeRaster* y,
                                   const Eigen::MatrixXd& coef, GradientSet& grads) {
  const int n_out = params.dims.n_outputs;
  const int horizon = params.dims.horizon;
  if (coef.rows() != n_out || coef.cols() != horizon) throw ShapeError("coefficient shape mismatch");
  const Eigen::MatrixXd& a = params.basis.synaptic;
  const Eigen::MatrixXd& b = params.basis.feedback;
  const int syn_window = static_cast<int>(a.rows());
  const int fb_window = static_cast<int>(b.rows());

  for (int i = 0; i < n_out; ++i) {
    NeuronParams& g = grads.neurons[static_cast<std::size_t>(i)];
    g.bias += coef.row(i).sum();
  }

  // d u_{i,t} / d w_{j,i} = A^T x-window, so a spike at s adds coef(i, s + d)
  // times row d - 1 of A to row j of dW_i.
  for (const SpikeEvent& e : x_events) {
    const int reach = std::min(syn_window, horizon - 1 - static_cast<int>(e.t));
    for (int d = 1; d <= reach; ++d) {
      const int t = static_cast<int>(e.t) + d;
      for (int i = 0; i < n_out; ++i) {
        grads.neurons[static_cast<std::size_t>(i)].weights.row(e.train) += coef(i, t) * a.row(d - 1);
      }
    }
  }

  if (y == nullptr) return;
  for (int i = 0; i < n_out; ++i) {
    const auto train = y->train(static_cast<std::size_t>(i));
    NeuronParams& g = grads.neurons[static_cast<std::size_t>(i)];
    for (int s = 0; s < horizon; ++s) {
      if (!train[static_cast<std::size_t>(s)]) continue;
      const int reach = std::min(fb_window, horizon - 1 - s);
      for (int d = 1; d <= reach; ++d) g.feedback += coef(i, s + d) * b.row(d - 1).transpose();
    }
  }
}

double log_likelihood_neuron(const NeuronParams& params, const BasisMatrix& basis,
                             std::span<const std::uint8_t> y, const SpikeRaster& x) {
  if (y.size() != x.horizon()) throw ShapeError("log_likelihood_neuron: y length != T");
  if (params.weights.rows() != static_cast<Eigen::Index>(x.n_trains()) ||
      params.weights.cols() != basis.synaptic.cols() || params.feedback.size() != basis.feedback.cols()) {
    throw ShapeError("log_likelihood_neuron: parameter shape mismatch");
  }
  const Eigen::MatrixXd kernels = basis.synaptic * params.weights.transpose();  // tau x N_X
  const Eigen::VectorXd beta = basis.feedback * params.feedback;
  const std::size_t horizon = x.horizon();
  const auto window = static_cast<std::size_t>(kernels.rows());

  double total = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    double u = params.bias + feedback_drive(beta, y, t);
    for (std::size_t j = 0; j < x.n_trains(); ++j) {
      const auto row = x.train(j);
      for (std::size_t d = 1; d <= window && d <= t; ++d) {
        if (row[t - d]) u += kernels(static_cast<Eigen::Index>(d - 1), static_cast<Eigen::Index>(j));
      }
    }
    total += y[t] ? Link::log_value(u) : Link::log_complement(u);
  }
  return total;
}

}  // namespace glmsnn
