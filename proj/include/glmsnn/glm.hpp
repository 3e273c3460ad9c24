#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glmsnn/encoding.hpp"
#include "glmsnn/rng.hpp"

namespace glmsnn {

// ---------------------------------------------------------------------------
// Link function
// ---------------------------------------------------------------------------

/// Sigmoid link. Every quantity is evaluated in a form that stays accurate when
/// |u| is large: the complement is sigma(-u), never 1 - sigma(u).
struct SigmoidLink {
  static double value(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
  }
  static double complement(double u) { return value(-u); }
  /// log sigma(u) = -log1p(exp(-u)).
  static double log_value(double u) {
    return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
  }
  static double log_complement(double u) { return log_value(-u); }
  static double derivative(double u) { return value(u) * complement(u); }
  /// g'(u) / (g(u) (1 - g(u))), identically one for the sigmoid.
  static double rho(double /*u*/) { return 1.0; }
};

using Link = SigmoidLink;

inline double activation(double u) { return Link::value(u); }
inline double activation_complement(double u) { return Link::complement(u); }

// ---------------------------------------------------------------------------
// Basis
// ---------------------------------------------------------------------------

enum class BasisKind { kRaisedCosine, kIdentity, kExplicit };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

struct RaisedCosineConfig {
  double log_stretch = 7500.0;
  double offset = 1.0;
  /// Lags (1-based) whose warped positions bound the evenly spaced centers.
  /// `last_center_lag == 0` means the window length.
  int first_center_lag = 1;
  int last_center_lag = 0;

  friend bool operator==(const RaisedCosineConfig&, const RaisedCosineConfig&) = default;
};

struct BasisSpec {
  BasisKind kind = BasisKind::kRaisedCosine;
  int count = 1;
  int window = 1;
  RaisedCosineConfig cosine;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// Raised cosine bumps over lags 1..window (one column per bump). Bump k is
///   0.5 * cos(a log(t + c) - phi_k) + 0.5   when |a log(t + c) - phi_k| <= pi,
///   0                                       otherwise.
/// Centers are spread evenly in the warped coordinate a log(t + c) between the
/// configured end lags and snapped to the nearest integer lag, so every column
/// peaks at exactly 1. When count <= number of available lags the centers are
/// distinct and strictly increasing.
Eigen::MatrixXd raised_cosine_basis(int count, int window, const RaisedCosineConfig& config = {});

/// Center lags (1-based) used by raised_cosine_basis.
std::vector<int> raised_cosine_center_lags(int count, int window,
                                           const RaisedCosineConfig& config = {});

/// Column k is the indicator of lag k.
Eigen::MatrixXd identity_basis(int window);

Eigen::MatrixXd build_basis(const BasisSpec& spec);

/// A w. Throws ShapeError when basis.cols() != w.size().
Eigen::VectorXd kernel_from_weights(const Eigen::MatrixXd& basis, const Eigen::VectorXd& weights);

struct BasisMatrix {
  Eigen::MatrixXd synaptic;  // tau_y x K_alpha
  Eigen::MatrixXd feedback;  // tau'_y x K_beta
  BasisSpec synaptic_spec;
  BasisSpec feedback_spec;

  static BasisMatrix from_specs(const BasisSpec& synaptic, const BasisSpec& feedback);
  /// Throws DomainError on non-finite entries or an all-zero column.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct ModelDims {
  int n_inputs = 1;
  int n_outputs = 2;
  int horizon = 1;
  int syn_window = 1;
  int fb_window = 1;
  int syn_basis = 1;
  int fb_basis = 1;

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Learnable parameters of one output neuron. Row j of `weights` holds w_{j,i}.
struct NeuronParams {
  Eigen::MatrixXd weights;   // N_X x K_alpha
  Eigen::VectorXd feedback;  // K_beta
  double bias = 0.0;
};

struct ModelParams {
  ModelDims dims;
  BasisMatrix basis;
  std::vector<NeuronParams> neurons;

  /// Checks shape consistency and finiteness. Throws ShapeError/DomainError.
  void validate() const;
};

/// Gradient with the same layout as ModelParams::neurons.
struct GradientSet {
  std::vector<NeuronParams> neurons;
};

/// All-zero parameters. Dimensions of the basis specs must match `dims`.
ModelParams make_model(const ModelDims& dims, const BasisSpec& synaptic,
                       const BasisSpec& feedback);

/// Fills W, V and gamma with U[lo, hi] draws.
void init_uniform(ModelParams& params, Rng& rng, double lo = -1.0, double hi = 1.0);

GradientSet zero_gradient(const ModelDims& dims);

/// params += step * grads.
void ascend(ModelParams& params, const GradientSet& grads, double step);

bool all_finite(const std::vector<NeuronParams>& neurons);

/// Flat coordinate view used by the finite-difference oracle. Per neuron the
/// order is W (row-major), then v, then gamma.
std::size_t parameter_count(const ModelDims& dims);
double& coordinate(std::vector<NeuronParams>& neurons, const ModelDims& dims, std::size_t k);
double coordinate(const std::vector<NeuronParams>& neurons, const ModelDims& dims, std::size_t k);
std::string coordinate_name(const ModelDims& dims, std::size_t k);

// ---------------------------------------------------------------------------
// Membrane potential and likelihood
// ---------------------------------------------------------------------------

/// Lag-ordered window of length `window` ending just before step t (1-based):
/// entry d - 1 holds train[t - d], zero when t - d < 1.
Eigen::VectorXd lag_window(std::span<const std::uint8_t> train, int t, int window);

/// u = sum_j (A w_j)^T x_j + (B v)^T y + gamma for lag-ordered windows.
/// `x_windows` is N_X x tau_y, `y_window` has length tau'_y.
double membrane_potential(const NeuronParams& params, const BasisMatrix& basis,
                          const Eigen::MatrixXd& x_windows, const Eigen::VectorXd& y_window);

struct SpikeEvent {
  std::uint32_t train;
  std::uint32_t t;  // 0-based step
};

std::vector<SpikeEvent> spike_events(const SpikeRaster& raster);

/// Synaptic drive plus bias, u without the feedback term, as N_Y x T.
/// `terms_per_step[t]` (if given) receives the number of nonzero input-window
/// entries seen at step t, i.e. the additions an event-driven neuron performs.
Eigen::MatrixXd synaptic_drive(const ModelParams& params, std::span<const SpikeEvent> x_events,
                               std::vector<std::size_t>* terms_per_step = nullptr);

/// Feedback contribution (B v_i)^T y-window for neuron i at step t (0-based).
double feedback_drive(const Eigen::VectorXd& feedback_kernel, std::span<const std::uint8_t> y,
                      std::size_t t);

/// Full potentials N_Y x T. `y` supplies the feedback spikes; nullptr means
/// all feedback spikes are zero.
Eigen::MatrixXd potentials(const ModelParams& params, const SpikeRaster& x,
                           const SpikeRaster* y);

/// Adds sum_t coef(i, t) * d u_{i,t} / d theta_i into `grads`. Feedback
/// gradients are accumulated only when `y` is non-null.
void accumulate_potential_gradient(const ModelParams& params,
                                   std::span<const SpikeEvent> x_events, const SpikeRaster* y,
                                   const Eigen::MatrixXd& coef, GradientSet& grads);

/// log p(y_i | x) for a single neuron with true feedback from y.
double log_likelihood_neuron(const NeuronParams& params, const BasisMatrix& basis,
                             std::span<const std::uint8_t> y, const SpikeRaster& x);

}  // namespace glmsnn
