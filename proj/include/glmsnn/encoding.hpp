#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "glmsnn/rng.hpp"

namespace glmsnn {

/// A bank of equally long binary spike trains, stored train-major. Row `j` is
/// the train of neuron `j`; column `t` (0-based) is time step t + 1.
class SpikeRaster {
 public:
  SpikeRaster() = default;
  SpikeRaster(std::size_t n_trains, std::size_t horizon)
      : n_trains_(n_trains), horizon_(horizon), bits_(n_trains * horizon, 0) {}

  std::size_t n_trains() const { return n_trains_; }
  std::size_t horizon() const { return horizon_; }

  std::uint8_t at(std::size_t train, std::size_t t) const { return bits_[train * horizon_ + t]; }
  void set(std::size_t train, std::size_t t, bool spike) {
    bits_[train * horizon_ + t] = spike ? 1 : 0;
  }

  std::span<const std::uint8_t> train(std::size_t j) const {
    return {bits_.data() + j * horizon_, horizon_};
  }
  std::span<std::uint8_t> train(std::size_t j) { return {bits_.data() + j * horizon_, horizon_}; }

  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t spike_count() const;

  friend bool operator==(const SpikeRaster&, const SpikeRaster&) = default;

 private:
  std::size_t n_trains_ = 0;
  std::size_t horizon_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct EncodedExample {
  SpikeRaster inputs;
  int label = 0;
};

/// Spike probability for an 8-bit intensity: v / 510, so 255 maps to 1/2.
constexpr double spike_probability(std::uint8_t intensity) {
  return static_cast<double>(intensity) / 510.0;
}

/// I.i.d. Bernoulli rate code of `pixels` over `horizon` steps. Zero pixels
/// consume no random draws.
SpikeRaster rate_encode(std::span<const std::uint8_t> pixels, std::size_t horizon, Rng& rng);

EncodedExample rate_encode(std::span<const std::uint8_t> pixels, int label,
                           std::size_t horizon, Rng& rng);

/// Ones over total samples. Throws DomainError on an empty raster.
double spike_fraction(const SpikeRaster& trains);
double spike_fraction(std::span<const std::uint8_t> train);

}  // namespace glmsnn
