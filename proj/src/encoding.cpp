#include "glmsnn/encoding.hpp"

#include <numeric>

#include "glmsnn/error.hpp"

namespace glmsnn {

std::size_t SpikeRaster::spike_count() const {
  return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

SpikeRaster rate_encode(std::span<const std::uint8_t> pixels, std::size_t horizon, Rng& rng) {
  if (horizon < 1) throw DomainError("rate_encode: horizon must be >= 1");
  SpikeRaster raster(pixels.size(), horizon);
  for (std::size_t j = 0; j < pixels.size(); ++j) {
    if (pixels[j] == 0) continue;
    const double p = spike_probability(pixels[j]);
    auto row = raster.train(j);
    for (std::size_t t = 0; t < horizon; ++t) row[t] = bernoulli(rng, p) ? 1 : 0;
  }
  return raster;
}

EncodedExample rate_encode(std::span<const std::uint8_t> pixels, int label,
                           std::size_t horizon, Rng& rng) {
  return EncodedExample{rate_encode(pixels, horizon, rng), label};
}

double spike_fraction(const SpikeRaster& trains) {
  if (trains.bits().empty()) throw DomainError("spike_fraction: empty input");
  return static_cast<double>(trains.spike_count()) / static_cast<double>(trains.bits().size());
}

double spike_fraction(std::span<const std::uint8_t> train) {
  if (train.empty()) throw DomainError("spike_fraction: empty input");
  const auto ones = std::accumulate(train.begin(), train.end(), std::size_t{0});
  return static_cast<double>(ones) / static_cast<double>(train.size());
}

}  // namespace glmsnn
