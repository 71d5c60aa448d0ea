#pragma once

#include <cstdint>

#include "pipekrylov/linalg.hpp"

namespace pipekrylov {

/// SplitMix64 generator. The whole state is one 64-bit word, so copies
/// replay identical streams.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Independent generator derived from this one's stream.
  SplitMix64 split();

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Standard normal samples by the Box-Muller transform; the second value of
/// each pair is cached.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed = 0) : rng_(seed) {}

  double next();
  /// Vector of i.i.d. standard normal entries.
  Vector vector(std::size_t n);
  /// Gaussian direction scaled to unit 2-norm.
  Vector unit_vector(std::size_t n);

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pipekrylov
