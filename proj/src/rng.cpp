#include "pipekrylov/rng.hpp"

#include <cmath>
#include <numbers>

namespace pipekrylov {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

SplitMix64 SplitMix64::split() { return SplitMix64(next()); }

double GaussianSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u lies in (0, 1], keeping the logarithm finite.
  const double u1 = 1.0 - rng_.uniform();
  const double u2 = rng_.uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector GaussianSampler::vector(std::size_t n) {
  Vector g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = next();
  return g;
}

Vector GaussianSampler::unit_vector(std::size_t n) {
  Vector g = vector(n);
  const double nrm = norm2(g);
  if (nrm == 0.0) return unit_vector(n);
  return g.scale(1.0 / nrm);
}

}  // namespace pipekrylov
