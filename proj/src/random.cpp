#include "lrd/random.hpp"

#include <cmath>
#include <numbers>

namespace lrd {

double GaussianSource::uniform() {
  // (k + 1) / 2^53 with k in [0, 2^53) lies in (0, 1], so log() is finite.
  const std::uint64_t k = engine_() >> 11;
  return (static_cast<double>(k) + 1.0) * 0x1.0p-53;
}

double GaussianSource::operator()() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace lrd
