#pragma once

#include <cstdint>
#include <random>

namespace lrd {

// Standard normal sampler: mt19937_64 uniforms fed through the Box-Muller
// transform. Unlike std::normal_distribution the sequence is fixed
// by this code, so a seed reproduces the same samples on every platform.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double operator()();

 private:
  // Uniform on (0, 1], 53 bits.
  double uniform();

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// 64-bit FNV-1a, used to derive reproducible sub-seeds from text keys.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t hash = 0xcbf29ce484222325ULL);

}  // namespace lrd
