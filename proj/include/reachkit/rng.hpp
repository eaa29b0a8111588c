#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace reachkit {

std::uint64_t splitmix64(std::uint64_t x);

// Per-stage seed: splitmix64(master ^ splitmix64(fnv1a(tag))).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Portable sampler on top of mt19937_64; avoids std distributions, whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Index drawn from unnormalized nonnegative weights.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace reachkit
