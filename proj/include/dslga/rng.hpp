#pragma once

// dslga/rng.hpp
//
// Portable 64-bit generator (splitmix64) with named stream splitting.
// Every synthetic draw chain is keyed by seed + stage tag, so adding or
// reordering stages never changes the draws of another stage. Output is
// bit-identical across platforms: no std::*_distribution involved.

#include <cstdint>
#include <string_view>

namespace dslga {

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  // Child stream keyed by this stream's seed and a tag.
  SplitRng split(std::string_view tag) const;

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 mantissa bits.
  double next_double();

  // Standard normal via Box-Muller on two uniform draws.
  double next_gaussian();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace dslga
