#include "dslga/rng.hpp"

#include <cmath>

namespace dslga {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

SplitRng SplitRng::split(std::string_view tag) const {
  std::uint64_t mix = seed_ ^ fnv1a64(tag);
  // one scrambling pass so sibling streams decorrelate
  std::uint64_t child = splitmix64(mix);
  return SplitRng(child);
}

std::uint64_t SplitRng::next_u64() { return splitmix64(state_); }

double SplitRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitRng::next_gaussian() {
  double u1 = next_double();
  const double u2 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

}  // namespace dslga
