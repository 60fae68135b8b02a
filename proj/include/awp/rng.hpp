#pragma once

#include <cstdint>
#include <random>

namespace awp {

/// Engine for every random draw: 64-bit Mersenne Twister (std::mt19937_64).
using Rng = std::mt19937_64;

/// splitmix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent stream for (master seed, stream id). Screens, noise draws
/// and ensemble members each take their own stream id, so results do not
/// depend on evaluation order.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return Rng(mix64(mix64(master_seed) ^ mix64(stream_id + 0x632be59bd9b4e019ULL)));
}

}  // namespace awp
