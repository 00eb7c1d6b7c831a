#pragma once

#include <cstdint>
#include <random>

namespace gesturekit {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index so that independent consumers
/// (one per gesture, per trace, per repetition) get uncorrelated generators.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) { return Rng(derive_seed(base, stream)); }

}  // namespace gesturekit
