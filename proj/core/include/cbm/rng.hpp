#pragma once

#include <cstdint>
#include <random>

namespace cbm {

/// (seed, stream) pair naming one independent, reproducible random stream.
/// Identical pairs give identical draws; distinct streams are decorrelated
/// by SplitMix64 mixing before seeding the engine.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::mt19937_64 engine() const;
  RngSeed with_stream(std::uint64_t s) const { return {seed, s}; }
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cbm
