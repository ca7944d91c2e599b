#include "cbm/rng.hpp"

namespace cbm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 RngSeed::engine() const {
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)), static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                    static_cast<std::uint32_t>(splitmix64(stream ^ 0xa0761d6478bd642fULL)),
                    static_cast<std::uint32_t>(splitmix64(stream ^ 0xa0761d6478bd642fULL) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace cbm
