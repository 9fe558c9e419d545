#ifndef ENCDI_RNG_HPP
#define ENCDI_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace encdi {

// SplitMix64 step, used to derive independent sub-streams from one seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a child seed from (seed, stream name). FNV-1a over the name mixed
// through SplitMix64 so that distinct names give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = seed ^ h;
  splitmix64(s);
  return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                                 std::uint64_t index) {
  std::uint64_t s = derive_seed(seed, stream) ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  return splitmix64(s);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream,
                    std::uint64_t index) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace encdi

#endif  // ENCDI_RNG_HPP
