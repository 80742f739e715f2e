#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace balrisk {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based substream key: hashes a master seed together with a path of
// coordinates (cell id, rep id, chunk id, ...). Streams keyed by distinct
// paths are independent of scheduling.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t c : path) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

// Stream tags, so that different purposes never share a substream.
namespace stream {
inline constexpr std::uint64_t labels = 1;
inline constexpr std::uint64_t positive = 2;
inline constexpr std::uint64_t negative = 3;
inline constexpr std::uint64_t marginal = 4;
inline constexpr std::uint64_t train = 5;
inline constexpr std::uint64_t test = 6;
inline constexpr std::uint64_t oracle = 7;
inline constexpr std::uint64_t risk = 8;
inline constexpr std::uint64_t scores = 9;
inline constexpr std::uint64_t subsample = 10;
}  // namespace stream

}  // namespace balrisk
