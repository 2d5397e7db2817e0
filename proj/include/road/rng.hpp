#pragma once

#include <cstdint>
#include <random>

namespace road {

/// splitmix64 step, used to spread raw seeds and stream ids over 64 bits.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d4a285679b29b5ULL;
  return x ^ (x >> 31);
}

/// Deterministic engine for stream `stream` of a user seed. Distinct
/// streams are decorrelated by hashing instead of by seed arithmetic, so
/// seed 1 / stream 2 and seed 2 / stream 1 do not collide.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(mix64(mix64(seed) ^ mix64(~stream)));
}

}  // namespace road
