#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dualgnn {

/// Root of all randomness for one operation. Same seed, same result.
struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a path of indices below `base`. Each component is mixed in
/// turn, so siblings never share a stream and adding a component elsewhere
/// does not move existing ones.
inline Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(base.value);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p));
  return {h};
}

inline std::uint64_t double_bits(double x) { return std::bit_cast<std::uint64_t>(x); }

inline std::mt19937_64 make_rng(Seed s) { return std::mt19937_64(s.value); }

}  // namespace dualgnn
