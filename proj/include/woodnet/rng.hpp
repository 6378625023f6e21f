#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace woodnet {

// Every random draw in the project comes from a stream keyed by a tuple of
// integers (seed, purpose, ids...), never from worker identity or call order
// across independent items.
enum class StreamPurpose : std::uint64_t {
  init = 1,
  dropout = 2,
  shuffle = 3,
  balance = 4,
  split = 5,
  augment = 6,
  head = 7,
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

inline Rng make_rng(std::uint64_t seed, StreamPurpose purpose,
                    std::initializer_list<std::uint64_t> ids = {}) {
  std::uint64_t key = stream_key({seed, static_cast<std::uint64_t>(purpose)});
  for (auto id : ids) key = stream_key({key, id});
  return Rng(key);
}

// Uniform in [0, 1) with 53 random bits.
inline double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace woodnet
