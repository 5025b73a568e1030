#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <random>

namespace ridgefind {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b ^ 0x6a09e667f3bcc909ULL));
}

// Hash of the exact bit patterns of x; +0.0 and -0.0 hash differently.
inline std::uint64_t hash_doubles(std::uint64_t seed, const double* x, std::size_t n) {
  std::uint64_t h = splitmix64(seed ^ static_cast<std::uint64_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &x[i], sizeof bits);
    h = hash_combine(h, bits);
  }
  return h;
}

// Maps a 64-bit hash to [0, 1).
inline double unit_interval(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Samples are drawn in fixed-size blocks so that the random numbers a sample
// receives depend only on its index, never on how work is split across threads.
inline constexpr std::size_t kSampleBlock = 2048;

// A seeded stream; child() derives independent substreams by counter.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;

  RngStream() = default;
  explicit RngStream(std::uint64_t s) : seed(s), path(splitmix64(s)) {}

  RngStream child(std::uint64_t tag) const {
    RngStream r;
    r.seed = seed;
    r.path = hash_combine(path, tag);
    return r;
  }

  std::mt19937_64 engine(std::uint64_t block = 0) const {
    const std::uint64_t k = hash_combine(path, block ^ 0xb7e151628aed2a6bULL);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return std::mt19937_64(seq);
  }
};

}  // namespace ridgefind
