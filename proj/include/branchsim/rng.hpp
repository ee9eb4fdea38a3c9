#pragma once

// Seeded RNG streams. Every random draw in the library goes through a
// Stream derived from (seed, stream index), so concurrent work can hand
// each unit its own stream and results do not depend on scheduling.

#include <cstdint>
#include <random>

namespace branchsim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes (seed, stream) into a well-spread 64-bit engine seed.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ULL);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(derive_stream_seed(seed, stream)) {}

  std::mt19937_64& engine() { return engine_; }

  // Uniform on [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  // Uniform integer on [lo, hi] inclusive.
  long long uniform_int(long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(engine_);
  }

  // Uniform on (0, 1]; never returns 0 so it is safe under log/pow.
  double uniform_pos() {
    return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double uniform01() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace branchsim
