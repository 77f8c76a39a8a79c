#pragma once

#include <cstdint>

namespace rfcw {

// Counter-based generator: every output is a pure function of
// (seed, stream, counter), so independent streams never collide and any
// replica can be regenerated without replaying the others.
// The mixing function is the splitmix64 finalizer applied to the
// concatenated key; see README for the exact identity.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream), counter_(0) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    std::uint64_t x = mix(seed_ ^ mix(stream_ ^ mix(counter_++)));
    return x;
  }

  // uniform in [0,1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in {0,...,n-1} by rejection-free scaling (n small in practice)
  std::uint64_t next_below(std::uint64_t n) {
    // 128-bit multiply-shift
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

}  // namespace rfcw
