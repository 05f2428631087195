#pragma once

#include <cmath>
#include <cstdint>

namespace trajlab {

// Finalizer from the splitmix64 generator; bijective on 64-bit ints.
inline std::uint64_t mix_bits(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and up to three
// lane indices (e.g. planning step / iteration / candidate). All randomness
// in the artifact flows through explicit streams derived this way; there is
// no global RNG.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = mix_bits(master + kGamma);
  h = mix_bits(h + kGamma + a);
  h = mix_bits(h + kGamma + b);
  h = mix_bits(h + kGamma + c);
  return h;
}

// Small, cheap-to-construct counter RNG (splitmix64 core). One instance per
// derived stream; construction is two integer ops, so per-candidate streams
// in the planner hot loop are free.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix_bits(state_);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n); n > 0. Lemire's multiply-shift; bias is ~n / 2^64.
  int uniform_int(int n) {
    const auto x = static_cast<unsigned __int128>(next_u64());
    return static_cast<int>((x * static_cast<std::uint64_t>(n)) >> 64);
  }

  // Standard normal via Box-Muller. Consumes exactly two draws per call
  // (no cached spare), which keeps stream consumption easy to reason about.
  double normal() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t state_;
};

}  // namespace trajlab
