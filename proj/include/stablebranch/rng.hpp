// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace stablebranch {

/// Seeded, streamed random number generator (xoshiro256++ core).
///
/// The contract is reproducibility: the same (seed, stream_id) pair always
/// yields the same draw sequence, and every draw helper below consumes a
/// fixed, documented number of engine outputs, so replicas are portable
/// across thread schedules and worker counts.  Distinct stream ids start the
/// engine from splitmix64-separated states and can be treated as independent.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t x = seed ^ 0x5851F42D4C957F2DULL;
    std::uint64_t stream_key = stream_id * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL;
    x ^= mix_(stream_key);
    for (auto& word : state_) word = mix_(x);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl_(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl_(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 significant bits.  One engine output.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential variate with the given rate.  One engine output.
  double exponential(double rate) {
    // -log1p(-u) maps u in [0,1) to (0, ~36.7]; never returns inf or 0-division.
    return -std::log1p(-next_double()) / rate;
  }

  /// Poisson variate.  Sequential inversion below kPoissonInversionCutoff,
  /// Hormann's PTRD transformed rejection above it.
  std::int64_t poisson(double mean);

  static constexpr double kPoissonInversionCutoff = 30.0;

 private:
  static std::uint64_t rotl_(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t mix_(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace stablebranch
