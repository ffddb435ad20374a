#pragma once

#include <cstdint>
#include <string_view>

namespace ihlab {

// Deterministic, platform-independent random stream (SplitMix64).
//
// Bit-exact definition, identical on every platform/language:
//   next():  state += 0x9E3779B97F4A7C15
//            z  = state
//            z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//            z ^= z >> 27;  z *= 0x94D049BB133111EB
//            z ^= z >> 31;  return z
//
// Labeled substreams decorrelate parallel work: the stream state for
// (seed, label) is  mix(seed) ^ mix(fnv1a64(label))  where mix() is the
// SplitMix64 output function above applied to a single value and fnv1a64
// is FNV-1a with offset 0xcbf29ce484222325 and prime 0x100000001b3.
//
// Single-owner: never share one stream between concurrent consumers;
// derive child streams by label instead.
class RngStream {
  public:
    explicit RngStream(std::uint64_t state) : state_(state) {}

    static RngStream from_seed(std::uint64_t seed);
    static RngStream derive(std::uint64_t seed, std::string_view label);

    // Next 64 random bits.
    std::uint64_t next();

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double();

    // Uniform integer in [0, n); n must be > 0. Lemire multiply-shift.
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Box-Muller (deterministic, no libc distribution).
    double next_gaussian();

    std::uint64_t state() const { return state_; }
    RngStream child(std::string_view label) const;

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace ihlab
