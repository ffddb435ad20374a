#include "ihlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ihlab {

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RngStream RngStream::from_seed(std::uint64_t seed) { return RngStream(seed); }

RngStream RngStream::derive(std::uint64_t seed, std::string_view label) {
    return RngStream(splitmix64_mix(seed) ^ splitmix64_mix(fnv1a64(label)));
}

RngStream RngStream::child(std::string_view label) const {
    return RngStream::derive(state_, label);
}

std::uint64_t RngStream::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
}

double RngStream::next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be > 0");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
}

double RngStream::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 is kept away from 0.
    double u1, u2;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace ihlab
