#pragma once

// Counter-based random numbers for fading ensembles.
//
// Each draw is a pure function of (seed, stream, counter), so ensembles can be
// regenerated bit-exactly from the header metadata alone, in any order, on any
// platform. The mixer is the splitmix64 finalizer, which has full 64-bit
// avalanche; streams separate the two users.

#include <cmath>
#include <cstdint>

namespace noma {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Uniform in [0, 1): 53 random mantissa bits.
inline double counter_uniform01(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t counter) {
    std::uint64_t z = detail::splitmix64(seed);
    z = detail::splitmix64(z ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    z = detail::splitmix64(z ^ counter);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// Exponential with the given rate via the inverse CDF. -log1p(-u) keeps full
// precision for small quantiles and never produces infinity since u < 1.
inline double counter_exponential(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter, double rate) {
    const double u = counter_uniform01(seed, stream, counter);
    return -std::log1p(-u) / rate;
}

}  // namespace noma
