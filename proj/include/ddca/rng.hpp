#ifndef DDCA_RNG_HPP
#define DDCA_RNG_HPP

#include <cstdint>

namespace ddca {

// splitmix64: portable 64-bit generator with a fixed, documented update
// rule, so generated streams are reproducible bit-for-bit on any platform.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53 significant bits.
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Poisson draw by inverse-transform CDF walk; consumes exactly one
// uniform. Valid for mean in [0, ~700) (the CDF walk underflows beyond);
// the walk is capped far out in the tail as an underflow guard.
std::uint64_t poisson_draw(SplitMix64& rng, double mean);

// Gaussian draw via the Box-Muller transform; consumes exactly two
// uniforms (the second branch value is discarded).
double gaussian_draw(SplitMix64& rng, double mean, double stdev);

} // namespace ddca

#endif // DDCA_RNG_HPP
