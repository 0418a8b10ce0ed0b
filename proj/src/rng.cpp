#include "ddca/rng.hpp"

#include <cmath>
#include <numbers>

#include "ddca/errors.hpp"

namespace ddca {

std::uint64_t poisson_draw(SplitMix64& rng, double mean) {
    if (std::isnan(mean) || mean < 0.0) {
        throw ConfigError("poisson mean must be >= 0");
    }
    if (mean == 0.0) return 0;
    if (mean >= 700.0) {
        // exp(-mean) underflows and the CDF walk would never terminate.
        throw ConfigError("poisson mean too large for inverse-transform draw");
    }
    const double u = rng.next_unit();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    // 12 sigma past the mean; the truncated tail mass is negligible.
    const std::uint64_t k_max =
        static_cast<std::uint64_t>(mean + 12.0 * std::sqrt(mean) + 50.0);
    while (u > cdf && k < k_max) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

double gaussian_draw(SplitMix64& rng, double mean, double stdev) {
    const double u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    // Guard log(0); 2^-53 keeps the transform finite.
    const double r = std::sqrt(-2.0 * std::log(u1 > 0.0 ? u1 : 0x1.0p-53));
    const double z = r * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stdev * z;
}

} // namespace ddca
