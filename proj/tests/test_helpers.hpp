#ifndef DDCA_TESTS_TEST_HELPERS_HPP
#define DDCA_TESTS_TEST_HELPERS_HPP

#include <string>
#include <vector>

#include "ddca/rng.hpp"
#include "ddca/signal_model.hpp"

namespace ddca::testing {

// Seeded random event stream honouring the input contract: timestamps
// non-decreasing, and within one tick all antigens precede the signal.
// Roughly `ticks` signal instances with a random number of antigens each.
inline std::vector<Event> random_stream(std::uint64_t seed, std::size_t ticks,
                                        std::size_t max_antigens_per_tick = 5) {
    static const std::vector<std::string> kTypes = {"alpha", "beta", "gamma", "delta"};
    SplitMix64 rng(seed);
    std::vector<Event> events;
    Tick t = 0;
    for (std::size_t i = 0; i < ticks; ++i) {
        t += rng.next() % 3; // occasional repeated and skipped ticks
        const std::size_t n_antigens = rng.next() % (max_antigens_per_tick + 1);
        for (std::size_t a = 0; a < n_antigens; ++a) {
            events.push_back(AntigenEvent{t, kTypes[rng.next() % kTypes.size()]});
        }
        SignalInstance s;
        s.timestamp = t;
        s.pamp = rng.next_unit() * 100.0;
        s.danger = rng.next_unit() * 100.0;
        s.safe = rng.next_unit() * 100.0;
        events.push_back(s);
        t += 1;
    }
    return events;
}

} // namespace ddca::testing

#endif // DDCA_TESTS_TEST_HELPERS_HPP
