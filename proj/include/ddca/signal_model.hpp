#ifndef DDCA_SIGNAL_MODEL_HPP
#define DDCA_SIGNAL_MODEL_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ddca {

// One tick = one "second" of stream time; signal sets arrive once per tick.
using Tick = std::uint64_t;

inline constexpr double kSignalMin = 0.0;
inline constexpr double kSignalMax = 100.0;

// One timestamped triple of normalised input signal values.
struct SignalInstance {
    Tick timestamp = 0;
    double pamp = 0.0;
    double danger = 0.0;
    double safe = 0.0;

    bool operator==(const SignalInstance&) const = default;
};

// One occurrence of a categorical antigen. The type identifier is opaque;
// it must be non-empty and free of ',' and newline so it survives the
// stream text format.
struct AntigenEvent {
    Tick timestamp = 0;
    std::string antigen_type;

    bool operator==(const AntigenEvent&) const = default;
};

using Event = std::variant<SignalInstance, AntigenEvent>;

inline Tick event_timestamp(const Event& ev) {
    return std::visit([](const auto& e) { return e.timestamp; }, ev);
}

// Transformation weights from the three input categories to the two
// output signals. Defaults are the standard CSM (4, 2, 6) / k (8, 4, -13)
// assignment.
struct WeightMatrix {
    double csm_pamp = 4.0;
    double csm_danger = 2.0;
    double csm_safe = 6.0;
    double k_pamp = 8.0;
    double k_danger = 4.0;
    double k_safe = -13.0;

    bool operator==(const WeightMatrix&) const = default;
};

struct OutputSignals {
    double csm = 0.0;
    double k = 0.0;

    bool operator==(const OutputSignals&) const = default;
};

struct WeightValidation {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

// Checks the semantic constraints on a weight matrix: the safe k-weight
// must be negative, and the PAMP k-weight must outweigh a positive danger
// k-weight. Returns every violated constraint rather than stopping at the
// first.
WeightValidation validate_weights(const WeightMatrix& w);

// Linear map from input to output signals. Pure; throws DataError naming
// the offending component if any input lies outside [0, 100].
OutputSignals transform_signals(const SignalInstance& s, const WeightMatrix& w);

} // namespace ddca

#endif // DDCA_SIGNAL_MODEL_HPP
