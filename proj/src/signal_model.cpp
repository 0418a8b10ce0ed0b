#include "ddca/signal_model.hpp"

#include <string>

#include "ddca/errors.hpp"

namespace ddca {

namespace {

void check_component(double value, const char* name) {
    if (!(value >= kSignalMin && value <= kSignalMax)) {
        throw DataError(std::string(name) + " signal value " + std::to_string(value) +
                        " outside [0, 100]");
    }
}

} // namespace

WeightValidation validate_weights(const WeightMatrix& w) {
    WeightValidation result;
    if (!(w.k_safe < 0.0)) {
        result.violations.push_back("safe k-weight must be negative");
    }
    if (!(w.k_danger > 0.0)) {
        result.violations.push_back("danger k-weight must be positive");
    }
    if (!(w.k_pamp > w.k_danger)) {
        result.violations.push_back("PAMP k-weight must outweigh danger k-weight");
    }
    return result;
}

OutputSignals transform_signals(const SignalInstance& s, const WeightMatrix& w) {
    check_component(s.pamp, "pamp");
    check_component(s.danger, "danger");
    check_component(s.safe, "safe");
    return OutputSignals{
        w.csm_pamp * s.pamp + w.csm_danger * s.danger + w.csm_safe * s.safe,
        w.k_pamp * s.pamp + w.k_danger * s.danger + w.k_safe * s.safe,
    };
}

} // namespace ddca
