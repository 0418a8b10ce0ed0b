#ifndef DDCA_DATAGEN_HPP
#define DDCA_DATAGEN_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ddca/signal_model.hpp"

namespace ddca {

enum class SourceLabel { anomalous, normal };

const char* to_string(SourceLabel label);
SourceLabel source_label_from_string(const std::string& name); // throws ConfigError

// One antigen emitter: a process-like entity producing antigen instances
// at an expected per-tick rate, with a ground-truth label.
struct AntigenSource {
    std::string antigen_type;
    SourceLabel label = SourceLabel::normal;
    double base_rate = 0.0; // expected antigens per tick outside phases
};

struct SignalLevels {
    double pamp = 0.0;
    double danger = 0.0;
    double safe = 0.0;
    double noise_stdev = 0.0;
};

// A contiguous tick range with its own signal levels and per-source rate
// multipliers. Sources absent from rate_multipliers keep multiplier 1.
struct PhaseSpec {
    Tick start_tick = 0;
    Tick end_tick = 0; // exclusive
    SignalLevels levels;
    std::map<std::string, double> rate_multipliers;
};

// Declarative description of a synthetic signal/antigen stream. Ticks not
// covered by any phase use the ambient levels with all multipliers 1.
struct ScenarioSpec {
    Tick duration_ticks = 0;
    std::uint64_t seed = 0;
    SignalLevels ambient;
    std::vector<AntigenSource> antigen_sources;
    std::vector<PhaseSpec> phases;
};

// Checks ranges, disjoint phases, usable rates and type identifiers.
// Throws ConfigError describing the first problem found.
void validate_scenario(const ScenarioSpec& spec);

struct GeneratedScenario {
    std::vector<Event> events;
    std::map<std::string, SourceLabel> labels;
};

// Expected total antigen instances of the spec, computed analytically
// from rates, durations and multipliers.
double expected_antigen_total(const ScenarioSpec& spec);

std::map<std::string, SourceLabel> label_map(const ScenarioSpec& spec);

// Emits the scenario's event stream in tick order: per tick, each source's
// antigens (sources in declaration order), then exactly one signal
// instance. Pure function of the spec, including its seed: identical specs
// yield bit-identical streams. Signal values are clipped to [0, 100]
// after noise.
void generate(const ScenarioSpec& spec, const std::function<void(Event&&)>& sink);
GeneratedScenario generate(const ScenarioSpec& spec);

// The checked-in desk-scale port-scan scenario: steady web browsing
// ("firefox", normal) against two scan bursts ("nmap" and its parent
// terminal "pts", anomalous) with elevated PAMP/danger and depressed safe
// signal levels during the bursts. Roughly 1e5 antigen instances total.
// The signal magnitudes are plausible reconstructions of typical scan
// traffic, not measurements.
ScenarioSpec bundled_scenario_syn_scan();

} // namespace ddca

#endif // DDCA_DATAGEN_HPP
