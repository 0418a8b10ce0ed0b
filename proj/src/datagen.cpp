#include "ddca/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "ddca/errors.hpp"
#include "ddca/rng.hpp"

namespace ddca {

const char* to_string(SourceLabel label) {
    return label == SourceLabel::anomalous ? "anomalous" : "normal";
}

SourceLabel source_label_from_string(const std::string& name) {
    if (name == "anomalous") return SourceLabel::anomalous;
    if (name == "normal") return SourceLabel::normal;
    throw ConfigError("unknown label '" + name + "' (expected anomalous or normal)");
}

namespace {

void check_levels(const SignalLevels& levels, const std::string& where) {
    auto in_range = [](double v) { return v >= kSignalMin && v <= kSignalMax; };
    if (!in_range(levels.pamp) || !in_range(levels.danger) || !in_range(levels.safe)) {
        throw ConfigError(where + ": signal levels must lie in [0, 100]");
    }
    if (!(levels.noise_stdev >= 0.0)) {
        throw ConfigError(where + ": noise_stdev must be >= 0");
    }
}

bool valid_type_name(const std::string& type) {
    if (type.empty()) return false;
    return type.find(',') == std::string::npos && type.find('\n') == std::string::npos;
}

double clip_signal(double v) {
    return std::clamp(v, kSignalMin, kSignalMax);
}

} // namespace

void validate_scenario(const ScenarioSpec& spec) {
    if (spec.duration_ticks < 1) {
        throw ConfigError("duration_ticks must be >= 1");
    }
    check_levels(spec.ambient, "ambient");

    std::set<std::string> seen_types;
    for (const auto& source : spec.antigen_sources) {
        if (!valid_type_name(source.antigen_type)) {
            throw ConfigError("antigen_type must be non-empty and free of ',' and newline");
        }
        if (!seen_types.insert(source.antigen_type).second) {
            throw ConfigError("duplicate antigen source '" + source.antigen_type + "'");
        }
        if (!(source.base_rate >= 0.0)) {
            throw ConfigError("base_rate must be >= 0 for '" + source.antigen_type + "'");
        }
    }

    for (std::size_t i = 0; i < spec.phases.size(); ++i) {
        const auto& phase = spec.phases[i];
        const std::string where = "phase " + std::to_string(i);
        if (phase.start_tick >= phase.end_tick) {
            throw ConfigError(where + ": start_tick must be < end_tick");
        }
        if (phase.end_tick > spec.duration_ticks) {
            throw ConfigError(where + ": end_tick exceeds duration_ticks");
        }
        check_levels(phase.levels, where);
        for (const auto& [type, mult] : phase.rate_multipliers) {
            if (seen_types.find(type) == seen_types.end()) {
                throw ConfigError(where + ": rate multiplier for unknown source '" + type + "'");
            }
            if (!(mult >= 0.0)) {
                throw ConfigError(where + ": rate multiplier for '" + type + "' must be >= 0");
            }
        }
        for (std::size_t j = i + 1; j < spec.phases.size(); ++j) {
            const auto& other = spec.phases[j];
            if (phase.start_tick < other.end_tick && other.start_tick < phase.end_tick) {
                throw ConfigError("phases overlap");
            }
        }
    }
}

double expected_antigen_total(const ScenarioSpec& spec) {
    double total = 0.0;
    for (const auto& source : spec.antigen_sources) {
        double ambient_ticks = static_cast<double>(spec.duration_ticks);
        for (const auto& phase : spec.phases) {
            const double span = static_cast<double>(phase.end_tick - phase.start_tick);
            ambient_ticks -= span;
            auto it = phase.rate_multipliers.find(source.antigen_type);
            const double mult = it == phase.rate_multipliers.end() ? 1.0 : it->second;
            total += source.base_rate * mult * span;
        }
        total += source.base_rate * ambient_ticks;
    }
    return total;
}

std::map<std::string, SourceLabel> label_map(const ScenarioSpec& spec) {
    std::map<std::string, SourceLabel> labels;
    for (const auto& source : spec.antigen_sources) {
        labels.emplace(source.antigen_type, source.label);
    }
    return labels;
}

void generate(const ScenarioSpec& spec, const std::function<void(Event&&)>& sink) {
    validate_scenario(spec);
    SplitMix64 rng(spec.seed);

    for (Tick t = 0; t < spec.duration_ticks; ++t) {
        const PhaseSpec* phase = nullptr;
        for (const auto& p : spec.phases) {
            if (t >= p.start_tick && t < p.end_tick) {
                phase = &p;
                break;
            }
        }
        const SignalLevels& levels = phase ? phase->levels : spec.ambient;

        // Antigens first: the engine correlates a tick's antigens with the
        // signal that follows them.
        for (const auto& source : spec.antigen_sources) {
            double mult = 1.0;
            if (phase) {
                auto it = phase->rate_multipliers.find(source.antigen_type);
                if (it != phase->rate_multipliers.end()) mult = it->second;
            }
            const std::uint64_t count = poisson_draw(rng, source.base_rate * mult);
            for (std::uint64_t i = 0; i < count; ++i) {
                sink(AntigenEvent{t, source.antigen_type});
            }
        }

        SignalInstance s;
        s.timestamp = t;
        s.pamp = clip_signal(gaussian_draw(rng, levels.pamp, levels.noise_stdev));
        s.danger = clip_signal(gaussian_draw(rng, levels.danger, levels.noise_stdev));
        s.safe = clip_signal(gaussian_draw(rng, levels.safe, levels.noise_stdev));
        sink(std::move(s));
    }
}

GeneratedScenario generate(const ScenarioSpec& spec) {
    GeneratedScenario out;
    out.labels = label_map(spec);
    generate(spec, [&out](Event&& ev) { out.events.push_back(std::move(ev)); });
    return out;
}

ScenarioSpec bundled_scenario_syn_scan() {
    ScenarioSpec spec;
    spec.duration_ticks = 4000;
    spec.seed = 987654321;
    spec.ambient = SignalLevels{1.0, 5.0, 85.0, 2.0};

    // The browser dominates the antigen stream throughout; the scanner and
    // its parent terminal are quiet outside the bursts.
    spec.antigen_sources = {
        {"nmap", SourceLabel::anomalous, 0.25},
        {"firefox", SourceLabel::normal, 9.0},
        {"pts", SourceLabel::anomalous, 0.1},
    };

    // First scan burst: closed-port probing drives ICMP errors (pamp) and
    // the TCP ratio (danger) up while small packets depress safe. Browsing
    // activity also surges in the same window, the classic innocent
    // bystander situation.
    PhaseSpec scan1;
    scan1.start_tick = 1000;
    scan1.end_tick = 1250;
    scan1.levels = SignalLevels{55.0, 50.0, 12.0, 5.0};
    scan1.rate_multipliers = {{"nmap", 36.0}, {"pts", 50.0}, {"firefox", 12.0}};

    // Second, harder burst.
    PhaseSpec scan2;
    scan2.start_tick = 2600;
    scan2.end_tick = 2900;
    scan2.levels = SignalLevels{65.0, 55.0, 8.0, 5.0};
    scan2.rate_multipliers = {{"nmap", 32.0}, {"pts", 45.0}, {"firefox", 12.0}};

    spec.phases = {scan1, scan2};
    return spec;
}

} // namespace ddca
