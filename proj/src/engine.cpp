#include "ddca/engine.hpp"

#include <utility>

#include "ddca/errors.hpp"

namespace ddca {

DcaEngine::DcaEngine(const PopulationConfig& cfg) : cfg_(cfg) {
    if (cfg.population_size < 1) {
        throw ConfigError("population_size must be >= 1");
    }
    if (!(cfg.threshold_step > 0.0)) {
        throw ConfigError("threshold_step must be > 0");
    }
    auto validation = validate_weights(cfg.weights);
    if (!validation.ok()) {
        std::string msg = "invalid weights:";
        for (const auto& v : validation.violations) msg += " " + v + ";";
        throw ConfigError(msg);
    }
    cells_.resize(cfg.population_size);
    for (std::uint32_t i = 0; i < cfg.population_size; ++i) {
        cells_[i].index = i + 1;
        cells_[i].migration_threshold = cfg.threshold_step * static_cast<double>(i + 1);
        cells_[i].lifespan = cells_[i].migration_threshold;
    }
}

void DcaEngine::reset_cell(DendriticCell& cell) {
    cell.lifespan = cell.migration_threshold;
    cell.sum_k = 0.0;
    cell.antigen_profile.clear();
}

void DcaEngine::ingest_antigen(const AntigenEvent& ev) {
    if (ev.antigen_type.empty()) {
        throw DataError("antigen with empty antigen_type");
    }
    // Counter first, then modulo: result 0 maps to the last cell.
    ++ag_counter_;
    std::uint64_t cell_index = ag_counter_ % cfg_.population_size;
    if (cell_index == 0) cell_index = cfg_.population_size;
    cells_[cell_index - 1].antigen_profile[ev.antigen_type] += 1;
}

void DcaEngine::ingest_signal(const SignalInstance& s, std::vector<ProcessedRecord>& out) {
    if (s.timestamp < current_tick_) {
        throw StreamOrderError("signal at tick " + std::to_string(s.timestamp) +
                               " precedes current tick " + std::to_string(current_tick_));
    }
    const OutputSignals o = transform_signals(s, cfg_.weights);
    current_tick_ = s.timestamp;
    for (auto& cell : cells_) {
        cell.lifespan -= o.csm;
        cell.sum_k += o.k;
        if (cell.lifespan <= 0.0) {
            // Records unconditionally on maturation, even with an empty
            // profile; analysis treats empty records as contributing
            // nothing.
            ProcessedRecord rec;
            rec.presented_at = s.timestamp;
            rec.dc_index = cell.index;
            rec.sum_k = cell.sum_k;
            rec.antigen_counts = std::move(cell.antigen_profile);
            rec.forced = false;
            out.push_back(std::move(rec));
            cell.antigen_profile = {};
            reset_cell(cell);
        }
    }
}

std::vector<ProcessedRecord> DcaEngine::ingest_signal(const SignalInstance& s) {
    std::vector<ProcessedRecord> out;
    ingest_signal(s, out);
    return out;
}

void DcaEngine::flush(std::vector<ProcessedRecord>& out) {
    for (auto& cell : cells_) {
        if (!cell.antigen_profile.empty()) {
            if (cfg_.flush_at_end) {
                ProcessedRecord rec;
                rec.presented_at = current_tick_;
                rec.dc_index = cell.index;
                rec.sum_k = cell.sum_k;
                rec.antigen_counts = std::move(cell.antigen_profile);
                rec.forced = true;
                out.push_back(std::move(rec));
                cell.antigen_profile = {};
            } else {
                for (const auto& [_, count] : cell.antigen_profile) dropped_ += count;
            }
        }
        reset_cell(cell);
    }
}

std::vector<ProcessedRecord> DcaEngine::flush() {
    std::vector<ProcessedRecord> out;
    flush(out);
    return out;
}

StreamRunner::StreamRunner(const PopulationConfig& cfg, RecordSink sink)
    : engine_(cfg), sink_(std::move(sink)) {}

void StreamRunner::check_order(Tick t, bool is_signal) {
    if (any_event_ && t < last_timestamp_) {
        throw StreamOrderError("event at tick " + std::to_string(t) +
                               " after tick " + std::to_string(last_timestamp_));
    }
    if (t != last_timestamp_ || !any_event_) {
        signal_seen_at_last_ = false;
    }
    if (!is_signal && signal_seen_at_last_ && t == last_timestamp_) {
        throw StreamOrderError("antigen after signal within tick " + std::to_string(t));
    }
    last_timestamp_ = t;
    any_event_ = true;
    if (is_signal) signal_seen_at_last_ = true;
}

void StreamRunner::drain_scratch() {
    for (auto& rec : scratch_) sink_(std::move(rec));
    scratch_.clear();
}

void StreamRunner::push(const SignalInstance& s) {
    check_order(s.timestamp, true);
    engine_.ingest_signal(s, scratch_);
    drain_scratch();
    ++signal_ticks_;
}

void StreamRunner::push(const AntigenEvent& ev) {
    check_order(ev.timestamp, false);
    engine_.ingest_antigen(ev);
}

void StreamRunner::push(const Event& ev) {
    std::visit([this](const auto& e) { this->push(e); }, ev);
}

void StreamRunner::finish() {
    engine_.flush(scratch_);
    drain_scratch();
}

RunResult run_stream(const PopulationConfig& cfg, std::span<const Event> events) {
    RunResult result;
    StreamRunner runner(cfg, [&result](ProcessedRecord&& rec) {
        result.records.push_back(std::move(rec));
    });
    for (const auto& ev : events) runner.push(ev);
    runner.finish();
    result.antigens_ingested = runner.engine().antigens_ingested();
    result.dropped_antigens = runner.engine().dropped_antigens();
    result.signal_ticks = runner.signal_ticks();
    result.final_tick = runner.engine().current_tick();
    return result;
}

} // namespace ddca
