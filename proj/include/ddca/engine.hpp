#ifndef DDCA_ENGINE_HPP
#define DDCA_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ddca/signal_model.hpp"

namespace ddca {

struct PopulationConfig {
    std::uint32_t population_size = 100;
    double threshold_step = 12.0;
    WeightMatrix weights;
    bool flush_at_end = true;
};

// One detector cell. Thresholds are assigned as threshold_step * index,
// so the population spans a uniform range of time-window lengths.
struct DendriticCell {
    std::uint32_t index = 0; // 1-based
    double migration_threshold = 0.0;
    double lifespan = 0.0; // remaining budget; matures at <= 0
    double sum_k = 0.0;
    std::map<std::string, std::uint64_t> antigen_profile;
};

// The information a matured cell presents to analysis: its antigen counts
// and the cumulative k over its window. `forced` marks records produced by
// the end-of-stream flush rather than natural maturation.
struct ProcessedRecord {
    Tick presented_at = 0;
    std::uint32_t dc_index = 0;
    double sum_k = 0.0;
    std::map<std::string, std::uint64_t> antigen_counts;
    bool forced = false;

    bool operator==(const ProcessedRecord&) const = default;

    std::uint64_t total_antigens() const {
        std::uint64_t n = 0;
        for (const auto& [_, c] : antigen_counts) n += c;
        return n;
    }
};

// Single-owner, sequentially mutated detector population. Deterministic:
// identical input yields an identical record sequence.
class DcaEngine {
public:
    explicit DcaEngine(const PopulationConfig& cfg); // throws ConfigError

    // Assigns one antigen to the next cell in round-robin order. The
    // counter increments before the modulo, so the first antigen lands on
    // cell 1 and every population_size-th antigen on the last cell.
    void ingest_antigen(const AntigenEvent& ev);

    // Applies one signal tick to every cell; cells whose lifespan reaches
    // zero or below present a record and are reset in place. Matured
    // records are appended to `out` in ascending cell-index order.
    void ingest_signal(const SignalInstance& s, std::vector<ProcessedRecord>& out);
    std::vector<ProcessedRecord> ingest_signal(const SignalInstance& s);

    // End-of-stream handling. With flush_at_end, every cell still holding
    // antigens presents a forced record at the current tick; otherwise the
    // residual antigen instances are counted as dropped. Cells are reset
    // either way.
    void flush(std::vector<ProcessedRecord>& out);
    std::vector<ProcessedRecord> flush();

    const PopulationConfig& config() const { return cfg_; }
    const std::vector<DendriticCell>& cells() const { return cells_; }
    std::uint64_t antigens_ingested() const { return ag_counter_; }
    std::uint64_t dropped_antigens() const { return dropped_; }
    Tick current_tick() const { return current_tick_; }

private:
    PopulationConfig cfg_;
    std::vector<DendriticCell> cells_;
    std::uint64_t ag_counter_ = 0;
    std::uint64_t dropped_ = 0;
    Tick current_tick_ = 0;

    void reset_cell(DendriticCell& cell);
};

// Feeds a time-ordered event stream into an engine, enforcing the input
// ordering contract: timestamps non-decreasing, and within one tick all
// antigens precede the signal. Violations raise StreamOrderError.
class StreamRunner {
public:
    using RecordSink = std::function<void(ProcessedRecord&&)>;

    StreamRunner(const PopulationConfig& cfg, RecordSink sink);

    void push(const Event& ev);
    void push(const SignalInstance& s);
    void push(const AntigenEvent& ev);

    // Flushes the engine; call exactly once after the last event.
    void finish();

    const DcaEngine& engine() const { return engine_; }
    std::uint64_t signal_ticks() const { return signal_ticks_; }

private:
    DcaEngine engine_;
    RecordSink sink_;
    std::vector<ProcessedRecord> scratch_;
    Tick last_timestamp_ = 0;
    bool any_event_ = false;
    bool signal_seen_at_last_ = false;
    std::uint64_t signal_ticks_ = 0;

    void check_order(Tick t, bool is_signal);
    void drain_scratch();
};

struct RunResult {
    std::vector<ProcessedRecord> records;
    std::uint64_t antigens_ingested = 0;
    std::uint64_t dropped_antigens = 0;
    std::uint64_t signal_ticks = 0;
    Tick final_tick = 0;
};

// Convenience wrapper: run a whole in-memory stream through the engine
// (dispatch, then flush) and collect the emitted records.
RunResult run_stream(const PopulationConfig& cfg, std::span<const Event> events);

} // namespace ddca

#endif // DDCA_ENGINE_HPP
