#ifndef DDCA_SEGMENTATION_HPP
#define DDCA_SEGMENTATION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ddca/engine.hpp"

namespace ddca {

enum class SegMode { none, abs, tbs };

const char* to_string(SegMode mode);
SegMode seg_mode_from_string(const std::string& name); // throws ConfigError

struct SegmenterConfig {
    SegMode mode = SegMode::none;
    // Antigen-instance count for abs, tick count for tbs; ignored for none.
    std::uint64_t segment_size = 1;
    // When false, flushed (forced) records are dropped before analysis.
    bool include_forced = true;
};

void validate_segmenter_config(const SegmenterConfig& cfg); // throws ConfigError

// A bounded slice of the presented-record sequence. Concatenating all
// segments in ordinal order reproduces the full sequence.
struct Segment {
    std::uint64_t ordinal = 0;
    Tick start_tick = 0;
    Tick end_tick = 0;
    std::vector<ProcessedRecord> records;
    std::uint64_t antigen_instances = 0;
};

// Per-antigen-type anomaly coefficient over some record set.
struct KAlphaScore {
    std::string antigen_type;
    double k_alpha = 0.0;
    std::uint64_t total_count = 0;      // sum of this type's instance counts
    std::uint64_t contributing_dcs = 0; // records containing the type

    bool operator==(const KAlphaScore&) const = default;
};

struct SegmentReport {
    std::uint64_t ordinal = 0;
    Tick start_tick = 0;
    Tick end_tick = 0;
    std::map<std::string, KAlphaScore> scores;
    bool empty = true; // no record in the segment holds any antigen

    bool operator==(const SegmentReport&) const = default;
};

// Anomaly coefficient per antigen type: for each type, the sum of sum_k
// over records containing it (each record entering once per type,
// unweighted by count) divided by the total instance count of the type.
// Types absent from every record are absent from the result.
std::map<std::string, KAlphaScore> compute_k_alpha(std::span<const ProcessedRecord> records);

SegmentReport report_from_segment(const Segment& seg);

// Streaming segmenter: records are pushed in emission order, closed
// segments are handed to the sink in ordinal order, exactly once.
class Segmenter {
public:
    using SegmentSink = std::function<void(Segment&&)>;

    virtual ~Segmenter() = default;

    virtual void push(ProcessedRecord&& rec) = 0;
    virtual void finish() = 0;
};

// none: one segment spanning the whole stream (emitted at finish, even if
//   no record ever arrived).
// abs: close the open segment once its antigen-instance total reaches
//   segment_size; records are atomic, so a segment may overshoot by the
//   closing record's count. A final partial segment is emitted at finish
//   when it holds at least one record.
// tbs: fixed tick windows [n*size, (n+1)*size); every window from 0 up to
//   the one containing the last record is emitted, empty windows included.
std::unique_ptr<Segmenter> make_segmenter(const SegmenterConfig& cfg, Segmenter::SegmentSink sink);

// Batch analysis over an in-memory record sequence: mode none yields a
// single report; abs and tbs yield one report per segment.
std::vector<SegmentReport> analyze(std::span<const ProcessedRecord> records,
                                   const SegmenterConfig& cfg);

} // namespace ddca

#endif // DDCA_SEGMENTATION_HPP
