#ifndef DDCA_STREAM_IO_HPP
#define DDCA_STREAM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddca/datagen.hpp"
#include "ddca/segmentation.hpp"
#include "ddca/signal_model.hpp"
#include "ddca/stats.hpp"

namespace ddca {

// --- Event stream text format ----------------------------------------------
//
// One event per line, UTF-8, LF line endings, no header:
//   signal:  S,<tick>,<pamp>,<danger>,<safe>
//   antigen: A,<tick>,<antigen_type>
// Ticks are decimal integers; signal values are decimal reals written with
// shortest round-trip precision. Antigen types must be non-empty and free
// of ',' and newline.

std::string format_event_line(const Event& ev); // no trailing newline

// Throws ParseError (carrying line_no when non-zero) on any deviation
// from the grammar, including out-of-range signal values.
Event parse_event_line(std::string_view line, std::size_t line_no = 0);

void write_event_stream(std::ostream& out, std::span<const Event> events);
std::vector<Event> read_event_stream(std::istream& in);

// Incremental reader for large streams; tolerates a trailing '\r' per
// line. next() returns std::nullopt at end of input.
class EventStreamReader {
public:
    explicit EventStreamReader(std::istream& in) : in_(in) {}

    std::optional<Event> next();
    std::size_t line_no() const { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
    std::string buf_;
};

// --- Report documents --------------------------------------------------------

// Echo of the configuration that produced a report; sufficient to re-run
// the experiment.
struct RunMetadata {
    std::string mode = "none";
    std::uint64_t segment_size = 0; // 0 when mode = none
    std::uint32_t population_size = 100;
    double threshold_step = 12.0;
    WeightMatrix weights;
    bool flush_at_end = true;
    bool include_forced = true;
    std::string input;

    bool operator==(const RunMetadata&) const = default;
};

struct ReportDocument {
    RunMetadata meta;
    std::vector<SegmentReport> reports;
};

// json_lines: the first line is a {"config": ...} object, then one object
// per segment report. Keys are emitted in a fixed alphabetical order and
// k_alpha values with exactly six decimal places, so re-serialising a
// parsed document is byte-identical.
void write_report_jsonl(std::ostream& out, const ReportDocument& doc);
ReportDocument read_report_jsonl(std::istream& in); // throws ParseError

// Fixed-width table: one row per segment, one column per antigen type.
void write_report_table(std::ostream& out, const ReportDocument& doc);

// --- Label sidecar -----------------------------------------------------------
//
// One "antigen_type,label" line per source, sorted by type.

void write_labels(std::ostream& out, const std::map<std::string, SourceLabel>& labels);
std::map<std::string, SourceLabel> read_labels(std::istream& in); // throws ParseError

// --- Scenario specs ----------------------------------------------------------

void write_scenario_json(std::ostream& out, const ScenarioSpec& spec);
ScenarioSpec read_scenario_json(std::istream& in); // throws ParseError / ConfigError

// --- Statistics tables -------------------------------------------------------

void write_summary_table(std::ostream& out, std::span<const SummaryRow> rows);
void write_summary_jsonl(std::ostream& out, std::span<const SummaryRow> rows);

// Plain-text grids of the pairwise and vs-baseline tests; '*' marks
// significant cells, 'n/a' cells with too few segments.
void write_comparison_text(std::ostream& out, const ComparisonGrid& grid,
                           const std::map<std::string, SourceLabel>& labels = {});
void write_comparison_jsonl(std::ostream& out, const ComparisonGrid& grid);

// --- Files -------------------------------------------------------------------

// Writes via a temporary file in the same directory, then renames, so
// readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

std::string read_text_file(const std::filesystem::path& path); // throws DataError

} // namespace ddca

#endif // DDCA_STREAM_IO_HPP
