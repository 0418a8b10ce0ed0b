#include "ddca/stream_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ddca/errors.hpp"

namespace ddca {

namespace {

using nlohmann::json;

// Shortest round-trip representation.
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// Fixed six decimal places, for report scores.
std::string format_fixed6(double v) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
}

std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::uint64_t parse_tick_field(std::string_view field, std::size_t line_no) {
    std::uint64_t value = 0;
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || field.empty()) {
        throw ParseError("invalid tick '" + std::string(field) + "'", line_no);
    }
    return value;
}

double parse_signal_field(std::string_view field, const char* name, std::size_t line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || field.empty()) {
        throw ParseError("invalid " + std::string(name) + " value '" + std::string(field) + "'",
                         line_no);
    }
    if (!(value >= kSignalMin && value <= kSignalMax)) {
        throw ParseError(std::string(name) + " value " + std::string(field) +
                             " outside [0, 100]",
                         line_no);
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

// nlohmann access helpers that turn type mismatches into ParseError.
template <typename T>
T get_field(const json& obj, const char* key, std::size_t line_no) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(std::string("missing key '") + key + "'", line_no);
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("bad value for key '") + key + "'", line_no);
    }
}

} // namespace

// --- Event stream ------------------------------------------------------------

std::string format_event_line(const Event& ev) {
    if (const auto* s = std::get_if<SignalInstance>(&ev)) {
        return "S," + std::to_string(s->timestamp) + "," + format_double(s->pamp) + "," +
               format_double(s->danger) + "," + format_double(s->safe);
    }
    const auto& a = std::get<AntigenEvent>(ev);
    return "A," + std::to_string(a.timestamp) + "," + a.antigen_type;
}

Event parse_event_line(std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    if (fields.empty() || fields[0].empty()) {
        throw ParseError("missing event kind", line_no);
    }
    if (fields[0] == "S") {
        if (fields.size() != 5) {
            throw ParseError("expected 5 fields for signal line, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        SignalInstance s;
        s.timestamp = parse_tick_field(fields[1], line_no);
        s.pamp = parse_signal_field(fields[2], "pamp", line_no);
        s.danger = parse_signal_field(fields[3], "danger", line_no);
        s.safe = parse_signal_field(fields[4], "safe", line_no);
        return s;
    }
    if (fields[0] == "A") {
        if (fields.size() != 3) {
            throw ParseError("expected 3 fields for antigen line, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        if (fields[2].empty()) {
            throw ParseError("empty antigen type", line_no);
        }
        return AntigenEvent{parse_tick_field(fields[1], line_no), std::string(fields[2])};
    }
    throw ParseError("unknown event kind '" + std::string(fields[0]) + "'", line_no);
}

void write_event_stream(std::ostream& out, std::span<const Event> events) {
    for (const auto& ev : events) {
        out << format_event_line(ev) << '\n';
    }
}

std::optional<Event> EventStreamReader::next() {
    if (!std::getline(in_, buf_)) {
        return std::nullopt;
    }
    ++line_no_;
    if (!buf_.empty() && buf_.back() == '\r') {
        buf_.pop_back();
    }
    return parse_event_line(buf_, line_no_);
}

std::vector<Event> read_event_stream(std::istream& in) {
    std::vector<Event> events;
    EventStreamReader reader(in);
    while (auto ev = reader.next()) {
        events.push_back(std::move(*ev));
    }
    return events;
}

// --- Report documents ----------------------------------------------------------

namespace {

void write_config_line(std::ostream& out, const RunMetadata& meta) {
    out << "{\"config\":{"
        << "\"flush_at_end\":" << (meta.flush_at_end ? "true" : "false")
        << ",\"include_forced\":" << (meta.include_forced ? "true" : "false")
        << ",\"input\":\"" << json_escape(meta.input) << "\""
        << ",\"mode\":\"" << json_escape(meta.mode) << "\""
        << ",\"population_size\":" << meta.population_size
        << ",\"segment_size\":" << meta.segment_size
        << ",\"threshold_step\":" << format_double(meta.threshold_step)
        << ",\"weights\":{"
        << "\"csm_danger\":" << format_double(meta.weights.csm_danger)
        << ",\"csm_pamp\":" << format_double(meta.weights.csm_pamp)
        << ",\"csm_safe\":" << format_double(meta.weights.csm_safe)
        << ",\"k_danger\":" << format_double(meta.weights.k_danger)
        << ",\"k_pamp\":" << format_double(meta.weights.k_pamp)
        << ",\"k_safe\":" << format_double(meta.weights.k_safe)
        << "}}}" << '\n';
}

void write_report_line(std::ostream& out, const SegmentReport& report) {
    out << "{\"empty\":" << (report.empty ? "true" : "false")
        << ",\"end_tick\":" << report.end_tick
        << ",\"ordinal\":" << report.ordinal
        << ",\"scores\":{";
    bool first = true;
    for (const auto& [type, score] : report.scores) {
        if (!first) out << ',';
        first = false;
        out << "\"" << json_escape(type) << "\":{"
            << "\"contributing_dcs\":" << score.contributing_dcs
            << ",\"k_alpha\":" << format_fixed6(score.k_alpha)
            << ",\"total_count\":" << score.total_count
            << "}";
    }
    out << "},\"start_tick\":" << report.start_tick << "}" << '\n';
}

} // namespace

void write_report_jsonl(std::ostream& out, const ReportDocument& doc) {
    write_config_line(out, doc.meta);
    for (const auto& report : doc.reports) {
        write_report_line(out, report);
    }
}

ReportDocument read_report_jsonl(std::istream& in) {
    ReportDocument doc;
    std::string line;
    std::size_t line_no = 0;
    bool have_config = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) {
            throw ParseError("expected a JSON object", line_no);
        }
        if (!have_config) {
            if (!obj.contains("config")) {
                throw ParseError("first line must carry the config object", line_no);
            }
            const json& cfg = obj["config"];
            RunMetadata meta;
            meta.flush_at_end = get_field<bool>(cfg, "flush_at_end", line_no);
            meta.include_forced = get_field<bool>(cfg, "include_forced", line_no);
            meta.input = get_field<std::string>(cfg, "input", line_no);
            meta.mode = get_field<std::string>(cfg, "mode", line_no);
            meta.population_size = get_field<std::uint32_t>(cfg, "population_size", line_no);
            meta.segment_size = get_field<std::uint64_t>(cfg, "segment_size", line_no);
            meta.threshold_step = get_field<double>(cfg, "threshold_step", line_no);
            if (!cfg.contains("weights")) {
                throw ParseError("config lacks weights", line_no);
            }
            const json& w = cfg["weights"];
            meta.weights.csm_danger = get_field<double>(w, "csm_danger", line_no);
            meta.weights.csm_pamp = get_field<double>(w, "csm_pamp", line_no);
            meta.weights.csm_safe = get_field<double>(w, "csm_safe", line_no);
            meta.weights.k_danger = get_field<double>(w, "k_danger", line_no);
            meta.weights.k_pamp = get_field<double>(w, "k_pamp", line_no);
            meta.weights.k_safe = get_field<double>(w, "k_safe", line_no);
            doc.meta = std::move(meta);
            have_config = true;
            continue;
        }
        SegmentReport report;
        report.empty = get_field<bool>(obj, "empty", line_no);
        report.end_tick = get_field<std::uint64_t>(obj, "end_tick", line_no);
        report.ordinal = get_field<std::uint64_t>(obj, "ordinal", line_no);
        report.start_tick = get_field<std::uint64_t>(obj, "start_tick", line_no);
        if (!obj.contains("scores") || !obj["scores"].is_object()) {
            throw ParseError("report lacks scores object", line_no);
        }
        for (const auto& [type, sc] : obj["scores"].items()) {
            KAlphaScore score;
            score.antigen_type = type;
            score.contributing_dcs = get_field<std::uint64_t>(sc, "contributing_dcs", line_no);
            score.k_alpha = get_field<double>(sc, "k_alpha", line_no);
            score.total_count = get_field<std::uint64_t>(sc, "total_count", line_no);
            report.scores.emplace(type, std::move(score));
        }
        doc.reports.push_back(std::move(report));
    }
    if (!have_config) {
        throw ParseError("report document has no config line", line_no);
    }
    return doc;
}

void write_report_table(std::ostream& out, const ReportDocument& doc) {
    std::set<std::string> type_set;
    for (const auto& report : doc.reports) {
        for (const auto& [type, _] : report.scores) type_set.insert(type);
    }
    std::vector<std::string> types(type_set.begin(), type_set.end());

    std::vector<std::size_t> widths;
    for (const auto& type : types) {
        widths.push_back(std::max<std::size_t>(type.size() + 2, 14));
    }

    out << std::left << std::setw(9) << "segment" << std::setw(12) << "start"
        << std::setw(12) << "end" << std::setw(7) << "empty";
    for (std::size_t i = 0; i < types.size(); ++i) {
        out << std::setw(static_cast<int>(widths[i])) << types[i];
    }
    out << '\n';

    for (const auto& report : doc.reports) {
        out << std::left << std::setw(9) << report.ordinal << std::setw(12) << report.start_tick
            << std::setw(12) << report.end_tick << std::setw(7)
            << (report.empty ? "yes" : "no");
        for (std::size_t i = 0; i < types.size(); ++i) {
            auto it = report.scores.find(types[i]);
            out << std::setw(static_cast<int>(widths[i]))
                << (it == report.scores.end() ? std::string("-")
                                              : format_fixed6(it->second.k_alpha));
        }
        out << '\n';
    }
}

// --- Label sidecar --------------------------------------------------------------

void write_labels(std::ostream& out, const std::map<std::string, SourceLabel>& labels) {
    for (const auto& [type, label] : labels) {
        out << type << ',' << to_string(label) << '\n';
    }
}

std::map<std::string, SourceLabel> read_labels(std::istream& in) {
    std::map<std::string, SourceLabel> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0) {
            throw ParseError("expected 'antigen_type,label'", line_no);
        }
        const std::string type = line.substr(0, comma);
        const std::string label = line.substr(comma + 1);
        try {
            labels[type] = source_label_from_string(label);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return labels;
}

// --- Scenario specs --------------------------------------------------------------

namespace {

json levels_to_json(const SignalLevels& levels) {
    return json{{"pamp", levels.pamp},
                {"danger", levels.danger},
                {"safe", levels.safe},
                {"noise_stdev", levels.noise_stdev}};
}

SignalLevels levels_from_json(const json& obj) {
    SignalLevels levels;
    levels.pamp = get_field<double>(obj, "pamp", 0);
    levels.danger = get_field<double>(obj, "danger", 0);
    levels.safe = get_field<double>(obj, "safe", 0);
    levels.noise_stdev = get_field<double>(obj, "noise_stdev", 0);
    return levels;
}

} // namespace

void write_scenario_json(std::ostream& out, const ScenarioSpec& spec) {
    json doc;
    doc["duration_ticks"] = spec.duration_ticks;
    doc["seed"] = spec.seed;
    doc["ambient"] = levels_to_json(spec.ambient);
    doc["antigen_sources"] = json::array();
    for (const auto& source : spec.antigen_sources) {
        doc["antigen_sources"].push_back(json{{"antigen_type", source.antigen_type},
                                              {"label", to_string(source.label)},
                                              {"base_rate", source.base_rate}});
    }
    doc["phases"] = json::array();
    for (const auto& phase : spec.phases) {
        json p{{"start_tick", phase.start_tick},
               {"end_tick", phase.end_tick},
               {"pamp_level", phase.levels.pamp},
               {"danger_level", phase.levels.danger},
               {"safe_level", phase.levels.safe},
               {"noise_stdev", phase.levels.noise_stdev}};
        p["rate_multipliers"] = json::object();
        for (const auto& [type, mult] : phase.rate_multipliers) {
            p["rate_multipliers"][type] = mult;
        }
        doc["phases"].push_back(std::move(p));
    }
    out << doc.dump(2) << '\n';
}

ScenarioSpec read_scenario_json(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid scenario JSON: ") + e.what(), 0);
    }
    if (!doc.is_object()) {
        throw ParseError("scenario spec must be a JSON object", 0);
    }
    ScenarioSpec spec;
    spec.duration_ticks = get_field<std::uint64_t>(doc, "duration_ticks", 0);
    spec.seed = get_field<std::uint64_t>(doc, "seed", 0);
    if (!doc.contains("ambient")) {
        throw ParseError("scenario spec lacks ambient levels", 0);
    }
    spec.ambient = levels_from_json(doc["ambient"]);
    if (doc.contains("antigen_sources")) {
        for (const auto& s : doc["antigen_sources"]) {
            AntigenSource source;
            source.antigen_type = get_field<std::string>(s, "antigen_type", 0);
            source.label = source_label_from_string(get_field<std::string>(s, "label", 0));
            source.base_rate = get_field<double>(s, "base_rate", 0);
            spec.antigen_sources.push_back(std::move(source));
        }
    }
    if (doc.contains("phases")) {
        for (const auto& p : doc["phases"]) {
            PhaseSpec phase;
            phase.start_tick = get_field<std::uint64_t>(p, "start_tick", 0);
            phase.end_tick = get_field<std::uint64_t>(p, "end_tick", 0);
            phase.levels.pamp = get_field<double>(p, "pamp_level", 0);
            phase.levels.danger = get_field<double>(p, "danger_level", 0);
            phase.levels.safe = get_field<double>(p, "safe_level", 0);
            phase.levels.noise_stdev = get_field<double>(p, "noise_stdev", 0);
            if (p.contains("rate_multipliers")) {
                for (const auto& [type, mult] : p["rate_multipliers"].items()) {
                    if (!mult.is_number()) {
                        throw ParseError("rate multiplier for '" + type + "' must be a number", 0);
                    }
                    phase.rate_multipliers[type] = mult.get<double>();
                }
            }
            spec.phases.push_back(std::move(phase));
        }
    }
    return spec;
}

// --- Statistics tables ------------------------------------------------------------

void write_summary_table(std::ostream& out, std::span<const SummaryRow> rows) {
    out << std::left << std::setw(16) << "type" << std::right << std::setw(12) << "size"
        << std::setw(10) << "n" << std::setw(16) << "min" << std::setw(16) << "mean"
        << std::setw(16) << "max" << std::setw(16) << "stdev" << '\n';
    for (const auto& row : rows) {
        out << std::left << std::setw(16) << row.antigen_type << std::right << std::setw(12)
            << row.segment_size << std::setw(10) << row.n_segments << std::setw(16)
            << format_fixed6(row.min) << std::setw(16) << format_fixed6(row.mean)
            << std::setw(16) << format_fixed6(row.max) << std::setw(16)
            << format_fixed6(row.stdev) << '\n';
    }
}

void write_summary_jsonl(std::ostream& out, std::span<const SummaryRow> rows) {
    for (const auto& row : rows) {
        out << "{\"antigen_type\":\"" << json_escape(row.antigen_type) << "\""
            << ",\"max\":" << format_fixed6(row.max)
            << ",\"mean\":" << format_fixed6(row.mean)
            << ",\"min\":" << format_fixed6(row.min)
            << ",\"n_segments\":" << row.n_segments
            << ",\"segment_size\":" << row.segment_size
            << ",\"stdev\":" << format_fixed6(row.stdev) << "}" << '\n';
    }
}

namespace {

std::string p_cell(const std::optional<TTestResult>& result) {
    if (!result) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", result->p_value);
    std::string s(buf);
    if (result->significant) s += " *";
    return s;
}

} // namespace

void write_comparison_text(std::ostream& out, const ComparisonGrid& grid,
                           const std::map<std::string, SourceLabel>& labels) {
    const char* method = grid.method == TwoSampleMethod::welch ? "welch" : "pooled";
    out << "Two-sample two-sided t-tests (" << method << ", alpha=" << format_double(grid.alpha)
        << "); '*' marks p < alpha, 'n/a' too few segments\n";
    for (const auto& type : grid.types) {
        out << "\n== " << type.antigen_type;
        auto label_it = labels.find(type.antigen_type);
        if (label_it != labels.end()) {
            out << " [" << to_string(label_it->second) << "]";
        }
        out << " ==\n";
        if (grid.sizes.size() < 2) {
            out << "(single segment size: no pairwise comparisons)\n";
            continue;
        }
        out << std::left << std::setw(12) << "";
        for (std::size_t j = 1; j < grid.sizes.size(); ++j) {
            out << std::setw(14) << grid.sizes[j];
        }
        out << '\n';
        std::size_t cell = 0;
        for (std::size_t i = 0; i + 1 < grid.sizes.size(); ++i) {
            out << std::left << std::setw(12) << grid.sizes[i];
            for (std::size_t j = 1; j < grid.sizes.size(); ++j) {
                if (j <= i) {
                    out << std::setw(14) << "-";
                } else {
                    out << std::setw(14) << p_cell(type.pairwise[cell].result);
                    ++cell;
                }
            }
            out << '\n';
        }
    }

    out << "\nOne-sample one-sided t-tests against the unsegmented score (alpha="
        << format_double(grid.alpha) << ")\n";
    out << std::left << std::setw(16) << "type" << std::setw(18) << "unsegmented";
    for (const auto size : grid.sizes) {
        out << std::setw(14) << size;
    }
    out << '\n';
    for (const auto& type : grid.types) {
        out << std::left << std::setw(16) << type.antigen_type << std::setw(18)
            << format_fixed6(type.baseline_mu);
        for (const auto& cell : type.vs_baseline) {
            out << std::setw(14) << p_cell(cell.result);
        }
        out << '\n';
    }
}

void write_comparison_jsonl(std::ostream& out, const ComparisonGrid& grid) {
    const char* method = grid.method == TwoSampleMethod::welch ? "welch" : "pooled";
    out << "{\"alpha\":" << format_double(grid.alpha) << ",\"method\":\"" << method
        << "\",\"sizes\":[";
    for (std::size_t i = 0; i < grid.sizes.size(); ++i) {
        if (i) out << ',';
        out << grid.sizes[i];
    }
    out << "]}" << '\n';
    auto write_result = [&out](const std::optional<TTestResult>& result) {
        if (!result) {
            out << ",\"p_value\":null,\"significant\":false";
            return;
        }
        out << ",\"df\":" << format_double(result->degrees_of_freedom)
            << ",\"p_value\":" << format_double(result->p_value)
            << ",\"significant\":" << (result->significant ? "true" : "false")
            << ",\"statistic\":" << format_double(result->statistic);
    };
    for (const auto& type : grid.types) {
        for (const auto& cell : type.pairwise) {
            out << "{\"antigen_type\":\"" << json_escape(type.antigen_type)
                << "\",\"kind\":\"two_sample_two_sided\"";
            write_result(cell.result);
            out << ",\"size_a\":" << cell.size_a << ",\"size_b\":" << cell.size_b << "}" << '\n';
        }
        for (const auto& cell : type.vs_baseline) {
            out << "{\"antigen_type\":\"" << json_escape(type.antigen_type)
                << "\",\"kind\":\"one_sample_one_sided\",\"mu0\":"
                << format_double(type.baseline_mu);
            if (cell.result && cell.result->direction) {
                out << ",\"direction\":\"" << to_string(*cell.result->direction) << "\"";
            }
            write_result(cell.result);
            out << ",\"segment_size\":" << cell.segment_size << "}" << '\n';
        }
    }
}

// --- Files ---------------------------------------------------------------------

void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot open '" + tmp.string() + "' for writing");
        }
        writer(out);
        out.flush();
        if (!out) {
            throw DataError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw DataError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                        "': " + ec.message());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace ddca
