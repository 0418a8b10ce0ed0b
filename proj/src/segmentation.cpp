#include "ddca/segmentation.hpp"

#include <utility>

#include "ddca/errors.hpp"

namespace ddca {

const char* to_string(SegMode mode) {
    switch (mode) {
        case SegMode::none: return "none";
        case SegMode::abs: return "abs";
        case SegMode::tbs: return "tbs";
    }
    return "none";
}

SegMode seg_mode_from_string(const std::string& name) {
    if (name == "none") return SegMode::none;
    if (name == "abs") return SegMode::abs;
    if (name == "tbs") return SegMode::tbs;
    throw ConfigError("unknown segmentation mode '" + name + "' (expected none, abs or tbs)");
}

void validate_segmenter_config(const SegmenterConfig& cfg) {
    if (cfg.mode != SegMode::none && cfg.segment_size < 1) {
        throw ConfigError("segment_size must be >= 1");
    }
}

std::map<std::string, KAlphaScore> compute_k_alpha(std::span<const ProcessedRecord> records) {
    struct Acc {
        double k_sum = 0.0;
        std::uint64_t count = 0;
        std::uint64_t dcs = 0;
    };
    std::map<std::string, Acc> acc;
    for (const auto& rec : records) {
        for (const auto& [type, count] : rec.antigen_counts) {
            auto& a = acc[type];
            a.k_sum += rec.sum_k; // once per type present, unweighted
            a.count += count;
            a.dcs += 1;
        }
    }
    std::map<std::string, KAlphaScore> out;
    for (const auto& [type, a] : acc) {
        out.emplace(type, KAlphaScore{type, a.k_sum / static_cast<double>(a.count), a.count, a.dcs});
    }
    return out;
}

SegmentReport report_from_segment(const Segment& seg) {
    SegmentReport report;
    report.ordinal = seg.ordinal;
    report.start_tick = seg.start_tick;
    report.end_tick = seg.end_tick;
    report.scores = compute_k_alpha(seg.records);
    report.empty = (seg.antigen_instances == 0);
    return report;
}

namespace {

class NoneSegmenter final : public Segmenter {
public:
    explicit NoneSegmenter(SegmentSink sink) : sink_(std::move(sink)) {}

    void push(ProcessedRecord&& rec) override {
        if (open_.records.empty()) {
            open_.start_tick = rec.presented_at;
        }
        open_.end_tick = rec.presented_at;
        open_.antigen_instances += rec.total_antigens();
        open_.records.push_back(std::move(rec));
    }

    // The baseline always yields exactly one segment, even over an empty
    // stream.
    void finish() override { sink_(std::move(open_)); }

private:
    SegmentSink sink_;
    Segment open_;
};

class AbsSegmenter final : public Segmenter {
public:
    AbsSegmenter(std::uint64_t size, SegmentSink sink) : size_(size), sink_(std::move(sink)) {}

    void push(ProcessedRecord&& rec) override {
        if (open_.records.empty()) {
            open_.start_tick = rec.presented_at;
        }
        open_.end_tick = rec.presented_at;
        open_.antigen_instances += rec.total_antigens();
        open_.records.push_back(std::move(rec));
        if (open_.antigen_instances >= size_) {
            close_open();
        }
    }

    void finish() override {
        if (!open_.records.empty()) {
            close_open();
        }
    }

private:
    std::uint64_t size_;
    SegmentSink sink_;
    Segment open_;
    std::uint64_t next_ordinal_ = 0;

    void close_open() {
        open_.ordinal = next_ordinal_++;
        sink_(std::move(open_));
        open_ = Segment{};
    }
};

class TbsSegmenter final : public Segmenter {
public:
    TbsSegmenter(std::uint64_t size, SegmentSink sink) : size_(size), sink_(std::move(sink)) {}

    void push(ProcessedRecord&& rec) override {
        const std::uint64_t window = rec.presented_at / size_;
        if (!any_record_) {
            any_record_ = true;
            // Stream time starts at tick 0: leading empty windows count.
            open_window_ = 0;
        }
        while (open_window_ < window) {
            emit_window();
        }
        open_.antigen_instances += rec.total_antigens();
        open_.records.push_back(std::move(rec));
    }

    void finish() override {
        if (any_record_) {
            emit_window();
        }
    }

private:
    std::uint64_t size_;
    SegmentSink sink_;
    Segment open_;
    std::uint64_t open_window_ = 0;
    bool any_record_ = false;

    void emit_window() {
        open_.ordinal = open_window_;
        open_.start_tick = open_window_ * size_;
        open_.end_tick = open_window_ * size_ + (size_ - 1);
        sink_(std::move(open_));
        open_ = Segment{};
        ++open_window_;
    }
};

} // namespace

std::unique_ptr<Segmenter> make_segmenter(const SegmenterConfig& cfg, Segmenter::SegmentSink sink) {
    validate_segmenter_config(cfg);
    switch (cfg.mode) {
        case SegMode::none: return std::make_unique<NoneSegmenter>(std::move(sink));
        case SegMode::abs: return std::make_unique<AbsSegmenter>(cfg.segment_size, std::move(sink));
        case SegMode::tbs: return std::make_unique<TbsSegmenter>(cfg.segment_size, std::move(sink));
    }
    throw ConfigError("unknown segmentation mode");
}

std::vector<SegmentReport> analyze(std::span<const ProcessedRecord> records,
                                   const SegmenterConfig& cfg) {
    std::vector<SegmentReport> reports;
    auto segmenter = make_segmenter(cfg, [&reports](Segment&& seg) {
        reports.push_back(report_from_segment(seg));
    });
    for (const auto& rec : records) {
        if (!cfg.include_forced && rec.forced) continue;
        segmenter->push(ProcessedRecord(rec));
    }
    segmenter->finish();
    return reports;
}

} // namespace ddca
