// ddca: streaming deterministic dendritic cell algorithm pipeline.
//
// Subcommands: generate (synthetic scenario -> event stream + labels),
// run (event stream -> segment report), sweep (one run analysed at several
// segment sizes), compare (t-test grids between runs and a baseline).

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddca/datagen.hpp"
#include "ddca/engine.hpp"
#include "ddca/errors.hpp"
#include "ddca/segmentation.hpp"
#include "ddca/stats.hpp"
#include "ddca/stream_io.hpp"

namespace {

using namespace ddca;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct GenerateOptions {
    std::string bundled;
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    std::string output;
};

struct RunOptions {
    std::string input;
    std::string mode = "none";
    std::optional<std::uint64_t> size;
    std::optional<std::uint32_t> population;
    std::optional<double> threshold_step;
    std::string weights_path;
    bool no_flush = false;
    bool exclude_forced = false;
    std::string config_path;
    std::string output;
    std::string format = "jsonl";
};

struct SweepOptions {
    RunOptions base;
    std::vector<std::uint64_t> sizes;
    std::string prefix;
};

struct CompareOptions {
    std::string baseline_path;
    std::vector<std::string> report_paths;
    std::string labels_path;
    double alpha = 0.05;
    std::vector<std::string> directions;
    std::string two_sample = "welch";
    std::string output;
    std::string format = "table";
};

ScenarioSpec load_scenario(const GenerateOptions& opt) {
    if (!opt.bundled.empty() && !opt.spec_path.empty()) {
        throw ConfigError("give either --bundled or --spec, not both");
    }
    if (!opt.bundled.empty()) {
        if (opt.bundled != "syn-scan") {
            throw ConfigError("unknown bundled scenario '" + opt.bundled +
                              "' (available: syn-scan)");
        }
        return bundled_scenario_syn_scan();
    }
    if (opt.spec_path.empty()) {
        throw ConfigError("either --bundled or --spec is required");
    }
    std::ifstream in(opt.spec_path);
    if (!in) {
        throw DataError("cannot open scenario spec '" + opt.spec_path + "'");
    }
    return read_scenario_json(in);
}

int cmd_generate(const GenerateOptions& opt) {
    ScenarioSpec spec = load_scenario(opt);
    if (opt.seed) spec.seed = *opt.seed;
    validate_scenario(spec);

    std::uint64_t n_events = 0;
    std::uint64_t n_antigens = 0;
    atomic_write_file(opt.output, [&](std::ostream& out) {
        generate(spec, [&](Event&& ev) {
            ++n_events;
            if (std::holds_alternative<AntigenEvent>(ev)) ++n_antigens;
            out << format_event_line(ev) << '\n';
        });
    });

    fs::path labels_path(opt.output);
    labels_path.replace_extension(".labels");
    const auto labels = label_map(spec);
    atomic_write_file(labels_path, [&](std::ostream& out) { write_labels(out, labels); });

    std::cerr << "generated " << n_events << " events (" << n_antigens << " antigens, "
              << spec.duration_ticks << " ticks) -> " << opt.output << " + "
              << labels_path.string() << '\n';
    return kExitOk;
}

WeightMatrix load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open weights file '" + path + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid weights JSON: ") + e.what(), 0);
    }
    WeightMatrix w;
    auto read = [&doc](const char* key, double& slot) {
        if (!doc.contains(key) || !doc[key].is_number()) {
            throw ConfigError(std::string("weights file lacks numeric '") + key + "'");
        }
        slot = doc[key].get<double>();
    };
    read("csm_pamp", w.csm_pamp);
    read("csm_danger", w.csm_danger);
    read("csm_safe", w.csm_safe);
    read("k_pamp", w.k_pamp);
    read("k_danger", w.k_danger);
    read("k_safe", w.k_safe);
    return w;
}

// Fills unset options from a JSON config file; explicit flags win.
void apply_config_file(RunOptions& opt, const CLI::App* cmd) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) {
        throw DataError("cannot open config file '" + opt.config_path + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid config JSON: ") + e.what(), 0);
    }
    auto unset = [cmd](const std::string& flag) {
        const CLI::Option* o = cmd->get_option_no_throw(flag);
        return o == nullptr || o->count() == 0;
    };
    if (doc.contains("mode") && unset("--mode")) opt.mode = doc["mode"].get<std::string>();
    if (doc.contains("size") && unset("--size")) opt.size = doc["size"].get<std::uint64_t>();
    if (doc.contains("population") && unset("--population")) {
        opt.population = doc["population"].get<std::uint32_t>();
    }
    if (doc.contains("threshold_step") && unset("--threshold-step")) {
        opt.threshold_step = doc["threshold_step"].get<double>();
    }
    if (doc.contains("weights") && unset("--weights") && doc["weights"].is_string()) {
        opt.weights_path = doc["weights"].get<std::string>();
    }
    if (doc.contains("flush") && unset("--no-flush")) {
        opt.no_flush = !doc["flush"].get<bool>();
    }
    if (doc.contains("include_forced") && unset("--exclude-forced")) {
        opt.exclude_forced = !doc["include_forced"].get<bool>();
    }
    if (doc.contains("format") && unset("--format")) {
        opt.format = doc["format"].get<std::string>();
    }
}

struct ResolvedRun {
    PopulationConfig population;
    SegmenterConfig segmenter;
    RunMetadata meta;
};

ResolvedRun resolve_run(const RunOptions& opt) {
    ResolvedRun r;
    r.segmenter.mode = seg_mode_from_string(opt.mode);
    if (r.segmenter.mode != SegMode::none) {
        if (!opt.size) {
            throw ConfigError("--size is required for mode " + opt.mode);
        }
        r.segmenter.segment_size = *opt.size;
    }
    r.segmenter.include_forced = !opt.exclude_forced;
    validate_segmenter_config(r.segmenter);

    if (opt.population) r.population.population_size = *opt.population;
    if (opt.threshold_step) r.population.threshold_step = *opt.threshold_step;
    if (!opt.weights_path.empty()) r.population.weights = load_weights(opt.weights_path);
    r.population.flush_at_end = !opt.no_flush;

    auto validation = validate_weights(r.population.weights);
    if (!validation.ok()) {
        std::string msg = "invalid weights:";
        for (const auto& v : validation.violations) msg += " " + v + ";";
        throw ConfigError(msg);
    }

    r.meta.mode = opt.mode;
    r.meta.segment_size = r.segmenter.mode == SegMode::none ? 0 : r.segmenter.segment_size;
    r.meta.population_size = r.population.population_size;
    r.meta.threshold_step = r.population.threshold_step;
    r.meta.weights = r.population.weights;
    r.meta.flush_at_end = r.population.flush_at_end;
    r.meta.include_forced = r.segmenter.include_forced;
    r.meta.input = opt.input;
    return r;
}

void write_report_output(const std::string& path, const std::string& format,
                         const ReportDocument& doc) {
    if (format == "jsonl") {
        atomic_write_file(path, [&doc](std::ostream& out) { write_report_jsonl(out, doc); });
    } else if (format == "table") {
        atomic_write_file(path, [&doc](std::ostream& out) { write_report_table(out, doc); });
    } else {
        throw ConfigError("unknown format '" + format + "' (expected jsonl or table)");
    }
}

int cmd_run(const RunOptions& opt) {
    const auto started = std::chrono::steady_clock::now();
    const ResolvedRun resolved = resolve_run(opt);

    std::ifstream in(opt.input);
    if (!in) {
        throw DataError("cannot open input stream '" + opt.input + "'");
    }

    ReportDocument doc;
    doc.meta = resolved.meta;
    auto segmenter = make_segmenter(resolved.segmenter, [&doc](Segment&& seg) {
        doc.reports.push_back(report_from_segment(seg));
    });

    std::uint64_t n_records = 0;
    StreamRunner runner(resolved.population, [&](ProcessedRecord&& rec) {
        ++n_records;
        if (!resolved.segmenter.include_forced && rec.forced) return;
        segmenter->push(std::move(rec));
    });

    EventStreamReader reader(in);
    while (auto ev = reader.next()) {
        runner.push(*ev);
    }
    runner.finish();
    segmenter->finish();

    write_report_output(opt.output, opt.format, doc);

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    std::cerr << "segments=" << doc.reports.size()
              << " antigens=" << runner.engine().antigens_ingested()
              << " records=" << n_records
              << " dropped=" << runner.engine().dropped_antigens()
              << " wall_ms=" << elapsed << '\n';
    return kExitOk;
}

int cmd_sweep(const SweepOptions& opt) {
    if (opt.sizes.empty()) {
        throw ConfigError("--sizes needs at least one value");
    }
    RunOptions base = opt.base;
    base.size = opt.sizes.front(); // satisfies the abs/tbs size requirement; per-size below
    const ResolvedRun resolved = resolve_run(base);
    if (resolved.segmenter.mode == SegMode::none) {
        throw ConfigError("sweep requires --mode abs or tbs");
    }

    std::ifstream in(base.input);
    if (!in) {
        throw DataError("cannot open input stream '" + base.input + "'");
    }
    std::vector<ProcessedRecord> records;
    StreamRunner runner(resolved.population, [&records](ProcessedRecord&& rec) {
        records.push_back(std::move(rec));
    });
    EventStreamReader reader(in);
    while (auto ev = reader.next()) {
        runner.push(*ev);
    }
    runner.finish();

    std::vector<SummaryRow> summary;
    std::map<std::string, std::map<std::uint64_t, SummaryRow>> per_type;
    for (const std::uint64_t size : opt.sizes) {
        SegmenterConfig seg_cfg = resolved.segmenter;
        seg_cfg.segment_size = size;
        ReportDocument doc;
        doc.meta = resolved.meta;
        doc.meta.segment_size = size;
        doc.reports = analyze(records, seg_cfg);

        const std::string path =
            opt.prefix + "." + base.mode + std::to_string(size) + ".jsonl";
        write_report_output(path, "jsonl", doc);

        const RunSeries series = run_series_from_reports(doc.reports, size);
        for (const auto& [type, values] : series.series) {
            per_type[type].emplace(size, summarize(values, type, size));
        }
        std::cerr << "size=" << size << " segments=" << doc.reports.size() << " -> " << path
                  << '\n';
    }
    for (const auto& [type, by_size] : per_type) {
        for (const std::uint64_t size : opt.sizes) {
            auto it = by_size.find(size);
            if (it != by_size.end()) summary.push_back(it->second);
        }
    }

    atomic_write_file(opt.prefix + ".summary.txt",
                      [&summary](std::ostream& out) { write_summary_table(out, summary); });
    atomic_write_file(opt.prefix + ".summary.jsonl",
                      [&summary](std::ostream& out) { write_summary_jsonl(out, summary); });
    std::cerr << "antigens=" << runner.engine().antigens_ingested()
              << " records=" << records.size() << " sizes=" << opt.sizes.size() << '\n';
    return kExitOk;
}

std::map<std::string, Direction> parse_directions(const std::vector<std::string>& args) {
    std::map<std::string, Direction> directions;
    for (const auto& arg : args) {
        std::size_t pos = 0;
        while (pos <= arg.size()) {
            std::size_t comma = arg.find(',', pos);
            if (comma == std::string::npos) comma = arg.size();
            const std::string item = arg.substr(pos, comma - pos);
            if (!item.empty()) {
                const std::size_t eq = item.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw ConfigError("bad --direction entry '" + item +
                                      "' (expected type=greater|less)");
                }
                directions[item.substr(0, eq)] = direction_from_string(item.substr(eq + 1));
            }
            pos = comma + 1;
        }
    }
    return directions;
}

int cmd_compare(const CompareOptions& opt) {
    std::ifstream base_in(opt.baseline_path);
    if (!base_in) {
        throw DataError("cannot open baseline report '" + opt.baseline_path + "'");
    }
    const ReportDocument baseline = read_report_jsonl(base_in);
    if (baseline.reports.size() != 1) {
        throw ConfigError("baseline must be a single-segment (mode none) report, got " +
                          std::to_string(baseline.reports.size()) + " segments");
    }
    std::map<std::string, double> baseline_scores;
    for (const auto& [type, score] : baseline.reports[0].scores) {
        baseline_scores.emplace(type, score.k_alpha);
    }

    std::vector<RunSeries> runs;
    for (const auto& path : opt.report_paths) {
        std::ifstream in(path);
        if (!in) {
            throw DataError("cannot open report '" + path + "'");
        }
        const ReportDocument doc = read_report_jsonl(in);
        runs.push_back(run_series_from_reports(doc.reports, doc.meta.segment_size));
    }

    TestPlan plan;
    plan.alpha = opt.alpha;
    if (opt.two_sample == "welch") {
        plan.method = TwoSampleMethod::welch;
    } else if (opt.two_sample == "pooled") {
        plan.method = TwoSampleMethod::pooled;
    } else {
        throw ConfigError("unknown --two-sample '" + opt.two_sample +
                          "' (expected welch or pooled)");
    }
    plan.directions = parse_directions(opt.directions);

    const ComparisonGrid grid = compare_runs(runs, baseline_scores, plan);

    std::map<std::string, SourceLabel> labels;
    if (!opt.labels_path.empty()) {
        std::ifstream in(opt.labels_path);
        if (!in) {
            throw DataError("cannot open labels file '" + opt.labels_path + "'");
        }
        labels = read_labels(in);
    }

    auto emit = [&](std::ostream& out) {
        if (opt.format == "table") {
            write_comparison_text(out, grid, labels);
        } else if (opt.format == "jsonl") {
            write_comparison_jsonl(out, grid);
        } else {
            throw ConfigError("unknown format '" + opt.format + "' (expected table or jsonl)");
        }
    };
    if (opt.output.empty()) {
        emit(std::cout);
    } else {
        atomic_write_file(opt.output, emit);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming deterministic dendritic cell algorithm pipeline"};
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* cmd_gen = app.add_subcommand("generate", "emit a synthetic event stream + labels");
    cmd_gen->add_option("--bundled", gen.bundled, "bundled scenario name (syn-scan)");
    cmd_gen->add_option("--spec", gen.spec_path, "scenario spec JSON file");
    cmd_gen->add_option("--seed", gen.seed, "override the spec's seed");
    cmd_gen->add_option("-o,--output", gen.output, "output event stream path")->required();

    RunOptions run;
    auto* cmd_run_p = app.add_subcommand("run", "run detection + segmented analysis");
    cmd_run_p->add_option("-i,--input", run.input, "event stream file")->required();
    cmd_run_p->add_option("--mode", run.mode, "segmentation mode: none, abs or tbs");
    cmd_run_p->add_option("--size", run.size, "segment size (antigens for abs, ticks for tbs)");
    cmd_run_p->add_option("--population", run.population, "DC population size");
    cmd_run_p->add_option("--threshold-step", run.threshold_step,
                          "migration threshold step per cell index");
    cmd_run_p->add_option("--weights", run.weights_path, "weights JSON file");
    cmd_run_p->add_flag("--no-flush", run.no_flush, "drop antigens still held at end of stream");
    cmd_run_p->add_flag("--exclude-forced", run.exclude_forced,
                        "exclude end-of-stream flushed records from analysis");
    cmd_run_p->add_option("--config", run.config_path, "JSON config file (flags win)");
    cmd_run_p->add_option("-o,--output", run.output, "report output path")->required();
    cmd_run_p->add_option("--format", run.format, "report format: jsonl or table");

    SweepOptions sweep;
    auto* cmd_sweep_p = app.add_subcommand("sweep", "analyse one run at several segment sizes");
    cmd_sweep_p->add_option("-i,--input", sweep.base.input, "event stream file")->required();
    cmd_sweep_p->add_option("--mode", sweep.base.mode, "segmentation mode: abs or tbs")
        ->required();
    cmd_sweep_p->add_option("--sizes", sweep.sizes, "segment sizes to sweep")
        ->required()
        ->delimiter(',');
    cmd_sweep_p->add_option("--population", sweep.base.population, "DC population size");
    cmd_sweep_p->add_option("--threshold-step", sweep.base.threshold_step,
                            "migration threshold step per cell index");
    cmd_sweep_p->add_option("--weights", sweep.base.weights_path, "weights JSON file");
    cmd_sweep_p->add_flag("--no-flush", sweep.base.no_flush,
                          "drop antigens still held at end of stream");
    cmd_sweep_p->add_flag("--exclude-forced", sweep.base.exclude_forced,
                          "exclude end-of-stream flushed records from analysis");
    cmd_sweep_p->add_option("--config", sweep.base.config_path, "JSON config file (flags win)");
    cmd_sweep_p->add_option("-o,--output", sweep.prefix, "output path prefix")->required();

    CompareOptions cmp;
    auto* cmd_cmp = app.add_subcommand("compare", "t-test grids between runs and a baseline");
    cmd_cmp->add_option("--baseline", cmp.baseline_path, "unsegmented (mode none) report")
        ->required();
    cmd_cmp->add_option("--reports", cmp.report_paths, "segmented report files")->required();
    cmd_cmp->add_option("--labels", cmp.labels_path, "label sidecar for annotation");
    cmd_cmp->add_option("--alpha", cmp.alpha, "significance level");
    cmd_cmp->add_option("--direction", cmp.directions,
                        "one-sided direction per type: type=greater|less[,type=...]");
    cmd_cmp->add_option("--two-sample", cmp.two_sample, "two-sample method: welch or pooled");
    cmd_cmp->add_option("-o,--output", cmp.output, "output path (default stdout)");
    cmd_cmp->add_option("--format", cmp.format, "output format: table or jsonl");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (cmd_gen->parsed()) return cmd_generate(gen);
        if (cmd_run_p->parsed()) {
            apply_config_file(run, cmd_run_p);
            return cmd_run(run);
        }
        if (cmd_sweep_p->parsed()) {
            apply_config_file(sweep.base, cmd_sweep_p);
            return cmd_sweep(sweep);
        }
        if (cmd_cmp->parsed()) return cmd_compare(cmp);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitConfig;
}
