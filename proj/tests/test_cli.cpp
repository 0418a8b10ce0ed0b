#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ddca/stream_io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = DDCA_CLI_PATH;

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path() /
               ("ddca_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, const std::string& capture_stderr_to = "") {
    std::string cmd = kCli + " " + args;
    if (!capture_stderr_to.empty()) {
        cmd += " 2>" + capture_stderr_to;
    } else {
        cmd += " 2>/dev/null";
    }
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) { return ddca::read_text_file(path); }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// A small custom scenario keeps CLI runs fast.
const char* kTinySpec = R"({
  "duration_ticks": 60,
  "seed": 11,
  "ambient": {"pamp": 2.0, "danger": 6.0, "safe": 80.0, "noise_stdev": 2.0},
  "antigen_sources": [
    {"antigen_type": "scan", "label": "anomalous", "base_rate": 1.0},
    {"antigen_type": "web", "label": "normal", "base_rate": 4.0}
  ],
  "phases": [
    {"start_tick": 20, "end_tick": 40, "pamp_level": 60.0, "danger_level": 50.0,
     "safe_level": 10.0, "noise_stdev": 4.0, "rate_multipliers": {"scan": 12.0}}
  ]
})";

} // namespace

TEST_CASE("generate is deterministic and writes the label sidecar") {
    TempDir dir;
    write_file(dir.file("spec.json"), kTinySpec);
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " -o " + dir.file("a.evt")) ==
            0);
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " -o " + dir.file("b.evt")) ==
            0);
    CHECK(slurp(dir.file("a.evt")) == slurp(dir.file("b.evt")));
    CHECK(slurp(dir.file("a.labels")) == "scan,anomalous\nweb,normal\n");

    // A different seed changes the stream.
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " --seed 12 -o " +
                    dir.file("c.evt")) == 0);
    CHECK(slurp(dir.file("a.evt")) != slurp(dir.file("c.evt")));
}

TEST_CASE("generate rejects overlapping phases with exit 1") {
    TempDir dir;
    std::string bad = kTinySpec;
    const std::string phases = R"("phases": [)";
    bad.replace(bad.find(phases), phases.size(),
                R"("phases": [
    {"start_tick": 10, "end_tick": 30, "pamp_level": 1.0, "danger_level": 1.0,
     "safe_level": 1.0, "noise_stdev": 0.0, "rate_multipliers": {}},)");
    write_file(dir.file("bad.json"), bad);
    const int code =
        run_cli("generate --spec " + dir.file("bad.json") + " -o " + dir.file("x.evt"),
                dir.file("err.txt"));
    CHECK(code == 1);
    CHECK(slurp(dir.file("err.txt")).find("phases overlap") != std::string::npos);
}

TEST_CASE("run produces a parseable report and a stderr summary") {
    TempDir dir;
    write_file(dir.file("spec.json"), kTinySpec);
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " -o " + dir.file("s.evt")) ==
            0);

    REQUIRE(run_cli("run -i " + dir.file("s.evt") + " --mode none -o " + dir.file("none.jsonl"),
                    dir.file("err.txt")) == 0);
    const std::string summary = slurp(dir.file("err.txt"));
    CHECK(summary.find("segments=1") != std::string::npos);
    CHECK(summary.find("antigens=") != std::string::npos);
    CHECK(summary.find("wall_ms=") != std::string::npos);

    std::ifstream in(dir.file("none.jsonl"));
    const auto doc = ddca::read_report_jsonl(in);
    CHECK(doc.meta.mode == "none");
    CHECK(doc.meta.population_size == 100);
    REQUIRE(doc.reports.size() == 1);
    CHECK(doc.reports[0].scores.count("scan") == 1);
    CHECK(doc.reports[0].scores.count("web") == 1);

    // Table format renders too.
    REQUIRE(run_cli("run -i " + dir.file("s.evt") + " --mode none --format table -o " +
                    dir.file("none.txt")) == 0);
    CHECK(slurp(dir.file("none.txt")).find("segment") != std::string::npos);
}

TEST_CASE("run with abs segmentation honours the size flag") {
    TempDir dir;
    write_file(dir.file("spec.json"), kTinySpec);
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " -o " + dir.file("s.evt")) ==
            0);
    REQUIRE(run_cli("run -i " + dir.file("s.evt") + " --mode abs --size 50 -o " +
                    dir.file("abs.jsonl")) == 0);
    std::ifstream in(dir.file("abs.jsonl"));
    const auto doc = ddca::read_report_jsonl(in);
    CHECK(doc.meta.mode == "abs");
    CHECK(doc.meta.segment_size == 50);
    CHECK(doc.reports.size() > 1);

    // Missing --size for abs is a config error.
    CHECK(run_cli("run -i " + dir.file("s.evt") + " --mode abs -o " + dir.file("y.jsonl")) == 1);
    // Unknown mode is a config error.
    CHECK(run_cli("run -i " + dir.file("s.evt") + " --mode bogus -o " + dir.file("z.jsonl")) ==
          1);
}

TEST_CASE("run exits 2 on malformed or disordered input naming the line") {
    TempDir dir;
    write_file(dir.file("bad.evt"), "A,1,x\nS,1,0,0,0\nS,2,0,0\n");
    int code = run_cli("run -i " + dir.file("bad.evt") + " --mode none -o " + dir.file("r.jsonl"),
                       dir.file("err.txt"));
    CHECK(code == 2);
    CHECK(slurp(dir.file("err.txt")).find("line 3") != std::string::npos);

    write_file(dir.file("disorder.evt"), "S,5,0,0,0\nA,4,x\n");
    code = run_cli("run -i " + dir.file("disorder.evt") + " --mode none -o " + dir.file("r.jsonl"),
                   dir.file("err.txt"));
    CHECK(code == 2);

    write_file(dir.file("late_antigen.evt"), "S,5,0,0,0\nA,5,x\n");
    code = run_cli("run -i " + dir.file("late_antigen.evt") + " --mode none -o " +
                       dir.file("r.jsonl"),
                   dir.file("err.txt"));
    CHECK(code == 2);

    CHECK(run_cli("run -i " + dir.file("nonexistent.evt") + " --mode none -o " +
                  dir.file("r.jsonl")) == 2);
}

TEST_CASE("config file fills defaults but flags win") {
    TempDir dir;
    write_file(dir.file("spec.json"), kTinySpec);
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " -o " + dir.file("s.evt")) ==
            0);
    write_file(dir.file("cfg.json"), R"({"mode": "abs", "size": 40, "population": 25})");

    REQUIRE(run_cli("run -i " + dir.file("s.evt") + " --config " + dir.file("cfg.json") +
                    " -o " + dir.file("a.jsonl")) == 0);
    std::ifstream in(dir.file("a.jsonl"));
    auto doc = ddca::read_report_jsonl(in);
    CHECK(doc.meta.mode == "abs");
    CHECK(doc.meta.segment_size == 40);
    CHECK(doc.meta.population_size == 25);

    REQUIRE(run_cli("run -i " + dir.file("s.evt") + " --config " + dir.file("cfg.json") +
                    " --size 15 -o " + dir.file("b.jsonl")) == 0);
    std::ifstream in2(dir.file("b.jsonl"));
    doc = ddca::read_report_jsonl(in2);
    CHECK(doc.meta.segment_size == 15); // explicit flag beats the file
}

namespace {

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

} // namespace

TEST_CASE("sweep writes per-size reports plus a summary") {
    TempDir dir;
    write_file(dir.file("spec.json"), kTinySpec);
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " -o " + dir.file("s.evt")) ==
            0);
    REQUIRE(run_cli("sweep -i " + dir.file("s.evt") +
                    " --mode abs --sizes 30,100,300,1000,3000 -o " + dir.file("sw")) == 0);
    for (const char* name : {"sw.abs30.jsonl", "sw.abs100.jsonl", "sw.abs300.jsonl",
                             "sw.abs1000.jsonl", "sw.abs3000.jsonl"}) {
        CHECK(fs::exists(dir.file(name)));
    }
    CHECK(fs::exists(dir.file("sw.summary.txt")));
    const std::string summary = slurp(dir.file("sw.summary.txt"));
    CHECK(summary.find("scan") != std::string::npos);
    CHECK(summary.find("web") != std::string::npos);
    // Five sizes, both types present throughout: one summary row each.
    CHECK(count_lines(slurp(dir.file("sw.summary.jsonl"))) == 10);

    // A single size degenerates to one row per type.
    REQUIRE(run_cli("sweep -i " + dir.file("s.evt") + " --mode tbs --sizes 10 -o " +
                    dir.file("one")) == 0);
    CHECK(fs::exists(dir.file("one.tbs10.jsonl")));
    CHECK(count_lines(slurp(dir.file("one.summary.jsonl"))) == 2);

    // Sweeping in mode none makes no sense.
    CHECK(run_cli("sweep -i " + dir.file("s.evt") + " --mode none --sizes 10 -o " +
                  dir.file("x")) == 1);
}

TEST_CASE("compare renders grids from reports against the baseline") {
    TempDir dir;
    write_file(dir.file("spec.json"), kTinySpec);
    REQUIRE(run_cli("generate --spec " + dir.file("spec.json") + " -o " + dir.file("s.evt")) ==
            0);
    REQUIRE(run_cli("run -i " + dir.file("s.evt") + " --mode none -o " + dir.file("base.jsonl")) ==
            0);
    REQUIRE(run_cli("sweep -i " + dir.file("s.evt") + " --mode abs --sizes 30,100 -o " +
                    dir.file("sw")) == 0);

    const std::string directions = " --direction scan=greater,web=less";
    REQUIRE(run_cli("compare --baseline " + dir.file("base.jsonl") + " --reports " +
                    dir.file("sw.abs30.jsonl") + " " + dir.file("sw.abs100.jsonl") +
                    " --labels " + dir.file("s.labels") + directions + " -o " +
                    dir.file("cmp.txt")) == 0);
    const std::string text = slurp(dir.file("cmp.txt"));
    CHECK(text.find("scan") != std::string::npos);
    CHECK(text.find("[anomalous]") != std::string::npos);
    CHECK(text.find("Two-sample") != std::string::npos);
    CHECK(text.find("One-sample") != std::string::npos);

    REQUIRE(run_cli("compare --baseline " + dir.file("base.jsonl") + " --reports " +
                    dir.file("sw.abs30.jsonl") + directions + " --format jsonl -o " +
                    dir.file("cmp.jsonl")) == 0);
    CHECK(slurp(dir.file("cmp.jsonl")).find("\"kind\":\"one_sample_one_sided\"") !=
          std::string::npos);

    // Missing direction for a type under test is a config error.
    CHECK(run_cli("compare --baseline " + dir.file("base.jsonl") + " --reports " +
                  dir.file("sw.abs30.jsonl") + " --direction scan=greater") == 1);

    // A segmented report cannot serve as the baseline.
    CHECK(run_cli("compare --baseline " + dir.file("sw.abs30.jsonl") + " --reports " +
                  dir.file("sw.abs100.jsonl") + directions) == 1);

    // A single-segment run compared against itself: every cell has too few
    // segments and renders as n/a.
    REQUIRE(run_cli("run -i " + dir.file("s.evt") + " --mode abs --size 1000000 -o " +
                    dir.file("single.jsonl")) == 0);
    REQUIRE(run_cli("compare --baseline " + dir.file("single.jsonl") + " --reports " +
                    dir.file("single.jsonl") + directions + " -o " + dir.file("self.txt")) == 0);
    CHECK(slurp(dir.file("self.txt")).find("n/a") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("run") == 1); // missing required flags
    TempDir dir;
    CHECK(run_cli("generate -o " + dir.file("x.evt")) == 1); // no spec source
}
