#include "doctest.h"

#include <map>
#include <string>
#include <vector>

#include "ddca/engine.hpp"
#include "ddca/errors.hpp"
#include "reference_dca.hpp"
#include "test_helpers.hpp"

using namespace ddca;

namespace {

PopulationConfig small_config(std::uint32_t size, double step) {
    PopulationConfig cfg;
    cfg.population_size = size;
    cfg.threshold_step = step;
    return cfg;
}

std::uint64_t total_record_antigens(const std::vector<ProcessedRecord>& records) {
    std::uint64_t n = 0;
    for (const auto& rec : records) n += rec.total_antigens();
    return n;
}

} // namespace

TEST_CASE("population initialisation assigns stepped thresholds") {
    DcaEngine engine(small_config(100, 12.0));
    REQUIRE(engine.cells().size() == 100);
    CHECK(engine.cells().front().index == 1);
    CHECK(engine.cells().front().migration_threshold == 12.0);
    CHECK(engine.cells().front().lifespan == 12.0);
    CHECK(engine.cells().back().index == 100);
    CHECK(engine.cells().back().migration_threshold == 1200.0);

    DcaEngine single(small_config(1, 5.0));
    REQUIRE(single.cells().size() == 1);
    CHECK(single.cells()[0].migration_threshold == 5.0);

    DcaEngine three(small_config(3, 2.0));
    CHECK(three.cells()[0].migration_threshold == 2.0);
    CHECK(three.cells()[1].migration_threshold == 4.0);
    CHECK(three.cells()[2].migration_threshold == 6.0);

    CHECK(engine.antigens_ingested() == 0);
    for (const auto& cell : engine.cells()) {
        CHECK(cell.antigen_profile.empty());
        CHECK(cell.sum_k == 0.0);
    }
}

TEST_CASE("invalid population configs are rejected") {
    CHECK_THROWS_AS(DcaEngine(small_config(0, 12.0)), ConfigError);
    CHECK_THROWS_AS(DcaEngine(small_config(10, 0.0)), ConfigError);
    CHECK_THROWS_AS(DcaEngine(small_config(10, -3.0)), ConfigError);
    PopulationConfig bad = small_config(10, 12.0);
    bad.weights.k_safe = 1.0;
    CHECK_THROWS_AS(DcaEngine{bad}, ConfigError);
}

TEST_CASE("round-robin antigen assignment increments before the modulo") {
    DcaEngine engine(small_config(100, 12.0));
    engine.ingest_antigen({0, "x"});
    CHECK(engine.cells()[0].antigen_profile.at("x") == 1); // cell 1

    for (int i = 0; i < 98; ++i) engine.ingest_antigen({0, "x"});
    CHECK(engine.cells()[98].antigen_profile.at("x") == 1); // 99th -> cell 99
    CHECK(engine.cells()[99].antigen_profile.empty());

    engine.ingest_antigen({0, "x"}); // 100th -> cell 100
    CHECK(engine.cells()[99].antigen_profile.at("x") == 1);
    CHECK(engine.antigens_ingested() == 100);

    DcaEngine single(small_config(1, 5.0));
    for (int i = 0; i < 7; ++i) single.ingest_antigen({0, "y"});
    CHECK(single.cells()[0].antigen_profile.at("y") == 7);
}

TEST_CASE("empty antigen type is a data error") {
    DcaEngine engine(small_config(3, 2.0));
    CHECK_THROWS_AS(engine.ingest_antigen({0, ""}), DataError);
}

TEST_CASE("maturation bound is inclusive") {
    // threshold 12, csm exactly 12 -> lifespan 0 -> matures this tick
    PopulationConfig cfg = small_config(1, 12.0);
    DcaEngine engine(cfg);
    // pamp 3 -> csm 12, k 24 with default weights
    auto matured = engine.ingest_signal({0, 3.0, 0.0, 0.0});
    REQUIRE(matured.size() == 1);
    CHECK(matured[0].presented_at == 0);
    CHECK(matured[0].dc_index == 1);
    CHECK(matured[0].forced == false);
    CHECK(matured[0].sum_k == 24.0);
}

TEST_CASE("zero signal tick changes nothing") {
    DcaEngine engine(small_config(3, 2.0));
    auto matured = engine.ingest_signal({5, 0.0, 0.0, 0.0});
    CHECK(matured.empty());
    for (const auto& cell : engine.cells()) {
        CHECK(cell.lifespan == cell.migration_threshold);
        CHECK(cell.sum_k == 0.0);
    }
    CHECK(engine.current_tick() == 5);
}

TEST_CASE("two-tick maturation trace accumulates k and keeps the profile") {
    // Cell threshold 24, holding {A:3}; two ticks of (1,1,1) give csm 12
    // and k -1 each, so it matures on the second tick with sum_k -2.
    DcaEngine engine(small_config(1, 24.0));
    engine.ingest_antigen({0, "A"});
    engine.ingest_antigen({0, "A"});
    engine.ingest_antigen({0, "A"});
    auto m0 = engine.ingest_signal({0, 1.0, 1.0, 1.0});
    CHECK(m0.empty());
    CHECK(engine.cells()[0].lifespan == 12.0);
    auto m1 = engine.ingest_signal({1, 1.0, 1.0, 1.0});
    REQUIRE(m1.size() == 1);
    CHECK(m1[0].sum_k == -2.0);
    CHECK(m1[0].antigen_counts == std::map<std::string, std::uint64_t>{{"A", 3}});
    CHECK(m1[0].presented_at == 1);
}

TEST_CASE("cells reset to their own threshold after maturation") {
    DcaEngine engine(small_config(3, 10.0));
    engine.ingest_antigen({0, "A"});
    // pamp 5 -> csm 20: cells 1 (thr 10) and 2 (thr 20) mature.
    auto matured = engine.ingest_signal({0, 5.0, 0.0, 0.0});
    REQUIRE(matured.size() == 2);
    CHECK(matured[0].dc_index == 1);
    CHECK(matured[1].dc_index == 2);
    CHECK(engine.cells()[0].lifespan == 10.0);
    CHECK(engine.cells()[1].lifespan == 20.0);
    CHECK(engine.cells()[0].sum_k == 0.0);
    CHECK(engine.cells()[0].antigen_profile.empty());
    // Cell 3 keeps accumulating.
    CHECK(engine.cells()[2].lifespan == 10.0);
    CHECK(engine.cells()[2].sum_k == 40.0);
}

TEST_CASE("matured cell with no antigens still presents a record") {
    DcaEngine engine(small_config(1, 12.0));
    auto matured = engine.ingest_signal({0, 3.0, 0.0, 0.0});
    REQUIRE(matured.size() == 1);
    CHECK(matured[0].antigen_counts.empty());
}

TEST_CASE("signals must not go backwards") {
    DcaEngine engine(small_config(1, 12.0));
    engine.ingest_signal({5, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(engine.ingest_signal({4, 0.0, 0.0, 0.0}), StreamOrderError);
    CHECK_NOTHROW(engine.ingest_signal({5, 0.0, 0.0, 0.0}));
}

TEST_CASE("flush emits forced records for non-empty cells") {
    DcaEngine engine(small_config(2, 1000.0));
    for (int i = 0; i < 5; ++i) engine.ingest_antigen({0, "B"});
    engine.ingest_signal({3, 0.25, 0.0, 0.0}); // csm 1, k 2 per tick
    auto flushed = engine.flush();
    // Cell 1 got antigens 1,3,5; cell 2 got 2,4.
    REQUIRE(flushed.size() == 2);
    CHECK(flushed[0].dc_index == 1);
    CHECK(flushed[0].forced == true);
    CHECK(flushed[0].presented_at == 3);
    CHECK(flushed[0].sum_k == 2.0);
    CHECK(flushed[0].antigen_counts.at("B") == 3);
    CHECK(flushed[1].antigen_counts.at("B") == 2);
    // Cells were reset.
    for (const auto& cell : engine.cells()) {
        CHECK(cell.lifespan == cell.migration_threshold);
        CHECK(cell.antigen_profile.empty());
    }
}

TEST_CASE("flush with empty cells emits nothing") {
    DcaEngine engine(small_config(4, 12.0));
    CHECK(engine.flush().empty());
}

TEST_CASE("flush disabled reports dropped antigens instead") {
    PopulationConfig cfg = small_config(3, 1000.0);
    cfg.flush_at_end = false;
    DcaEngine engine(cfg);
    for (int i = 0; i < 7; ++i) engine.ingest_antigen({0, "C"});
    auto flushed = engine.flush();
    CHECK(flushed.empty());
    CHECK(engine.dropped_antigens() == 7);
}

TEST_CASE("antigen-only stream flushes with zero k") {
    std::vector<Event> events;
    for (int i = 0; i < 10; ++i) events.push_back(AntigenEvent{static_cast<Tick>(i), "z"});
    auto result = run_stream(small_config(4, 12.0), events);
    REQUIRE(!result.records.empty());
    std::uint64_t total = 0;
    for (const auto& rec : result.records) {
        CHECK(rec.forced);
        CHECK(rec.sum_k == 0.0);
        total += rec.total_antigens();
    }
    CHECK(total == 10);
}

TEST_CASE("run_stream rejects disorder") {
    PopulationConfig cfg = small_config(2, 12.0);

    std::vector<Event> unsorted{SignalInstance{5, 1, 1, 1}, AntigenEvent{4, "a"}};
    CHECK_THROWS_AS(run_stream(cfg, unsorted), StreamOrderError);

    std::vector<Event> antigen_after_signal{SignalInstance{5, 1, 1, 1}, AntigenEvent{5, "a"}};
    CHECK_THROWS_AS(run_stream(cfg, antigen_after_signal), StreamOrderError);

    // Antigen then signal at the same tick is the expected shape.
    std::vector<Event> fine{AntigenEvent{5, "a"}, SignalInstance{5, 1, 1, 1}};
    CHECK_NOTHROW(run_stream(cfg, fine));
}

TEST_CASE("empty stream yields no records") {
    auto result = run_stream(small_config(3, 12.0), {});
    CHECK(result.records.empty());
    CHECK(result.antigens_ingested == 0);
}

TEST_CASE("deterministic: identical input twice gives identical output") {
    const auto events = ddca::testing::random_stream(404, 500);
    const auto a = run_stream(small_config(10, 12.0), events);
    const auto b = run_stream(small_config(10, 12.0), events);
    CHECK(a.records == b.records);
}

TEST_CASE("conservation holds on random streams for every config") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        const auto events = ddca::testing::random_stream(seed, 300);
        std::uint64_t n_antigens = 0;
        for (const auto& ev : events) {
            if (std::holds_alternative<AntigenEvent>(ev)) ++n_antigens;
        }
        for (std::uint32_t size : {1u, 3u, 17u, 100u}) {
            auto result = run_stream(small_config(size, 12.0), events);
            CHECK(result.antigens_ingested == n_antigens);
            CHECK(total_record_antigens(result.records) == n_antigens);

            PopulationConfig no_flush = small_config(size, 12.0);
            no_flush.flush_at_end = false;
            auto result2 = run_stream(no_flush, events);
            CHECK(total_record_antigens(result2.records) + result2.dropped_antigens ==
                  n_antigens);
        }
    }
}

TEST_CASE("population size is constant throughout") {
    const auto events = ddca::testing::random_stream(77, 200);
    PopulationConfig cfg = small_config(7, 9.0);
    StreamRunner runner(cfg, [](ProcessedRecord&&) {});
    for (const auto& ev : events) {
        runner.push(ev);
        CHECK(runner.engine().cells().size() == 7);
    }
    runner.finish();
    CHECK(runner.engine().cells().size() == 7);
}

TEST_CASE("first maturation tick is monotone in cell index") {
    // Identical signals to all cells and monotone thresholds: a higher
    // indexed cell never matures strictly earlier from a fresh start.
    const auto events = ddca::testing::random_stream(88, 300, 0);
    PopulationConfig cfg = small_config(20, 12.0);
    std::map<std::uint32_t, Tick> first_maturation;
    StreamRunner runner(cfg, [&first_maturation](ProcessedRecord&& rec) {
        first_maturation.emplace(rec.dc_index, rec.presented_at);
    });
    for (const auto& ev : events) runner.push(ev);
    Tick previous = 0;
    for (std::uint32_t i = 1; i <= 20; ++i) {
        auto it = first_maturation.find(i);
        if (it == first_maturation.end()) break; // higher cells never matured
        CHECK(it->second >= previous);
        previous = it->second;
    }
}

TEST_CASE("engine matches the naive reference on random streams") {
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        const auto events = ddca::testing::random_stream(seed, 400);
        for (std::uint32_t size : {1u, 3u, 100u}) {
            PopulationConfig cfg = small_config(size, 12.0);
            const auto engine_records = run_stream(cfg, events).records;
            const auto reference_records = ddca::testing::reference_run(cfg, events);
            CHECK(engine_records == reference_records);
        }
    }
}
