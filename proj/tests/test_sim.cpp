#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "webca/config.hpp"
#include "webca/sim.hpp"

using namespace webca;
namespace fs = std::filesystem;

namespace {

harness::ScenarioConfig short_reference(double duration_s, bool with_train) {
    const fs::path path = fs::path(__FILE__).parent_path().parent_path() / "configs" /
                          "reference.json";
    std::ifstream in(path);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    j["duration_s"] = duration_s;
    if (!with_train) j["tectum"]["train"] = nullptr;
    return harness::parse_config(j.dump());
}

std::string csv_of(const harness::RunRecord& rec) {
    const std::string path = "sim_test_run.csv";
    harness::write_run_csv(rec, path);
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    fs::remove(path);
    return ss.str();
}

}  // namespace

TEST_CASE("gaussian rng is deterministic per seed") {
    harness::GaussianRng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.next();
        if (va != b.next()) all_equal = false;
        if (va != c.next()) any_diff = true;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("zero-duration scenario yields an empty record") {
    auto cfg = short_reference(0.0, false);
    const auto [rec, summary] = harness::run_scenario(cfg);
    CHECK(rec.rows.empty());
    CHECK(rec.event_log.empty());
    CHECK(summary.class_counts.empty());
}

TEST_CASE("run_scenario is deterministic") {
    auto cfg = short_reference(0.3, false);
    const auto [r1, s1] = harness::run_scenario(cfg);
    const auto [r2, s2] = harness::run_scenario(cfg);
    CHECK(csv_of(r1) == csv_of(r2));
    CHECK(r1.event_log == r2.event_log);
}

TEST_CASE("run record shape and warmup") {
    auto cfg = short_reference(0.3, false);
    const auto [rec, summary] = harness::run_scenario(cfg);
    const long expected = std::lround(cfg.duration_s * cfg.sample_rate_hz / cfg.tick_samples);
    REQUIRE(long(rec.rows.size()) == expected);
    for (long t = 0; t < expected; ++t) CHECK(rec.rows[t].tick == t);
    for (long t = 0; t < std::min<long>(expected, cfg.classifier_warmup_ticks); ++t) {
        CHECK(rec.rows[t].event == tectum::EventKind::Quiet);
        CHECK(rec.rows[t].context == cfg.initial_context);
    }
    long total = 0;
    for (const auto& [k, v] : summary.class_counts) total += v;
    CHECK(total == expected);
}

TEST_CASE("training grid and evaluation sweep geometry") {
    auto cfg = short_reference(0.3, true);
    const auto grid = harness::train_grid_positions(cfg);
    REQUIRE(grid.size() >= 2);
    for (size_t i = 1; i < grid.size(); ++i)
        CHECK(grid[i] - grid[i - 1] == doctest::Approx(cfg.sensor_pitch_m));
    const auto sweep = harness::eval_sweep_positions(cfg);
    CHECK(long(sweep.size()) == cfg.train->eval_count);
    for (size_t i = 1; i < sweep.size(); ++i)
        CHECK(sweep[i] - sweep[i - 1] == doctest::Approx(cfg.sensor_pitch_m / 10.0));
}

TEST_CASE("probe features are reproducible and sized for the decoder") {
    auto cfg = short_reference(0.3, true);
    const auto ref = harness::probe_reference(cfg);
    CHECK(ref.values.size() ==
          size_t(cfg.cms.neuron_count + cfg.cls.neuron_count + cfg.ls.neuron_count + 3));
    const auto f1 = harness::features_for_object(cfg, 0.01, 7, &ref);
    const auto f2 = harness::features_for_object(cfg, 0.01, 7, &ref);
    CHECK(f1.values == f2.values);
}

TEST_CASE("output files round-trip") {
    auto cfg = short_reference(0.15, false);
    const auto [rec, summary] = harness::run_scenario(cfg);
    const fs::path dir = fs::temp_directory_path() / "webca_sim_test";
    fs::create_directories(dir);
    harness::write_run_csv(rec, (dir / "run.csv").string());
    harness::write_events_log(rec, (dir / "events.log").string());
    harness::write_summary_json(summary, (dir / "summary.json").string());

    std::ifstream csv(dir / "run.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "tick,time_s,context,decoded_x_m,decoded_y_m,true_x_m,true_y_m,event,cms_bursts,"
          "cls_bursts,ls_bursts");
    long lines = 0;
    for (std::string row; std::getline(csv, row);) ++lines;
    CHECK(lines == long(rec.rows.size()));

    std::ifstream js(dir / "summary.json");
    nlohmann::json j;
    js >> j;
    CHECK(j.contains("class_counts"));
    fs::remove_all(dir);
}
