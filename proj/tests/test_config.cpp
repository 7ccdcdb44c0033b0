#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "webca/config.hpp"

using namespace webca;
namespace fs = std::filesystem;

namespace {

fs::path configs_dir() { return fs::path(__FILE__).parent_path().parent_path() / "configs"; }

nlohmann::json reference_json() {
    std::ifstream in(configs_dir() / "reference.json");
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return j;
}

harness::ScenarioConfig parse(const nlohmann::json& j) { return harness::parse_config(j.dump()); }

}  // namespace

TEST_CASE("shipped configs load and validate") {
    for (const char* name :
         {"reference.json", "hyperacuity.json", "object_only.json", "chirp_only.json",
          "passive_low.json"}) {
        CAPTURE(name);
        CHECK_NOTHROW(harness::load_config((configs_dir() / name).string()));
    }
}

TEST_CASE("reference config carries the documented defaults") {
    const auto cfg = harness::load_config((configs_dir() / "reference.json").string());
    CHECK(cfg.sensor_count == 20);
    CHECK(cfg.sensor_pitch_m == 0.01);
    CHECK(cfg.tick_samples == 256);
    CHECK(cfg.cms.neuron_count == 64);
    CHECK(cfg.cls.neuron_count == 32);
    CHECK(cfg.ls.neuron_count == 16);
    CHECK(cfg.cls_bands.high.first == 200.0);
    CHECK(cfg.cls_bands.high.second == 400.0);
    CHECK(cfg.rules.size() == 4);
    CHECK(cfg.policies.size() == 3);
}

TEST_CASE("violations are caught at load with the invariant named") {
    auto j = reference_json();

    SUBCASE("size ordering") {
        j["maps"]["ls"]["neurons"] = 48;
        try {
            parse(j);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("CMS") != std::string::npos);
        }
    }
    SUBCASE("missing policy entry") {
        j["pallium"]["policies"].erase("communication");
        CHECK_THROWS_AS(parse(j), MissingPolicy);
    }
    SUBCASE("rule table gap") {
        j["pallium"]["rules"] = nlohmann::json::array({j["pallium"]["rules"][0]});
        CHECK_THROWS_AS(parse(j), ValidationError);
    }
    SUBCASE("tick length must be a power of two") {
        j["tick_samples"] = 300;
        CHECK_THROWS_AS(parse(j), ValidationError);
    }
    SUBCASE("band above Nyquist") {
        j["maps"]["ls"]["band_hz"] = {80, 11000};
        CHECK_THROWS_AS(parse(j), ValidationError);
    }
    SUBCASE("gamma out of range") {
        j["pallium"]["gamma"] = 1.0;
        CHECK_THROWS_AS(parse(j), ValidationError);
    }
    SUBCASE("classifier window shorter than the burst window") {
        j["tectum"]["classifier"]["window_ticks"] = 2;
        CHECK_THROWS_AS(parse(j), ValidationError);
    }
    SUBCASE("object velocity list kept consistent") {
        j["env"]["objects"][0].erase("radius_m");
        CHECK_THROWS_AS(parse(j), ValidationError);
    }
}

TEST_CASE("parse errors are reported as such") {
    CHECK_THROWS_AS(harness::parse_config("{ not json"), ValidationError);
    CHECK_THROWS_AS(harness::load_config("/nonexistent/config.json"), ValidationError);
}
