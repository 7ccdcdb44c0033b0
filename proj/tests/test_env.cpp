#include <doctest.h>

#include <cmath>
#include <vector>

#include "webca/env.hpp"

using namespace webca;

namespace {

env::Scene scene_with_object(env::ObjectSpec obj) {
    env::Scene s;
    s.self_source = {800.0, 1.0, 0.0, env::EodKind::SineWave};
    s.objects.push_back(obj);
    s.object_velocities.push_back({0.0, 0.0});
    return s;
}

}  // namespace

TEST_CASE("eod_waveform sine basics") {
    env::EodSource s{800.0, 1.0, 0.0, env::EodKind::SineWave};
    CHECK(env::eod_waveform(s, 0.0) == doctest::Approx(0.0));
    CHECK(env::eod_waveform(s, 1.0 / 3200.0) == doctest::Approx(1.0));  // quarter period
    s.amplitude_v = 0.0;
    CHECK(env::eod_waveform(s, 0.123) == 0.0);
}

TEST_CASE("eod_waveform biphasic pulse lobes") {
    env::EodSource s{100.0, 2.0, 0.0, env::EodKind::BiphasicPulse};
    const double T = 1.0 / 100.0;
    CHECK(env::eod_waveform(s, 0.05 * T) == doctest::Approx(2.0));
    CHECK(env::eod_waveform(s, 0.15 * T) == doctest::Approx(-2.0));
    CHECK(env::eod_waveform(s, 0.5 * T) == doctest::Approx(0.0));
    CHECK(env::eod_waveform(s, 1.05 * T) == doctest::Approx(2.0));  // repeats
}

TEST_CASE("object_perturbation follows the d^-4 law") {
    env::ObjectSpec obj;
    obj.position = {0.0, 0.0};
    obj.radius_m = 0.01;
    obj.contrast = 0.5;

    SUBCASE("zero contrast gives zero") {
        obj.contrast = 0.0;
        CHECK(env::object_perturbation(obj, {0.1, 0.0}, 1.0) == 0.0);
    }
    SUBCASE("hand-computed value at d = 0.1 m") {
        // 0.5 * (0.01)^3 * 1 / (0.1)^4 = 5e-3
        CHECK(env::object_perturbation(obj, {0.1, 0.0}, 1.0) == doctest::Approx(5e-3).epsilon(1e-12));
    }
    SUBCASE("doubling distance scales by 1/16") {
        const double p1 = env::object_perturbation(obj, {0.1, 0.0}, 1.0);
        const double p2 = env::object_perturbation(obj, {0.2, 0.0}, 1.0);
        CHECK(p2 == doctest::Approx(p1 / 16.0).epsilon(1e-12));
    }
    SUBCASE("relative d^-4 error below 1e-9 over 5..50 cm") {
        const double ref = env::object_perturbation(obj, {0.05, 0.0}, 1.0);
        for (double d = 0.05; d <= 0.5; d += 0.005) {
            const double p = env::object_perturbation(obj, {d, 0.0}, 1.0);
            const double expected = ref * std::pow(0.05 / d, 4.0);
            CHECK(std::abs(p - expected) / std::abs(expected) < 1e-9);
        }
    }
    SUBCASE("interpenetration rejected") {
        CHECK_THROWS_AS(env::object_perturbation(obj, {0.005, 0.0}, 1.0), DegenerateGeometry);
    }
}

TEST_CASE("render_frame is linear in the object set") {
    const auto geom = env::make_linear_array(20, 0.01);
    env::ObjectSpec a;
    a.position = {0.03, 0.02};
    a.radius_m = 0.01;
    a.contrast = 0.6;
    env::ObjectSpec b;
    b.position = {-0.04, 0.05};
    b.radius_m = 0.008;
    b.contrast = -0.4;

    env::Scene sa = scene_with_object(a);
    env::Scene sb = scene_with_object(b);
    env::Scene sab = scene_with_object(a);
    sab.objects.push_back(b);
    sab.object_velocities.push_back({0.0, 0.0});
    env::Scene base = sa;
    base.objects.clear();
    base.object_velocities.clear();

    const double t = 0.37e-3;
    const auto fa = env::render_frame(sa, geom, t);
    const auto fb = env::render_frame(sb, geom, t);
    const auto fab = env::render_frame(sab, geom, t);
    const auto f0 = env::render_frame(base, geom, t);
    for (int i = 0; i < geom.count; ++i) {
        const double sum = fa.samples[i] + fb.samples[i] - f0.samples[i];
        CHECK(std::abs(fab.samples[i] - sum) < 1e-12);
    }
}

TEST_CASE("render_frame trivia") {
    const auto geom = env::make_linear_array(4, 0.01);
    SUBCASE("silent scene renders zeros") {
        env::Scene s;
        s.self_source.amplitude_v = 0.0;
        const auto f = env::render_frame(s, geom, 0.5);
        for (double v : f.samples) CHECK(v == 0.0);
    }
    SUBCASE("nearest sensor sees the largest |perturbation|") {
        env::ObjectSpec obj;
        obj.position = {geom.sensor_positions[1].x, 0.02};
        obj.radius_m = 0.005;
        obj.contrast = 0.8;
        env::Scene with = scene_with_object(obj);
        env::Scene without = with;
        without.objects.clear();
        without.object_velocities.clear();
        const double t = 1.0 / 3200.0;  // carrier peak
        const auto fw = env::render_frame(with, geom, t);
        const auto f0 = env::render_frame(without, geom, t);
        std::vector<double> pert(geom.count);
        for (int i = 0; i < geom.count; ++i) pert[i] = std::abs(fw.samples[i] - f0.samples[i]);
        for (int i = 0; i < geom.count; ++i) CHECK(pert[1] >= pert[i]);
    }
    SUBCASE("determinism") {
        env::Scene s = scene_with_object({{0.01, 0.03}, 0.005, 0.5});
        const auto f1 = env::render_frame(s, geom, 0.123);
        const auto f2 = env::render_frame(s, geom, 0.123);
        for (int i = 0; i < geom.count; ++i) CHECK(f1.samples[i] == f2.samples[i]);
    }
}

TEST_CASE("step_scene advances positions linearly") {
    env::Scene s = scene_with_object({{0.0, 0.0}, 0.01, 0.5});
    SUBCASE("zero velocity is the identity") {
        const auto next = env::step_scene(s, 0.01);
        CHECK(next.objects[0].position.x == 0.0);
        CHECK(next.objects[0].position.y == 0.0);
    }
    SUBCASE("velocity (1,0), dt 0.01 shifts x by 0.01") {
        s.object_velocities[0] = {1.0, 0.0};
        const auto next = env::step_scene(s, 0.01);
        CHECK(next.objects[0].position.x == doctest::Approx(0.01));
    }
    SUBCASE("two half steps equal one full step") {
        s.object_velocities[0] = {0.3, -0.2};
        const auto two = env::step_scene(env::step_scene(s, 0.01), 0.01);
        const auto one = env::step_scene(s, 0.02);
        CHECK(two.objects[0].position.x == doctest::Approx(one.objects[0].position.x));
        CHECK(two.objects[0].position.y == doctest::Approx(one.objects[0].position.y));
    }
}

TEST_CASE("chirp windows leave the carrier untouched outside them") {
    env::EodSource s{800.0, 1.0, 0.0, env::EodKind::SineWave};
    std::vector<env::Chirp> chirps = {{0.5, 0.1, 60.0}};
    for (double t = 0.0; t < 0.5; t += 0.013)
        CHECK(env::chirped_waveform(s, chirps, t) == doctest::Approx(env::eod_waveform(s, t)));
    // After the chirp the accumulated extra cycles are exactly excursion*duration.
    const double extra = 60.0 * 0.1;
    CHECK(extra == doctest::Approx(std::round(extra)));  // chosen integer for this test
    CHECK(env::chirped_waveform(s, chirps, 0.75) == doctest::Approx(env::eod_waveform(s, 0.75)));
}

TEST_CASE("geometry and scene validation") {
    CHECK_THROWS_AS(env::make_linear_array(1, 0.01), ValidationError);
    CHECK_THROWS_AS(env::make_linear_array(4, 0.0), ValidationError);
    env::Scene s;
    s.objects.push_back({{0.0, 0.0}, 0.01, 0.5});
    CHECK_THROWS_AS(env::validate(s), ValidationError);  // missing velocity
    s.object_velocities.push_back({0.0, 0.0});
    CHECK_NOTHROW(env::validate(s));
    s.objects[0].contrast = 1.5;
    CHECK_THROWS_AS(env::validate(s), ValidationError);
}
