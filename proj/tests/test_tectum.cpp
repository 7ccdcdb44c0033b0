#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "webca/tectum.hpp"

using namespace webca;

namespace {

maps::MapActivity act(maps::SegmentId seg, long tick, std::vector<double> a) {
    maps::MapActivity m;
    m.segment = seg;
    m.tick = tick;
    m.activity = std::move(a);
    return m;
}

// Synthetic linear problem: random full-rank features with the label an exact
// affine function of them.
std::vector<tectum::TrainingSample> linear_samples(int n, int p, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(p);
    for (auto& v : w) v = u(eng);
    const double b = u(eng);
    std::vector<tectum::TrainingSample> samples;
    for (int i = 0; i < n; ++i) {
        tectum::TrainingSample s;
        s.features.tick = i;
        s.features.values.resize(p);
        double pos = b;
        for (int j = 0; j < p; ++j) {
            s.features.values[j] = u(eng);
            pos += w[j] * s.features.values[j];
        }
        s.position = {pos};
        samples.push_back(s);
    }
    return samples;
}

}  // namespace

TEST_CASE("assemble_features") {
    const auto cms = act(maps::SegmentId::CMS, 5, std::vector<double>(64, 0.0));
    const auto cls = act(maps::SegmentId::CLS, 5, std::vector<double>(32, 0.0));
    const auto ls = act(maps::SegmentId::LS, 5, std::vector<double>(16, 0.0));

    SUBCASE("zero in, zero out, length 115") {
        const auto f = tectum::assemble_features(cms, cls, ls, {0.0, 0.0, 0.0});
        CHECK(f.values.size() == 115);
        for (double v : f.values) CHECK(v == 0.0);
    }
    SUBCASE("segment order is CMS, CLS, LS, then burst rates") {
        auto c2 = cms;
        c2.activity[0] = 1.0;
        auto l2 = ls;
        l2.activity[15] = 3.0;
        const auto f = tectum::assemble_features(c2, cls, l2, {0.1, 0.2, 0.3});
        CHECK(f.values[0] == 1.0);
        CHECK(f.values[111] == 3.0);
        CHECK(f.values[112] == 0.1);
        CHECK(f.values[114] == 0.3);
    }
    SUBCASE("tick and segment-order mismatches are rejected") {
        auto late = cls;
        late.tick = 6;
        CHECK_THROWS_AS(tectum::assemble_features(cms, late, ls, {0, 0, 0}), TickMismatch);
        CHECK_THROWS_AS(tectum::assemble_features(cms, ls, cls, {0, 0, 0}), TickMismatch);
    }
}

TEST_CASE("fit_decoder") {
    std::mt19937_64 eng(17);
    SUBCASE("exact linear recovery at lambda 0") {
        const auto samples = linear_samples(40, 6, eng);
        const auto d = tectum::fit_decoder(samples, 0.0);
        for (const auto& s : samples) {
            const auto out = tectum::decode_position(d, s.features);
            CHECK(std::abs(out.position[0] - s.position[0]) < 1e-8);
        }
    }
    SUBCASE("huge lambda shrinks weights toward the bias") {
        const auto samples = linear_samples(40, 6, eng);
        const auto d = tectum::fit_decoder(samples, 1e12);
        double mean = 0.0;
        for (const auto& s : samples) mean += s.position[0];
        mean /= samples.size();
        for (double w : d.weights[0]) CHECK(std::abs(w) < 1e-6);
        tectum::FeatureVector f = samples[0].features;
        CHECK(tectum::decode_position(d, f).position[0] == doctest::Approx(mean).epsilon(1e-3));
    }
    SUBCASE("deterministic refit") {
        const auto samples = linear_samples(30, 8, eng);
        const auto d1 = tectum::fit_decoder(samples, 1e-6);
        const auto d2 = tectum::fit_decoder(samples, 1e-6);
        for (size_t j = 0; j < d1.weights[0].size(); ++j)
            CHECK(d1.weights[0][j] == d2.weights[0][j]);
        CHECK(d1.bias[0] == d2.bias[0]);
    }
    SUBCASE("rank deficiency at lambda 0 is an error") {
        // Two duplicated feature columns from one sample repeated.
        std::vector<tectum::TrainingSample> samples(3);
        for (int i = 0; i < 3; ++i) {
            samples[i].features.values = {1.0, 1.0};
            samples[i].position = {double(i)};
        }
        CHECK_THROWS_AS(tectum::fit_decoder(samples, 0.0), SingularSystem);
    }
    SUBCASE("needs at least two samples") {
        std::vector<tectum::TrainingSample> one(1);
        one[0].features.values = {1.0};
        one[0].position = {0.0};
        CHECK_THROWS_AS(tectum::fit_decoder(one, 1e-6), SingularSystem);
    }
}

TEST_CASE("decode_position") {
    std::mt19937_64 eng(23);
    const auto samples = linear_samples(25, 5, eng);
    const auto d = tectum::fit_decoder(samples, 1e-9);

    SUBCASE("zero features decode to the bias") {
        tectum::FeatureVector f;
        f.values.assign(5, 0.0);
        CHECK(tectum::decode_position(d, f).position[0] == doctest::Approx(d.bias[0]));
    }
    SUBCASE("confidence bounded and higher near the training mean") {
        tectum::FeatureVector mean;
        mean.values = d.feature_mean;
        tectum::FeatureVector far;
        far.values.assign(5, 1e6);
        const double cm = tectum::decode_position(d, mean).confidence;
        const double cf = tectum::decode_position(d, far).confidence;
        CHECK(cm >= 0.0);
        CHECK(cm <= 1.0);
        CHECK(cm > cf);
    }
    SUBCASE("untrained decoder refuses") {
        tectum::Decoder u;
        tectum::FeatureVector f;
        CHECK_THROWS_AS(tectum::decode_position(u, f), Untrained);
    }
}

TEST_CASE("decoder persistence round-trips") {
    std::mt19937_64 eng(29);
    const auto samples = linear_samples(25, 5, eng);
    const auto d = tectum::fit_decoder(samples, 1e-6);
    const std::string path = "decoder_roundtrip_test.txt";
    tectum::save_decoder(d, path);
    const auto d2 = tectum::load_decoder(path);
    std::remove(path.c_str());
    for (size_t j = 0; j < d.weights[0].size(); ++j)
        CHECK(d2.weights[0][j] == doctest::Approx(d.weights[0][j]).epsilon(1e-15));
    CHECK(d2.bias[0] == doctest::Approx(d.bias[0]).epsilon(1e-15));
    CHECK(d2.novelty_scale == doctest::Approx(d.novelty_scale).epsilon(1e-15));
}

TEST_CASE("classify_event rule table") {
    tectum::ClassifierThresholds thr{0.02, 0.02, 0.02};
    tectum::ClassifierInput in;

    SUBCASE("no bursts, quiet world -> Quiet") {
        CHECK(tectum::classify_event(in, thr) == tectum::EventKind::Quiet);
    }
    SUBCASE("CLS bursts dominate everything") {
        in.cls_burst_rate = 0.5;
        in.cms_burst_rate = 0.5;
        in.self_eod_on = true;
        CHECK(tectum::classify_event(in, thr) == tectum::EventKind::ConspecificChirp);
    }
    SUBCASE("CMS bursts with the EOD on -> ObjectEcho") {
        in.cms_burst_rate = 0.5;
        in.self_eod_on = true;
        CHECK(tectum::classify_event(in, thr) == tectum::EventKind::ObjectEcho);
    }
    SUBCASE("CMS bursts with the EOD off are not an echo") {
        in.cms_burst_rate = 0.5;
        in.self_eod_on = false;
        in.mean_envelope_v = 0.5;
        CHECK(tectum::classify_event(in, thr) == tectum::EventKind::ExternalLowFreqField);
    }
    SUBCASE("envelope below floor -> Quiet") {
        in.self_eod_on = false;
        in.mean_envelope_v = 0.01;
        CHECK(tectum::classify_event(in, thr) == tectum::EventKind::Quiet);
    }
}
