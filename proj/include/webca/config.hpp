#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "webca/env.hpp"
#include "webca/maps.hpp"
#include "webca/pallium.hpp"
#include "webca/sensing.hpp"
#include "webca/tectum.hpp"

namespace webca::harness {

// Position-sweep training spec for the decoder: a static object is placed on a
// track parallel to the array, features are taken after a fixed settling
// period, labels are the object's along-body coordinate.
struct TrainSpec {
    double lateral_m = 0.03;   // track offset from the array
    double radius_m = 0.01;
    double contrast = 0.8;
    int settle_ticks = 3;
    int avg_ticks = 1;         // feature vectors averaged over this many ticks
    int train_reps = 1;        // noisy feature replicates per grid position
    int grid_margin_pitches = 1;  // training grid extension beyond the array ends
    int eval_count = 200;      // held-out sweep length at pitch/10 spacing
    // Max per-channel contribution spread (meters) enforced during fitting so
    // the readout stays tolerant to single-channel lesions; <= 0 disables.
    double contribution_cap_m = 0.0;
};

struct ScenarioConfig {
    double sample_rate_hz = 20000.0;
    int tick_samples = 256;
    double duration_s = 1.0;
    std::uint64_t seed = 0;

    // env
    env::Scene scene;
    int sensor_count = 20;
    double sensor_pitch_m = 0.01;
    std::optional<double> noise_snr_db;

    // sensing
    sensing::WaveletSpec wavelet;
    std::string receptor_pattern = "alternate";  // or "all_amplitude", "all_transient"
    sensing::CodingScheme amplitude_scheme = sensing::CodingScheme::EnvelopeRate;
    sensing::CodingScheme transient_scheme = sensing::CodingScheme::TransientEvent;
    double transient_threshold_v = 0.3;
    int envelope_window = 256;
    bool self_eod_initial = true;

    // maps
    maps::MapConfig cms, cls, ls;
    maps::ClsBands cls_bands{};
    maps::BurstCoderParams burst;

    // tectum
    double ridge_lambda = 1e-6;
    std::optional<TrainSpec> train;
    tectum::ClassifierThresholds classifier;
    int classifier_window_ticks = 8;
    int classifier_warmup_ticks = 0;  // ticks reported Quiet while filters settle

    // pallium
    double gamma = 0.9;
    long min_dwell_ticks = 10;
    pallium::Context initial_context = pallium::Context::ActiveElectrolocation;
    std::vector<pallium::Rule> rules;
    pallium::PolicyTable policies;
};

// Parses and fully validates; every invariant violation is reported at load
// time with the violated constraint named.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);
void validate(const ScenarioConfig& cfg);

}  // namespace webca::harness
