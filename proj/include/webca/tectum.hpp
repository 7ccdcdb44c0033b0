#pragma once

#include <string>
#include <vector>

#include "webca/maps.hpp"

namespace webca::tectum {

enum class EventKind { ObjectEcho, ExternalLowFreqField, ConspecificChirp, Quiet };
std::string event_kind_name(EventKind k);

struct FeatureVector {
    long tick = 0;
    std::vector<double> values;  // CMS | CLS | LS activities, then 3 burst rates
};

struct Estimate {
    EventKind kind = EventKind::Quiet;
    double position_x = 0.0;  // valid when kind == ObjectEcho
    double position_y = 0.0;
    double confidence = 0.0;  // [0,1], heuristic novelty score
};

struct Decoder {
    std::vector<std::vector<double>> weights;  // output dims x feature length
    std::vector<double> bias;
    double ridge_lambda = 0.0;
    bool trained = false;
    // Novelty reference: training-feature mean and mean distance to it.
    std::vector<double> feature_mean;
    double novelty_scale = 1.0;
};

// Burst rates are events per window tick, one scalar per segment.
FeatureVector assemble_features(const maps::MapActivity& cms, const maps::MapActivity& cls,
                                const maps::MapActivity& ls,
                                const std::vector<double>& burst_rates);

struct TrainingSample {
    FeatureVector features;
    std::vector<double> position;  // label, any fixed dimension
};

// Ridge least squares: min sum |W f + b - pos|^2 + lambda |W|^2 (bias
// unpenalized). Deterministic for a fixed sample order.
Decoder fit_decoder(const std::vector<TrainingSample>& samples, double lambda);

struct DecodedPosition {
    std::vector<double> position;
    double confidence = 0.0;
};

DecodedPosition decode_position(const Decoder& decoder, const FeatureVector& f);

void save_decoder(const Decoder& d, const std::string& path);
Decoder load_decoder(const std::string& path);

struct ClassifierThresholds {
    double cls_burst_rate = 0.0;  // per-neuron events per tick
    double cms_burst_rate = 0.0;
    double envelope_floor_v = 0.0;
};

struct ClassifierInput {
    double cms_burst_rate = 0.0;  // per-neuron events per tick over the window
    double cls_burst_rate = 0.0;
    double ls_burst_rate = 0.0;
    double mean_envelope_v = 0.0;  // mean amplitude-receptor envelope
    bool self_eod_on = true;
};

// Rule table; ties broken ConspecificChirp > ObjectEcho > ExternalLowFreqField.
EventKind classify_event(const ClassifierInput& in, const ClassifierThresholds& thr);

}  // namespace webca::tectum
