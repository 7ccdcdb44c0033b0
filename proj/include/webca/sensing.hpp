#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "webca/env.hpp"
#include "webca/wavelet.hpp"

namespace webca::sensing {

enum class ReceptorKind { Amplitude, Transient };
enum class CodingScheme { EnvelopeRate, TransientEvent, WaveletCoefficients };

CodingScheme scheme_from_name(const std::string& name);
std::string scheme_name(CodingScheme s);

struct SensorState {
    env::SensorGeometry geometry;
    std::vector<ReceptorKind> kinds;  // one per sensor
    CodingScheme amplitude_scheme = CodingScheme::EnvelopeRate;
    CodingScheme transient_scheme = CodingScheme::TransientEvent;
    WaveletSpec wavelet;
    double transient_threshold_v = 0.0;  // > 0
    int envelope_window = 0;             // samples, >= 2
    bool self_eod_on = true;
};

void validate(const SensorState& s);

// Per-sensor payload, variant selected by the sensor's active scheme.
struct Payload {
    std::variant<double,                  // EnvelopeRate: RMS envelope
                 std::vector<int>,        // TransientEvent: sample indices
                 std::vector<double>>     // WaveletCoefficients
        value;
};

struct SensorReport {
    double time_s = 0.0;
    std::vector<CodingScheme> schemes;  // per sensor, the scheme the payload used
    std::vector<Payload> payloads;
};

// Command fields left as nullopt mean "no change".
struct TuningCommand {
    std::optional<WaveletFamily> wavelet_family;
    std::optional<CodingScheme> amplitude_scheme;
    std::optional<CodingScheme> transient_scheme;
    std::optional<std::pair<double, double>> cls_band_hz;  // consumed by the map stage
    std::optional<bool> self_eod_on;
    bool empty() const {
        return !wavelet_family && !amplitude_scheme && !transient_scheme && !cls_band_hz &&
               !self_eod_on;
    }
};

double encode_amplitude(const std::vector<double>& samples, int window);
std::vector<int> encode_transient(const std::vector<double>& samples, double threshold);

SensorState apply_tuning(const SensorState& state, const TuningCommand& cmd);

// `frames`: the tick's frame window, oldest first. Window length must be a
// power of two matching the wavelet configuration.
SensorReport report(const SensorState& state, const std::vector<env::SensorFrame>& frames);

}  // namespace webca::sensing
