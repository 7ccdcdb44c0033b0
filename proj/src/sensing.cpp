#include "webca/sensing.hpp"

#include <cmath>

namespace webca::sensing {

CodingScheme scheme_from_name(const std::string& name) {
    if (name == "envelope_rate") return CodingScheme::EnvelopeRate;
    if (name == "transient_event") return CodingScheme::TransientEvent;
    if (name == "wavelet_coefficients") return CodingScheme::WaveletCoefficients;
    throw UnknownScheme("unknown coding scheme: " + name);
}

std::string scheme_name(CodingScheme s) {
    switch (s) {
        case CodingScheme::EnvelopeRate: return "envelope_rate";
        case CodingScheme::TransientEvent: return "transient_event";
        case CodingScheme::WaveletCoefficients: return "wavelet_coefficients";
    }
    return "?";
}

void validate(const SensorState& s) {
    env::validate(s.geometry);
    if (static_cast<int>(s.kinds.size()) != s.geometry.count)
        throw ValidationError("sensor state: one receptor kind required per sensor");
    if (s.transient_threshold_v <= 0.0)
        throw ValidationError("sensor state: transient threshold must be > 0");
    if (s.envelope_window < 2)
        throw ValidationError("sensor state: envelope window must be >= 2 samples");
}

double encode_amplitude(const std::vector<double>& samples, int window) {
    if (window < 2 || static_cast<int>(samples.size()) < window)
        throw BadWindowLength("envelope window must be >= 2 and fit in the sample history");
    double acc = 0.0;
    for (size_t i = samples.size() - static_cast<size_t>(window); i < samples.size(); ++i)
        acc += samples[i] * samples[i];
    return std::sqrt(acc / window);
}

std::vector<int> encode_transient(const std::vector<double>& samples, double threshold) {
    std::vector<int> events;
    for (size_t i = 1; i < samples.size(); ++i) {
        if (std::abs(samples[i] - samples[i - 1]) > threshold)
            events.push_back(static_cast<int>(i));
    }
    return events;
}

SensorState apply_tuning(const SensorState& state, const TuningCommand& cmd) {
    SensorState next = state;
    if (cmd.wavelet_family) next.wavelet.family = *cmd.wavelet_family;
    if (cmd.amplitude_scheme) next.amplitude_scheme = *cmd.amplitude_scheme;
    if (cmd.transient_scheme) next.transient_scheme = *cmd.transient_scheme;
    if (cmd.self_eod_on) next.self_eod_on = *cmd.self_eod_on;
    // cls_band_hz is addressed to the map stage; nothing to do here.
    return next;
}

SensorReport report(const SensorState& state, const std::vector<env::SensorFrame>& frames) {
    const int n_sensors = state.geometry.count;
    SensorReport rep;
    rep.time_s = frames.empty() ? 0.0 : frames.back().time_s;
    rep.schemes.resize(static_cast<size_t>(n_sensors));
    rep.payloads.resize(static_cast<size_t>(n_sensors));

    std::vector<double> hist(frames.size());
    for (int s = 0; s < n_sensors; ++s) {
        for (size_t t = 0; t < frames.size(); ++t) hist[t] = frames[t].samples[static_cast<size_t>(s)];
        const CodingScheme scheme = state.kinds[static_cast<size_t>(s)] == ReceptorKind::Amplitude
                                        ? state.amplitude_scheme
                                        : state.transient_scheme;
        rep.schemes[static_cast<size_t>(s)] = scheme;
        switch (scheme) {
            case CodingScheme::EnvelopeRate:
                rep.payloads[static_cast<size_t>(s)].value =
                    encode_amplitude(hist, state.envelope_window);
                break;
            case CodingScheme::TransientEvent:
                rep.payloads[static_cast<size_t>(s)].value =
                    encode_transient(hist, state.transient_threshold_v);
                break;
            case CodingScheme::WaveletCoefficients:
                rep.payloads[static_cast<size_t>(s)].value = wavelet_decompose(hist, state.wavelet);
                break;
        }
    }
    return rep;
}

}  // namespace webca::sensing
