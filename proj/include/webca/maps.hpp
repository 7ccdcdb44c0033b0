#pragma once

#include <array>
#include <string>
#include <vector>

#include "webca/sensing.hpp"

namespace webca::maps {

enum class SegmentId { CMS, CLS, LS };
std::string segment_name(SegmentId s);

struct MapConfig {
    SegmentId segment = SegmentId::CMS;
    int neuron_count = 0;
    int rf_width = 1;  // sensors, odd
    double band_low_hz = 0.0;
    double band_high_hz = 0.0;
    double gain = 1.0;
};

struct MapActivity {
    SegmentId segment = SegmentId::CMS;
    double time_s = 0.0;
    long tick = 0;
    std::vector<double> activity;  // >= 0, one per neuron
};

struct BurstCoderParams {
    double spike_threshold = 0.0;  // > 0
    int refractory_ticks = 0;
    int burst_min_spikes = 2;
    int burst_window_ticks = 2;
};

struct BurstEvent {
    SegmentId segment = SegmentId::CMS;
    int neuron = 0;
    long onset_tick = 0;
    int spike_count = 0;
    double mean_isi_ticks = 0.0;
};

void validate(const MapConfig& c, double sample_rate_hz);
void validate(const BurstCoderParams& p);
// Size ordering across the three segments: CMS > CLS > LS.
void validate_sizes(const MapConfig& cms, const MapConfig& cls, const MapConfig& ls);

// Per-sensor scalar drive extracted from a report payload: envelope value,
// event count, or leading approximation coefficient.
std::vector<double> sensor_drive(const sensing::SensorReport& report);

// Identical copies of the drive, one per segment (CMS, CLS, LS order).
std::array<std::vector<double>, 3> trifurcate(const sensing::SensorReport& report);

// One ELL segment: triangular receptive fields over the sensor array followed
// by a per-neuron second-order bandpass run at the sample rate (tick drive is
// held constant over the tick's samples), rectification and gain.
class SegmentMap {
public:
    SegmentMap(const MapConfig& config, int sensor_count, double sample_rate_hz);

    // Replace the passband (filter states reset; everything else kept).
    void set_band(double low_hz, double high_hz);
    const MapConfig& config() const { return cfg_; }

    // Spatial stage only: drive pooled through the receptive fields.
    std::vector<double> pooled(const std::vector<double>& drive) const;

    // Advance one sample step; returns rectified, gain-scaled outputs.
    std::vector<double> step_sample(const std::vector<double>& drive);

    // Advance a full tick (drive held for `substeps` samples); activity is the
    // mean rectified output over the tick.
    MapActivity tick(const std::vector<double>& drive, int substeps, long tick_index,
                     double time_s);

    void reset();

    // Receptive-field weight of `neuron` onto `sensor` (0 outside the field).
    double rf_weight(int neuron, int sensor) const;

private:
    MapConfig cfg_;
    int sensor_count_;
    double sample_rate_hz_;
    std::vector<std::vector<std::pair<int, double>>> kernels_;  // per neuron: (sensor, weight)
    // Biquad coefficients (shared) and per-neuron states.
    double b0_ = 0, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
    std::vector<double> z1_, z2_;

    void design_filter();
    void build_kernels();
};

// Spike/burst extraction over an activity history (one row per tick).
std::vector<BurstEvent> burst_encode(const std::vector<MapActivity>& history,
                                     const BurstCoderParams& params);

// Incremental form with identical semantics; burst_encode is implemented on
// top of it.
class BurstCoder {
public:
    BurstCoder(SegmentId segment, int neuron_count, const BurstCoderParams& params);
    // Feed one tick of activity; returns bursts completed at this tick.
    std::vector<BurstEvent> step(const std::vector<double>& activity, long tick_index);
    void reset();

private:
    SegmentId segment_;
    BurstCoderParams params_;
    struct NeuronState {
        double prev_activity = 0.0;
        int refractory_left = 0;
        std::vector<long> pending_spikes;
    };
    std::vector<NeuronState> neurons_;
};

struct ClsBands {
    std::pair<double, double> low;
    std::pair<double, double> high;
};

// Context-driven CLS retuning; non-CLS configs are rejected.
MapConfig retune_cls(const MapConfig& config, bool communication_context, const ClsBands& bands);

}  // namespace webca::maps
