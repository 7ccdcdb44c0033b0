#include "webca/maps.hpp"

#include <cmath>

namespace webca::maps {

std::string segment_name(SegmentId s) {
    switch (s) {
        case SegmentId::CMS: return "CMS";
        case SegmentId::CLS: return "CLS";
        case SegmentId::LS: return "LS";
    }
    return "?";
}

void validate(const MapConfig& c, double sample_rate_hz) {
    if (c.neuron_count < 1) throw ValidationError("map config: neuron_count must be >= 1");
    if (c.rf_width < 1 || c.rf_width % 2 == 0)
        throw ValidationError("map config: rf_width must be an odd integer >= 1");
    if (!(c.band_low_hz > 0.0 && c.band_low_hz < c.band_high_hz &&
          c.band_high_hz < sample_rate_hz / 2.0))
        throw ValidationError("map config: band must satisfy 0 < low < high < Nyquist");
    if (c.gain <= 0.0) throw ValidationError("map config: gain must be > 0");
}

void validate(const BurstCoderParams& p) {
    if (p.spike_threshold <= 0.0) throw ValidationError("burst params: spike_threshold must be > 0");
    if (p.refractory_ticks < 0) throw ValidationError("burst params: refractory must be >= 0");
    if (p.burst_min_spikes < 2) throw ValidationError("burst params: burst_min_spikes must be >= 2");
    if (p.burst_window_ticks < p.burst_min_spikes)
        throw ValidationError("burst params: burst_window must be >= burst_min_spikes");
}

void validate_sizes(const MapConfig& cms, const MapConfig& cls, const MapConfig& ls) {
    if (!(cms.neuron_count > cls.neuron_count && cls.neuron_count > ls.neuron_count))
        throw ValidationError("map sizes must satisfy count(CMS) > count(CLS) > count(LS)");
}

std::vector<double> sensor_drive(const sensing::SensorReport& report) {
    std::vector<double> drive(report.payloads.size(), 0.0);
    for (size_t s = 0; s < report.payloads.size(); ++s) {
        const auto& p = report.payloads[s].value;
        switch (report.schemes[s]) {
            case sensing::CodingScheme::EnvelopeRate:
                drive[s] = std::get<double>(p);
                break;
            case sensing::CodingScheme::TransientEvent:
                drive[s] = static_cast<double>(std::get<std::vector<int>>(p).size());
                break;
            case sensing::CodingScheme::WaveletCoefficients:
                drive[s] = std::get<std::vector<double>>(p).front();
                break;
        }
    }
    return drive;
}

std::array<std::vector<double>, 3> trifurcate(const sensing::SensorReport& report) {
    const std::vector<double> d = sensor_drive(report);
    return {d, d, d};
}

SegmentMap::SegmentMap(const MapConfig& config, int sensor_count, double sample_rate_hz)
    : cfg_(config), sensor_count_(sensor_count), sample_rate_hz_(sample_rate_hz) {
    validate(cfg_, sample_rate_hz_);
    if (sensor_count_ < 2) throw ConfigMismatch("segment map needs at least 2 sensors");
    if (cfg_.rf_width > sensor_count_)
        throw ConfigMismatch("rf_width exceeds the sensor array");
    build_kernels();
    design_filter();
    z1_.assign(static_cast<size_t>(cfg_.neuron_count), 0.0);
    z2_.assign(static_cast<size_t>(cfg_.neuron_count), 0.0);
}

void SegmentMap::build_kernels() {
    kernels_.assign(static_cast<size_t>(cfg_.neuron_count), {});
    const double radius = (cfg_.rf_width + 1) / 2.0;
    for (int j = 0; j < cfg_.neuron_count; ++j) {
        const double center = cfg_.neuron_count > 1
                                  ? j * static_cast<double>(sensor_count_ - 1) /
                                        (cfg_.neuron_count - 1)
                                  : (sensor_count_ - 1) / 2.0;
        double wsum = 0.0;
        auto& k = kernels_[static_cast<size_t>(j)];
        for (int s = 0; s < sensor_count_; ++s) {
            const double w = 1.0 - std::abs(s - center) / radius;
            if (w > 0.0) {
                k.emplace_back(s, w);
                wsum += w;
            }
        }
        for (auto& [s, w] : k) w /= wsum;
    }
}

void SegmentMap::design_filter() {
    // RBJ constant-peak-gain bandpass biquad.
    const double f0 = std::sqrt(cfg_.band_low_hz * cfg_.band_high_hz);
    const double q = f0 / (cfg_.band_high_hz - cfg_.band_low_hz);
    const double w0 = 2.0 * M_PI * f0 / sample_rate_hz_;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0_ = alpha / a0;
    b1_ = 0.0;
    b2_ = -alpha / a0;
    a1_ = -2.0 * std::cos(w0) / a0;
    a2_ = (1.0 - alpha) / a0;
}

void SegmentMap::set_band(double low_hz, double high_hz) {
    cfg_.band_low_hz = low_hz;
    cfg_.band_high_hz = high_hz;
    validate(cfg_, sample_rate_hz_);
    design_filter();
    reset();
}

void SegmentMap::reset() {
    std::fill(z1_.begin(), z1_.end(), 0.0);
    std::fill(z2_.begin(), z2_.end(), 0.0);
}

double SegmentMap::rf_weight(int neuron, int sensor) const {
    for (const auto& [s, w] : kernels_[static_cast<size_t>(neuron)])
        if (s == sensor) return w;
    return 0.0;
}

std::vector<double> SegmentMap::pooled(const std::vector<double>& drive) const {
    if (static_cast<int>(drive.size()) != sensor_count_)
        throw ConfigMismatch("drive length does not match sensor count");
    std::vector<double> out(static_cast<size_t>(cfg_.neuron_count), 0.0);
    for (int j = 0; j < cfg_.neuron_count; ++j) {
        double acc = 0.0;
        for (const auto& [s, w] : kernels_[static_cast<size_t>(j)])
            acc += w * drive[static_cast<size_t>(s)];
        out[static_cast<size_t>(j)] = acc;
    }
    return out;
}

std::vector<double> SegmentMap::step_sample(const std::vector<double>& drive) {
    const std::vector<double> x = pooled(drive);
    std::vector<double> out(x.size());
    for (size_t j = 0; j < x.size(); ++j) {
        // Transposed direct form II.
        const double y = b0_ * x[j] + z1_[j];
        z1_[j] = b1_ * x[j] - a1_ * y + z2_[j];
        z2_[j] = b2_ * x[j] - a2_ * y;
        out[j] = cfg_.gain * std::max(0.0, y);
    }
    return out;
}

MapActivity SegmentMap::tick(const std::vector<double>& drive, int substeps, long tick_index,
                             double time_s) {
    if (substeps < 1) throw ConfigMismatch("tick substeps must be >= 1");
    MapActivity act;
    act.segment = cfg_.segment;
    act.tick = tick_index;
    act.time_s = time_s;
    act.activity.assign(static_cast<size_t>(cfg_.neuron_count), 0.0);
    for (int s = 0; s < substeps; ++s) {
        const std::vector<double> y = step_sample(drive);
        for (size_t j = 0; j < y.size(); ++j) act.activity[j] += y[j];
    }
    for (auto& v : act.activity) v /= substeps;
    return act;
}

BurstCoder::BurstCoder(SegmentId segment, int neuron_count, const BurstCoderParams& params)
    : segment_(segment), params_(params) {
    validate(params_);
    neurons_.resize(static_cast<size_t>(neuron_count));
}

void BurstCoder::reset() {
    for (auto& n : neurons_) n = NeuronState{};
}

std::vector<BurstEvent> BurstCoder::step(const std::vector<double>& activity, long tick_index) {
    std::vector<BurstEvent> events;
    for (size_t j = 0; j < neurons_.size(); ++j) {
        NeuronState& n = neurons_[j];
        const double a = activity[j];
        bool spiked = false;
        if (n.refractory_left > 0) {
            --n.refractory_left;
        } else if (a >= params_.spike_threshold && n.prev_activity < params_.spike_threshold) {
            spiked = true;
            n.refractory_left = params_.refractory_ticks;
        }
        n.prev_activity = a;
        if (spiked) {
            n.pending_spikes.push_back(tick_index);
            if (static_cast<int>(n.pending_spikes.size()) >= params_.burst_min_spikes) {
                const size_t first =
                    n.pending_spikes.size() - static_cast<size_t>(params_.burst_min_spikes);
                const long span = tick_index - n.pending_spikes[first];
                if (span < params_.burst_window_ticks) {
                    BurstEvent ev;
                    ev.segment = segment_;
                    ev.neuron = static_cast<int>(j);
                    ev.onset_tick = n.pending_spikes[first];
                    ev.spike_count = params_.burst_min_spikes;
                    ev.mean_isi_ticks =
                        static_cast<double>(span) / (params_.burst_min_spikes - 1);
                    events.push_back(ev);
                    n.pending_spikes.clear();  // bursts never overlap per neuron
                }
            }
        }
        // Spikes too old to start a burst ending at a future tick can be dropped.
        while (!n.pending_spikes.empty() &&
               tick_index - n.pending_spikes.front() >= params_.burst_window_ticks)
            n.pending_spikes.erase(n.pending_spikes.begin());
    }
    return events;
}

std::vector<BurstEvent> burst_encode(const std::vector<MapActivity>& history,
                                     const BurstCoderParams& params) {
    validate(params);
    if (history.empty()) return {};
    if (static_cast<int>(history.size()) < params.burst_window_ticks)
        throw ConfigMismatch("activity history shorter than the burst window");
    BurstCoder coder(history.front().segment, static_cast<int>(history.front().activity.size()),
                     params);
    std::vector<BurstEvent> all;
    for (const auto& act : history) {
        auto ev = coder.step(act.activity, act.tick);
        all.insert(all.end(), ev.begin(), ev.end());
    }
    return all;
}

MapConfig retune_cls(const MapConfig& config, bool communication_context, const ClsBands& bands) {
    if (config.segment != SegmentId::CLS)
        throw NotCLS("retune_cls applies only to the CLS segment");
    MapConfig out = config;
    const auto& band = communication_context ? bands.high : bands.low;
    out.band_low_hz = band.first;
    out.band_high_hz = band.second;
    return out;
}

}  // namespace webca::maps
