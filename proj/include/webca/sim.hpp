#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <string>

#include "webca/config.hpp"

namespace webca::harness {

// Deterministic gaussian stream (mt19937_64 + Box-Muller).
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}
    double next();

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// One sensing-to-features stage instantiated from a config. Holds sensor
// state, the three segment maps and their burst coders; the control loop and
// scene stepping live in run_scenario.
class Pipeline {
public:
    explicit Pipeline(const ScenarioConfig& cfg);

    struct TickOutput {
        long tick = 0;
        double time_s = 0.0;
        maps::MapActivity cms, cls, ls;
        int cms_bursts = 0, cls_bursts = 0, ls_bursts = 0;  // completed this tick
        tectum::FeatureVector features;
        tectum::ClassifierInput stats;
    };

    TickOutput tick(const env::Scene& scene, GaussianRng* noise, double snr_db);
    void apply_command(const sensing::TuningCommand& cmd);
    void reset();

    const sensing::SensorState& sensor_state() const { return state_; }
    std::pair<double, double> cls_band() const;
    const env::SensorGeometry& geometry() const { return state_.geometry; }
    double tick_seconds() const { return cfg_.tick_samples / cfg_.sample_rate_hz; }

private:
    ScenarioConfig cfg_;
    sensing::SensorState state_;
    std::unique_ptr<maps::SegmentMap> cms_, cls_, ls_;
    std::unique_ptr<maps::BurstCoder> cms_coder_, cls_coder_, ls_coder_;
    std::deque<long> cms_events_, cls_events_, ls_events_;  // completion ticks
    long tick_index_ = 0;

    double burst_rate(const std::deque<long>& events, int neurons) const;
};

struct RunRow {
    long tick = 0;
    double time_s = 0.0;
    pallium::Context context = pallium::Context::ActiveElectrolocation;
    double decoded_x = std::numeric_limits<double>::quiet_NaN();
    double decoded_y = std::numeric_limits<double>::quiet_NaN();
    double true_x = std::numeric_limits<double>::quiet_NaN();
    double true_y = std::numeric_limits<double>::quiet_NaN();
    tectum::EventKind event = tectum::EventKind::Quiet;
    int cms_bursts = 0, cls_bursts = 0, ls_bursts = 0;
    double cls_band_low_hz = 0.0, cls_band_high_hz = 0.0;
};

struct RunRecord {
    std::vector<RunRow> rows;
    std::vector<std::string> event_log;  // one line per tick, plus transition lines
};

struct MetricsSummary {
    double position_rmse_m = std::numeric_limits<double>::quiet_NaN();
    double rmse_pitch_fraction = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, long> class_counts;
    long context_switch_latency_ticks = -1;  // -1: no switch observed
    double lesion_max_rel_change = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, double> extra;
};

// Decoder training over a static-object position sweep (requires cfg.train).
std::vector<double> train_grid_positions(const ScenarioConfig& cfg);
std::vector<double> eval_sweep_positions(const ScenarioConfig& cfg);
// Noise-free object-free probe response; subtracted from probe features so the
// decoder sees only the deviation from the self-generated background.
tectum::FeatureVector probe_reference(const ScenarioConfig& cfg);
tectum::FeatureVector features_for_object(const ScenarioConfig& cfg, double x,
                                          std::uint64_t noise_seed,
                                          const tectum::FeatureVector* reference = nullptr);

// Decoder plus the adapted reference (self-generated background + mean training
// response) that probe features are reported relative to.
struct TrainedReadout {
    tectum::Decoder decoder;
    tectum::FeatureVector reference;
};
TrainedReadout train_readout(const ScenarioConfig& cfg);
tectum::Decoder train_decoder(const ScenarioConfig& cfg);

std::pair<RunRecord, MetricsSummary> run_scenario(const ScenarioConfig& cfg);

MetricsSummary experiment_hyperacuity(const ScenarioConfig& cfg);
MetricsSummary experiment_lesion(const ScenarioConfig& cfg);
MetricsSummary experiment_feedback(const ScenarioConfig& cfg);

void write_run_csv(const RunRecord& record, const std::string& path);
void write_events_log(const RunRecord& record, const std::string& path);
void write_summary_json(const MetricsSummary& summary, const std::string& path);

}  // namespace webca::harness
