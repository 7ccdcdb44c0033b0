#include "webca/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace webca::harness {

double GaussianRng::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on the raw 53-bit uniform, so the stream depends only on the
    // engine and not on a library distribution implementation.
    double u1 = 0.0;
    do {
        u1 = (eng_() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = (eng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

Pipeline::Pipeline(const ScenarioConfig& cfg) : cfg_(cfg) {
    state_.geometry = env::make_linear_array(cfg.sensor_count, cfg.sensor_pitch_m);
    state_.kinds.resize(static_cast<size_t>(cfg.sensor_count));
    for (int i = 0; i < cfg.sensor_count; ++i) {
        if (cfg.receptor_pattern == "all_amplitude")
            state_.kinds[static_cast<size_t>(i)] = sensing::ReceptorKind::Amplitude;
        else if (cfg.receptor_pattern == "all_transient")
            state_.kinds[static_cast<size_t>(i)] = sensing::ReceptorKind::Transient;
        else
            state_.kinds[static_cast<size_t>(i)] = (i % 2 == 0)
                                                       ? sensing::ReceptorKind::Amplitude
                                                       : sensing::ReceptorKind::Transient;
    }
    state_.amplitude_scheme = cfg.amplitude_scheme;
    state_.transient_scheme = cfg.transient_scheme;
    state_.wavelet = cfg.wavelet;
    state_.transient_threshold_v = cfg.transient_threshold_v;
    state_.envelope_window = cfg.envelope_window;
    state_.self_eod_on = cfg.self_eod_initial;
    sensing::validate(state_);

    cms_ = std::make_unique<maps::SegmentMap>(cfg.cms, cfg.sensor_count, cfg.sample_rate_hz);
    cls_ = std::make_unique<maps::SegmentMap>(cfg.cls, cfg.sensor_count, cfg.sample_rate_hz);
    ls_ = std::make_unique<maps::SegmentMap>(cfg.ls, cfg.sensor_count, cfg.sample_rate_hz);
    cms_coder_ = std::make_unique<maps::BurstCoder>(maps::SegmentId::CMS, cfg.cms.neuron_count,
                                                    cfg.burst);
    cls_coder_ = std::make_unique<maps::BurstCoder>(maps::SegmentId::CLS, cfg.cls.neuron_count,
                                                    cfg.burst);
    ls_coder_ = std::make_unique<maps::BurstCoder>(maps::SegmentId::LS, cfg.ls.neuron_count,
                                                   cfg.burst);
}

void Pipeline::reset() {
    cms_->reset();
    cls_->reset();
    ls_->reset();
    cms_coder_->reset();
    cls_coder_->reset();
    ls_coder_->reset();
    cms_events_.clear();
    cls_events_.clear();
    ls_events_.clear();
    tick_index_ = 0;
}

std::pair<double, double> Pipeline::cls_band() const {
    return {cls_->config().band_low_hz, cls_->config().band_high_hz};
}

double Pipeline::burst_rate(const std::deque<long>& events, int neurons) const {
    const long horizon = tick_index_ - cfg_.classifier_window_ticks;
    long n = 0;
    for (long t : events)
        if (t > horizon) ++n;
    return static_cast<double>(n) /
           (static_cast<double>(neurons) * cfg_.classifier_window_ticks);
}

Pipeline::TickOutput Pipeline::tick(const env::Scene& scene, GaussianRng* noise, double snr_db) {
    const int L = cfg_.tick_samples;
    const double fs = cfg_.sample_rate_hz;

    const env::Scene* eff_scene = &scene;
    env::Scene muted;
    if (!state_.self_eod_on) {
        muted = scene;
        muted.self_source.amplitude_v = 0.0;
        eff_scene = &muted;
    }

    bool moving = false;
    for (const auto& v : eff_scene->object_velocities)
        if (v.x != 0.0 || v.y != 0.0) moving = true;

    std::vector<env::SensorFrame> frames;
    frames.reserve(static_cast<size_t>(L));
    double power = 0.0;
    env::Scene stepped;  // per-sample motion, so moving objects stay smooth
    if (moving) stepped = *eff_scene;
    for (int s = 0; s < L; ++s) {
        const double t = (static_cast<double>(tick_index_) * L + s) / fs;
        if (moving && s > 0) stepped = env::step_scene(stepped, 1.0 / fs);
        frames.push_back(env::render_frame(moving ? stepped : *eff_scene, state_.geometry, t));
        for (double v : frames.back().samples) power += v * v;
    }
    if (noise != nullptr && snr_db > 0.0) {
        const double rms = std::sqrt(power / (static_cast<double>(L) * state_.geometry.count));
        const double sigma = rms * std::pow(10.0, -snr_db / 20.0);
        if (sigma > 0.0)
            for (auto& f : frames)
                for (auto& v : f.samples) v += sigma * noise->next();
    }

    TickOutput out;
    out.tick = tick_index_;
    out.time_s = frames.back().time_s;

    const sensing::SensorReport report = sensing::report(state_, frames);
    const std::vector<double> drive = maps::sensor_drive(report);

    out.cms = cms_->tick(drive, L, tick_index_, out.time_s);
    out.cls = cls_->tick(drive, L, tick_index_, out.time_s);
    out.ls = ls_->tick(drive, L, tick_index_, out.time_s);

    const auto ev_cms = cms_coder_->step(out.cms.activity, tick_index_);
    const auto ev_cls = cls_coder_->step(out.cls.activity, tick_index_);
    const auto ev_ls = ls_coder_->step(out.ls.activity, tick_index_);
    out.cms_bursts = static_cast<int>(ev_cms.size());
    out.cls_bursts = static_cast<int>(ev_cls.size());
    out.ls_bursts = static_cast<int>(ev_ls.size());
    for (size_t i = 0; i < ev_cms.size(); ++i) cms_events_.push_back(tick_index_);
    for (size_t i = 0; i < ev_cls.size(); ++i) cls_events_.push_back(tick_index_);
    for (size_t i = 0; i < ev_ls.size(); ++i) ls_events_.push_back(tick_index_);
    const long horizon = tick_index_ - cfg_.classifier_window_ticks;
    auto prune = [horizon](std::deque<long>& q) {
        while (!q.empty() && q.front() <= horizon) q.pop_front();
    };
    prune(cms_events_);
    prune(cls_events_);
    prune(ls_events_);

    const std::vector<double> rates = {burst_rate(cms_events_, cfg_.cms.neuron_count),
                                       burst_rate(cls_events_, cfg_.cls.neuron_count),
                                       burst_rate(ls_events_, cfg_.ls.neuron_count)};
    out.features = tectum::assemble_features(out.cms, out.cls, out.ls, rates);

    // Raw-envelope statistic for the classifier, independent of coding scheme.
    double env_acc = 0.0;
    for (int s = 0; s < state_.geometry.count; ++s) {
        double e = 0.0;
        for (const auto& f : frames) {
            const double v = f.samples[static_cast<size_t>(s)];
            e += v * v;
        }
        env_acc += std::sqrt(e / L);
    }
    out.stats.cms_burst_rate = rates[0];
    out.stats.cls_burst_rate = rates[1];
    out.stats.ls_burst_rate = rates[2];
    out.stats.mean_envelope_v = env_acc / state_.geometry.count;
    out.stats.self_eod_on = state_.self_eod_on;

    ++tick_index_;
    return out;
}

void Pipeline::apply_command(const sensing::TuningCommand& cmd) {
    state_ = sensing::apply_tuning(state_, cmd);
    if (cmd.cls_band_hz) cls_->set_band(cmd.cls_band_hz->first, cmd.cls_band_hz->second);
}

std::vector<double> train_grid_positions(const ScenarioConfig& cfg) {
    const double pitch = cfg.sensor_pitch_m;
    const int margin = cfg.train ? cfg.train->grid_margin_pitches : 1;
    const double x0 = -0.5 * pitch * (cfg.sensor_count - 1) - margin * pitch;
    const double x1 = 0.5 * pitch * (cfg.sensor_count - 1) + margin * pitch;
    std::vector<double> xs;
    for (double x = x0; x <= x1 + 1e-12; x += pitch) xs.push_back(x);
    return xs;
}

std::vector<double> eval_sweep_positions(const ScenarioConfig& cfg) {
    const int n = cfg.train ? cfg.train->eval_count : 200;
    const double step = cfg.sensor_pitch_m / 10.0;
    std::vector<double> xs;
    xs.reserve(static_cast<size_t>(n));
    // Half-step offset keeps the sweep disjoint from the training grid.
    for (int k = 0; k < n; ++k)
        xs.push_back((k - (n - 1) / 2.0) * step + step / 2.0);
    return xs;
}

namespace {

tectum::FeatureVector probe_features(const ScenarioConfig& cfg, const env::ObjectSpec* obj,
                                     GaussianRng* noise) {
    ScenarioConfig probe = cfg;
    probe.scene.objects.clear();
    probe.scene.object_velocities.clear();
    probe.scene.conspecifics.clear();
    if (obj) {
        probe.scene.objects.push_back(*obj);
        probe.scene.object_velocities.push_back({0.0, 0.0});
    }

    Pipeline pipe(probe);
    const double snr = probe.noise_snr_db.value_or(0.0);
    if (!probe.noise_snr_db) noise = nullptr;
    Pipeline::TickOutput out;
    for (int t = 0; t < cfg.train->settle_ticks; ++t) out = pipe.tick(probe.scene, noise, snr);
    tectum::FeatureVector acc = out.features;
    for (int t = 1; t < cfg.train->avg_ticks; ++t) {
        out = pipe.tick(probe.scene, noise, snr);
        for (size_t j = 0; j < acc.values.size(); ++j) acc.values[j] += out.features.values[j];
    }
    if (cfg.train->avg_ticks > 1)
        for (auto& v : acc.values) v /= cfg.train->avg_ticks;
    return acc;
}

}  // namespace

tectum::FeatureVector probe_reference(const ScenarioConfig& cfg) {
    if (!cfg.train) throw Untrained("config has no decoder training sweep");
    return probe_features(cfg, nullptr, nullptr);
}

tectum::FeatureVector features_for_object(const ScenarioConfig& cfg, double x,
                                          std::uint64_t noise_seed,
                                          const tectum::FeatureVector* reference) {
    if (!cfg.train) throw Untrained("config has no decoder training sweep");
    env::ObjectSpec obj;
    obj.position = {x, cfg.train->lateral_m};
    obj.radius_m = cfg.train->radius_m;
    obj.contrast = cfg.train->contrast;
    GaussianRng rng(noise_seed);
    tectum::FeatureVector f = probe_features(cfg, &obj, &rng);
    if (reference)
        for (size_t j = 0; j < f.values.size(); ++j) f.values[j] -= reference->values[j];
    return f;
}

std::vector<tectum::TrainingSample> training_samples(const ScenarioConfig& cfg,
                                                     const tectum::FeatureVector& ref) {
    const std::vector<double> xs = train_grid_positions(cfg);
    const int reps = std::max(1, cfg.train->train_reps);
    std::vector<tectum::TrainingSample> samples;
    samples.reserve(xs.size() * reps);
    for (size_t i = 0; i < xs.size(); ++i)
        for (int r = 0; r < reps; ++r) {
            tectum::TrainingSample s;
            s.features =
                features_for_object(cfg, xs[i], cfg.seed * 1000003ull + i * reps + r, &ref);
            s.position = {xs[i]};
            samples.push_back(std::move(s));
        }
    return samples;
}

tectum::Decoder fit_scaled_decoder(const std::vector<tectum::TrainingSample>& samples,
                                   double lambda, double contribution_cap_m) {
    // Ridge in per-channel normalized feature space; the normalizer starts at
    // each channel's RMS and is inflated iteratively for channels whose
    // individual contribution to the estimate exceeds the cap, so no single
    // channel becomes load-bearing. Scales fold back into the returned weights.
    const size_t n = samples.front().features.values.size();
    const size_t m = samples.size();
    std::vector<double> scale(n, 0.0);
    for (const auto& s : samples)
        for (size_t j = 0; j < n; ++j) scale[j] += s.features.values[j] * s.features.values[j];
    for (size_t j = 0; j < n; ++j) {
        scale[j] = std::sqrt(scale[j] / static_cast<double>(m));
        if (scale[j] < 1e-15) scale[j] = 1.0;
    }

    tectum::Decoder dec;
    std::vector<tectum::TrainingSample> scaled = samples;
    for (int iter = 0; iter < 40; ++iter) {
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j)
                scaled[i].features.values[j] = samples[i].features.values[j] / scale[j];
        dec = tectum::fit_decoder(scaled, lambda);
        for (auto& row : dec.weights)
            for (size_t j = 0; j < n; ++j) row[j] /= scale[j];
        for (size_t j = 0; j < n; ++j) dec.feature_mean[j] *= scale[j];

        // Undo ridge shrinkage: regress labels on predictions, rescale to unit
        // slope.
        double pm = 0.0, lm = 0.0;
        std::vector<double> preds(m);
        for (size_t i = 0; i < m; ++i) {
            preds[i] = tectum::decode_position(dec, samples[i].features).position[0];
            pm += preds[i];
            lm += samples[i].position[0];
        }
        pm /= static_cast<double>(m);
        lm /= static_cast<double>(m);
        double cov = 0.0, var = 0.0;
        for (size_t i = 0; i < m; ++i) {
            cov += (preds[i] - pm) * (samples[i].position[0] - lm);
            var += (preds[i] - pm) * (preds[i] - pm);
        }
        if (var > 0.0 && cov > 0.0) {
            const double slope = cov / var;
            for (auto& w : dec.weights[0]) w *= slope;
            dec.bias[0] = lm - slope * pm;
        }

        if (contribution_cap_m <= 0.0) break;
        double worst = 0.0;
        for (size_t j = 0; j < n; ++j) {
            double s1 = 0.0, s2 = 0.0;
            for (size_t i = 0; i < m; ++i) {
                const double c = dec.weights[0][j] * samples[i].features.values[j];
                s1 += c;
                s2 += c * c;
            }
            s1 /= static_cast<double>(m);
            const double cstd = std::sqrt(std::max(0.0, s2 / static_cast<double>(m) - s1 * s1));
            const double over = cstd / contribution_cap_m;
            worst = std::max(worst, over);
            if (over > 1.0) scale[j] *= std::pow(over, 0.7);
        }
        if (worst <= 1.02) break;
    }
    return dec;
}

TrainedReadout train_readout(const ScenarioConfig& cfg) {
    if (!cfg.train) throw Untrained("config has no decoder training sweep");
    tectum::FeatureVector ref = probe_reference(cfg);
    std::vector<tectum::TrainingSample> samples = training_samples(cfg, ref);
    // Adapt the reference to the mean training response, so each channel
    // reports its deviation from the expected probe-sweep input.
    const size_t n = ref.values.size();
    std::vector<double> mean(n, 0.0);
    for (const auto& s : samples)
        for (size_t j = 0; j < n; ++j) mean[j] += s.features.values[j];
    for (size_t j = 0; j < n; ++j) mean[j] /= static_cast<double>(samples.size());
    for (auto& s : samples)
        for (size_t j = 0; j < n; ++j) s.features.values[j] -= mean[j];
    for (size_t j = 0; j < n; ++j) ref.values[j] += mean[j];
    return {fit_scaled_decoder(samples, cfg.ridge_lambda, cfg.train->contribution_cap_m),
            std::move(ref)};
}

tectum::Decoder train_decoder(const ScenarioConfig& cfg) {
    return train_readout(cfg).decoder;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string describe_command(const sensing::TuningCommand& cmd) {
    std::ostringstream ss;
    bool first = true;
    auto sep = [&]() {
        if (!first) ss << ";";
        first = false;
    };
    if (cmd.wavelet_family) {
        sep();
        ss << "wavelet:" << sensing::wavelet_family_name(*cmd.wavelet_family);
    }
    if (cmd.amplitude_scheme) {
        sep();
        ss << "amplitude_scheme:" << sensing::scheme_name(*cmd.amplitude_scheme);
    }
    if (cmd.transient_scheme) {
        sep();
        ss << "transient_scheme:" << sensing::scheme_name(*cmd.transient_scheme);
    }
    if (cmd.cls_band_hz) {
        sep();
        ss << "cls_band:" << fmt(cmd.cls_band_hz->first) << "," << fmt(cmd.cls_band_hz->second);
    }
    if (cmd.self_eod_on) {
        sep();
        ss << "self_eod_on:" << (*cmd.self_eod_on ? "true" : "false");
    }
    return first ? "-" : ss.str();
}

}  // namespace

std::pair<RunRecord, MetricsSummary> run_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    RunRecord record;
    MetricsSummary summary;

    const double tick_s = cfg.tick_samples / cfg.sample_rate_hz;
    const long n_ticks = static_cast<long>(std::llround(cfg.duration_s / tick_s));
    if (n_ticks == 0) return {record, summary};

    Pipeline pipe(cfg);
    GaussianRng rng(cfg.seed);
    GaussianRng* noise = cfg.noise_snr_db ? &rng : nullptr;
    const double snr = cfg.noise_snr_db.value_or(0.0);

    std::optional<tectum::Decoder> decoder;
    if (cfg.train) decoder = train_decoder(cfg);

    pallium::PalliumState pal;
    pal.context = cfg.initial_context;
    pal.gamma = cfg.gamma;
    pal.min_dwell_ticks = cfg.min_dwell_ticks;
    pal.dwell_ticks = cfg.min_dwell_ticks;  // start settled
    pal.rules = cfg.rules;

    env::Scene scene = cfg.scene;
    long first_switch_tick = -1;
    long first_comm_tick = -1;

    for (long tick = 0; tick < n_ticks; ++tick) {
        auto out = pipe.tick(scene, noise, snr);
        const tectum::EventKind kind = tick < cfg.classifier_warmup_ticks
                                           ? tectum::EventKind::Quiet
                                           : tectum::classify_event(out.stats, cfg.classifier);

        RunRow row;
        row.tick = tick;
        row.time_s = out.time_s;
        row.event = kind;
        row.cms_bursts = out.cms_bursts;
        row.cls_bursts = out.cls_bursts;
        row.ls_bursts = out.ls_bursts;
        const auto band = pipe.cls_band();
        row.cls_band_low_hz = band.first;
        row.cls_band_high_hz = band.second;
        if (decoder) {
            const auto dec = tectum::decode_position(*decoder, out.features);
            row.decoded_x = dec.position[0];
            row.decoded_y = cfg.train->lateral_m;
        }
        if (!scene.objects.empty()) {
            const auto best = std::min_element(
                scene.objects.begin(), scene.objects.end(),
                [](const env::ObjectSpec& a, const env::ObjectSpec& b) {
                    return env::norm(a.position) < env::norm(b.position);
                });
            row.true_x = best->position.x;
            row.true_y = best->position.y;
        }

        // The warmup holds the controller as well as the labels; otherwise the
        // quiet-accumulation rule fires off the settling transient.
        pallium::TransitionResult tr{pal, std::nullopt};
        if (tick >= cfg.classifier_warmup_ticks) {
            pal = pallium::observe(pal, {kind});
            tr = pallium::transition(pal);
            pal = tr.state;
        }
        row.context = pal.context;

        std::string cmd_desc = "-";
        if (tr.changed_to) {
            const pallium::Context old_ctx =
                record.rows.empty() ? cfg.initial_context : record.rows.back().context;
            const auto cmds = pallium::issue_commands(old_ctx, *tr.changed_to, cfg.policies);
            std::ostringstream cd;
            for (size_t i = 0; i < cmds.size(); ++i) {
                if (i) cd << "|";
                cd << describe_command(cmds[i]);
                pipe.apply_command(cmds[i]);
            }
            cmd_desc = cd.str();
            if (first_switch_tick < 0) first_switch_tick = tick;
            if (*tr.changed_to == pallium::Context::Communication && first_comm_tick < 0)
                first_comm_tick = tick;
        }

        std::ostringstream log;
        log << "tick=" << tick << " context=" << pallium::context_name(pal.context)
            << " counters=" << fmt(pal.event_counters[0]) << "," << fmt(pal.event_counters[1])
            << "," << fmt(pal.event_counters[2]) << "," << fmt(pal.event_counters[3])
            << " event=" << tectum::event_kind_name(kind)
            << " transition=" << (tr.changed_to ? pallium::context_name(*tr.changed_to) : "-")
            << " commands=" << cmd_desc;
        record.event_log.push_back(log.str());
        record.rows.push_back(row);

        scene = env::step_scene(scene, tick_s);
    }

    for (const auto& row : record.rows) summary.class_counts[tectum::event_kind_name(row.event)]++;
    double se = 0.0;
    long n_se = 0;
    for (const auto& row : record.rows) {
        if (!std::isnan(row.decoded_x) && !std::isnan(row.true_x)) {
            const double e = row.decoded_x - row.true_x;
            se += e * e;
            ++n_se;
        }
    }
    if (n_se > 0) {
        summary.position_rmse_m = std::sqrt(se / n_se);
        summary.rmse_pitch_fraction = summary.position_rmse_m / cfg.sensor_pitch_m;
    }

    long chirp_onset_tick = -1;
    for (const auto& c : cfg.scene.conspecifics)
        if (!c.chirps.empty()) {
            const long t = static_cast<long>(std::floor(c.chirps.front().onset_s / tick_s));
            if (chirp_onset_tick < 0 || t < chirp_onset_tick) chirp_onset_tick = t;
        }
    if (chirp_onset_tick >= 0 && first_comm_tick >= chirp_onset_tick)
        summary.context_switch_latency_ticks = first_comm_tick - chirp_onset_tick;
    else if (chirp_onset_tick < 0)
        summary.context_switch_latency_ticks = first_switch_tick;

    return {record, summary};
}

MetricsSummary experiment_hyperacuity(const ScenarioConfig& cfg) {
    if (!cfg.train) throw Untrained("hyperacuity experiment needs a training sweep spec");
    const TrainedReadout readout = train_readout(cfg);
    const tectum::Decoder& decoder = readout.decoder;
    const std::vector<double> xs = eval_sweep_positions(cfg);

    MetricsSummary summary;
    double se = 0.0;
    long mono_violations = 0;
    double prev_decoded = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < xs.size(); ++i) {
        const auto f =
            features_for_object(cfg, xs[i], cfg.seed * 2000003ull + i, &readout.reference);
        const auto dec = tectum::decode_position(decoder, f);
        const double err = dec.position[0] - xs[i];
        se += err * err;
        if (dec.position[0] < prev_decoded) ++mono_violations;
        prev_decoded = dec.position[0];
    }
    summary.position_rmse_m = std::sqrt(se / static_cast<double>(xs.size()));
    summary.rmse_pitch_fraction = summary.position_rmse_m / cfg.sensor_pitch_m;
    summary.extra["monotonicity_violations"] = static_cast<double>(mono_violations);
    summary.extra["eval_positions"] = static_cast<double>(xs.size());
    return summary;
}

MetricsSummary experiment_lesion(const ScenarioConfig& cfg) {
    if (!cfg.train) throw Untrained("lesion experiment needs a training sweep spec");
    const TrainedReadout readout = train_readout(cfg);
    const tectum::Decoder& decoder = readout.decoder;
    const std::vector<tectum::TrainingSample> train_samples =
        training_samples(cfg, readout.reference);

    const std::vector<double> xs = eval_sweep_positions(cfg);
    std::vector<tectum::FeatureVector> eval_features;
    double se = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        eval_features.push_back(
            features_for_object(cfg, xs[i], cfg.seed * 2000003ull + i, &readout.reference));
        const double err =
            tectum::decode_position(decoder, eval_features.back()).position[0] - xs[i];
        se += err * err;
    }
    const double baseline_rmse = std::sqrt(se / static_cast<double>(xs.size()));

    // Lesion tolerance: silence one channel everywhere (training sweep and
    // held-out sweep), let the readout refit, and compare held-out accuracy.
    const size_t n_features = eval_features.front().values.size();
    double max_rel_change = 0.0;
    for (size_t j = 0; j < n_features; ++j) {
        std::vector<tectum::TrainingSample> lesioned = train_samples;
        for (auto& s : lesioned) s.features.values[j] = 0.0;
        const tectum::Decoder refit =
            fit_scaled_decoder(lesioned, cfg.ridge_lambda, cfg.train->contribution_cap_m);
        double sse = 0.0;
        for (size_t i = 0; i < eval_features.size(); ++i) {
            tectum::FeatureVector f = eval_features[i];
            f.values[j] = 0.0;
            const double err = tectum::decode_position(refit, f).position[0] - xs[i];
            sse += err * err;
        }
        const double lesioned_rmse = std::sqrt(sse / static_cast<double>(xs.size()));
        max_rel_change =
            std::max(max_rel_change, std::abs(lesioned_rmse - baseline_rmse) / baseline_rmse);
    }

    // Best decoder a single feature can support, same data.
    double best_single_rmse = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n_features; ++j) {
        std::vector<tectum::TrainingSample> reduced;
        for (const auto& s : train_samples) {
            tectum::TrainingSample r;
            r.features.tick = s.features.tick;
            r.features.values = {s.features.values[j]};
            r.position = s.position;
            reduced.push_back(std::move(r));
        }
        tectum::Decoder single;
        try {
            single = tectum::fit_decoder(reduced, cfg.ridge_lambda);
        } catch (const SingularSystem&) {
            continue;  // constant feature, no usable decoder
        }
        double sse = 0.0;
        for (size_t i = 0; i < eval_features.size(); ++i) {
            tectum::FeatureVector f;
            f.tick = eval_features[i].tick;
            f.values = {eval_features[i].values[j]};
            const double err = tectum::decode_position(single, f).position[0] - xs[i];
            sse += err * err;
        }
        best_single_rmse = std::min(best_single_rmse, std::sqrt(sse / xs.size()));
    }

    MetricsSummary summary;
    summary.position_rmse_m = baseline_rmse;
    summary.rmse_pitch_fraction = baseline_rmse / cfg.sensor_pitch_m;
    summary.lesion_max_rel_change = max_rel_change;
    summary.extra["best_single_feature_rmse_m"] = best_single_rmse;
    summary.extra["feature_count"] = static_cast<double>(n_features);
    return summary;
}

MetricsSummary experiment_feedback(const ScenarioConfig& cfg) {
    MetricsSummary summary;
    long chirp_onset_tick = -1, chirp_end_tick = -1;
    const double tick_s = cfg.tick_samples / cfg.sample_rate_hz;
    for (const auto& c : cfg.scene.conspecifics)
        for (const auto& ch : c.chirps) {
            const long t = static_cast<long>(std::floor(ch.onset_s / tick_s));
            if (chirp_onset_tick < 0 || t < chirp_onset_tick) {
                chirp_onset_tick = t;
                chirp_end_tick =
                    static_cast<long>(std::ceil((ch.onset_s + ch.duration_s) / tick_s));
            }
        }
    if (chirp_onset_tick < 0) {
        summary.extra["no_chirp_scripted"] = 1.0;
        summary.context_switch_latency_ticks = -1;
        return summary;
    }

    auto [record, run_summary] = run_scenario(cfg);
    summary.class_counts = run_summary.class_counts;

    long comm_tick = -1, band_tick = -1, revert_tick = -1;
    for (const auto& row : record.rows) {
        if (comm_tick < 0 && row.tick >= chirp_onset_tick &&
            row.context == pallium::Context::Communication)
            comm_tick = row.tick;
        if (comm_tick >= 0 && band_tick < 0 &&
            row.cls_band_low_hz == cfg.cls_bands.high.first &&
            row.cls_band_high_hz == cfg.cls_bands.high.second)
            band_tick = row.tick;
        if (comm_tick >= 0 && revert_tick < 0 && row.tick > chirp_end_tick &&
            row.context != pallium::Context::Communication)
            revert_tick = row.tick;
    }

    summary.context_switch_latency_ticks = comm_tick >= 0 ? comm_tick - chirp_onset_tick : -1;
    summary.extra["chirp_onset_tick"] = static_cast<double>(chirp_onset_tick);
    summary.extra["chirp_end_tick"] = static_cast<double>(chirp_end_tick);
    summary.extra["communication_tick"] = static_cast<double>(comm_tick);
    summary.extra["cls_high_band_tick"] = static_cast<double>(band_tick);
    summary.extra["reversion_tick"] = static_cast<double>(revert_tick);
    summary.extra["reversion_latency_ticks"] =
        revert_tick >= 0 ? static_cast<double>(revert_tick - chirp_end_tick) : -1.0;

    // Decay bound: time for the chirp counter to fall below its trigger from
    // its ceiling, plus time for an exit rule's counter to accumulate from
    // zero under a constant event stream, plus hysteresis and the burst
    // pipeline's reporting window.
    double thr_chirp = 2.0;
    double thr_exit = 2.0;
    for (const auto& r : cfg.rules) {
        if (r.event == tectum::EventKind::ConspecificChirp && r.target &&
            *r.target == pallium::Context::Communication)
            thr_chirp = r.threshold;
        if (r.target && *r.target != pallium::Context::Communication &&
            (!r.when_context || *r.when_context == pallium::Context::Communication) &&
            r.event != tectum::EventKind::ConspecificChirp)
            thr_exit = std::min(thr_exit, r.threshold);
    }
    const double g = cfg.gamma;
    const double t1 = std::ceil(std::log(thr_chirp * (1.0 - g)) / std::log(g));
    const double accum_target = std::max(1e-9, 1.0 - thr_exit * (1.0 - g));
    const double t2 = std::ceil(std::log(accum_target) / std::log(g));
    summary.extra["decay_bound_ticks"] = t1 + t2 + static_cast<double>(cfg.min_dwell_ticks) +
                                         static_cast<double>(cfg.classifier_window_ticks) + 5.0;
    return summary;
}

void write_run_csv(const RunRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "tick,time_s,context,decoded_x_m,decoded_y_m,true_x_m,true_y_m,event,"
           "cms_bursts,cls_bursts,ls_bursts\n";
    for (const auto& r : record.rows) {
        out << r.tick << "," << fmt(r.time_s) << "," << pallium::context_name(r.context) << ","
            << fmt(r.decoded_x) << "," << fmt(r.decoded_y) << "," << fmt(r.true_x) << ","
            << fmt(r.true_y) << "," << tectum::event_kind_name(r.event) << "," << r.cms_bursts
            << "," << r.cls_bursts << "," << r.ls_bursts << "\n";
    }
}

void write_events_log(const RunRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    for (const auto& line : record.event_log) out << line << "\n";
}

void write_summary_json(const MetricsSummary& summary, const std::string& path) {
    nlohmann::json j;
    auto put = [&j](const std::string& key, double v) {
        if (std::isnan(v))
            j[key] = nullptr;
        else
            j[key] = v;
    };
    put("position_rmse_m", summary.position_rmse_m);
    put("rmse_pitch_fraction", summary.rmse_pitch_fraction);
    put("lesion_max_rel_change", summary.lesion_max_rel_change);
    j["context_switch_latency_ticks"] = summary.context_switch_latency_ticks;
    j["class_counts"] = summary.class_counts;
    for (const auto& [k, v] : summary.extra) put(k, v);
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace webca::harness
