#include "webca/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace webca::harness {

using nlohmann::json;

namespace {

env::EodSource parse_eod(const json& j) {
    env::EodSource s;
    const std::string kind = j.value("kind", "sine");
    if (kind == "sine")
        s.kind = env::EodKind::SineWave;
    else if (kind == "biphasic_pulse")
        s.kind = env::EodKind::BiphasicPulse;
    else
        throw ValidationError("eod kind must be 'sine' or 'biphasic_pulse'");
    s.frequency_hz = j.at("frequency_hz").get<double>();
    s.amplitude_v = j.at("amplitude_v").get<double>();
    s.phase_rad = j.value("phase_rad", 0.0);
    if (s.amplitude_v < 0.0) throw ValidationError("eod amplitude must be >= 0");
    const double two_pi = 2.0 * M_PI;
    s.phase_rad = std::fmod(s.phase_rad, two_pi);
    if (s.phase_rad < 0.0) s.phase_rad += two_pi;
    return s;
}

maps::MapConfig parse_map(const json& j, maps::SegmentId seg) {
    maps::MapConfig c;
    c.segment = seg;
    c.neuron_count = j.at("neurons").get<int>();
    c.rf_width = j.at("rf_width").get<int>();
    const auto band = j.at("band_hz");
    c.band_low_hz = band.at(0).get<double>();
    c.band_high_hz = band.at(1).get<double>();
    c.gain = j.value("gain", 1.0);
    return c;
}

tectum::EventKind event_from_name(const std::string& name) {
    if (name == "object_echo") return tectum::EventKind::ObjectEcho;
    if (name == "external_low_freq_field") return tectum::EventKind::ExternalLowFreqField;
    if (name == "conspecific_chirp") return tectum::EventKind::ConspecificChirp;
    if (name == "quiet") return tectum::EventKind::Quiet;
    throw ValidationError("unknown event kind: " + name);
}

sensing::TuningCommand parse_policy(const json& j) {
    sensing::TuningCommand cmd;
    if (j.contains("wavelet"))
        cmd.wavelet_family = sensing::wavelet_family_from_name(j.at("wavelet").get<std::string>());
    if (j.contains("amplitude_scheme"))
        cmd.amplitude_scheme = sensing::scheme_from_name(j.at("amplitude_scheme").get<std::string>());
    if (j.contains("transient_scheme"))
        cmd.transient_scheme = sensing::scheme_from_name(j.at("transient_scheme").get<std::string>());
    if (j.contains("self_eod_on")) cmd.self_eod_on = j.at("self_eod_on").get<bool>();
    // cls_band is resolved against the configured band pair at load time by
    // the caller (needs cls_bands).
    return cmd;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }

    ScenarioConfig cfg;
    try {
        cfg.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        cfg.tick_samples = j.at("tick_samples").get<int>();
        cfg.duration_s = j.at("duration_s").get<double>();
        cfg.seed = j.value("seed", 0ull);

        const auto& je = j.at("env");
        cfg.scene.self_source = parse_eod(je.at("self_eod"));
        cfg.scene.perturbation_k = je.value("perturbation_k", 1.0);
        cfg.scene.conspecific_range_m = je.value("conspecific_range_m", 0.1);
        cfg.sensor_count = je.at("sensor_count").get<int>();
        cfg.sensor_pitch_m = je.at("sensor_pitch_m").get<double>();
        if (je.contains("noise_snr_db") && !je.at("noise_snr_db").is_null())
            cfg.noise_snr_db = je.at("noise_snr_db").get<double>();
        for (const auto& jo : je.value("objects", json::array())) {
            env::ObjectSpec o;
            o.position = {jo.at("x").get<double>(), jo.at("y").get<double>()};
            o.radius_m = jo.at("radius_m").get<double>();
            o.contrast = jo.at("contrast").get<double>();
            cfg.scene.objects.push_back(o);
            cfg.scene.object_velocities.push_back({jo.value("vx", 0.0), jo.value("vy", 0.0)});
        }
        for (const auto& jc : je.value("conspecifics", json::array())) {
            env::ConspecificSpec c;
            c.position = {jc.at("x").get<double>(), jc.at("y").get<double>()};
            c.source = parse_eod(jc.at("eod"));
            for (const auto& jch : jc.value("chirps", json::array())) {
                env::Chirp ch;
                ch.onset_s = jch.at("onset_s").get<double>();
                ch.duration_s = jch.at("duration_s").get<double>();
                ch.excursion_hz = jch.at("excursion_hz").get<double>();
                c.chirps.push_back(ch);
            }
            cfg.scene.conspecifics.push_back(c);
        }

        const auto& js = j.at("sensing");
        cfg.wavelet.family =
            sensing::wavelet_family_from_name(js.at("wavelet").at("family").get<std::string>());
        cfg.wavelet.levels = js.at("wavelet").at("levels").get<int>();
        cfg.receptor_pattern = js.value("receptor_pattern", "alternate");
        cfg.amplitude_scheme = sensing::scheme_from_name(js.value("amplitude_scheme", "envelope_rate"));
        cfg.transient_scheme =
            sensing::scheme_from_name(js.value("transient_scheme", "transient_event"));
        cfg.transient_threshold_v = js.at("transient_threshold_v").get<double>();
        cfg.envelope_window = js.value("envelope_window", cfg.tick_samples);
        cfg.self_eod_initial = js.value("self_eod_on", true);

        const auto& jm = j.at("maps");
        cfg.cms = parse_map(jm.at("cms"), maps::SegmentId::CMS);
        cfg.ls = parse_map(jm.at("ls"), maps::SegmentId::LS);
        {
            const auto& jcls = jm.at("cls");
            cfg.cls.segment = maps::SegmentId::CLS;
            cfg.cls.neuron_count = jcls.at("neurons").get<int>();
            cfg.cls.rf_width = jcls.at("rf_width").get<int>();
            cfg.cls.gain = jcls.value("gain", 1.0);
            const auto lo = jcls.at("band_low_hz");
            const auto hi = jcls.at("band_high_hz");
            cfg.cls_bands.low = {lo.at(0).get<double>(), lo.at(1).get<double>()};
            cfg.cls_bands.high = {hi.at(0).get<double>(), hi.at(1).get<double>()};
            cfg.cls.band_low_hz = cfg.cls_bands.low.first;
            cfg.cls.band_high_hz = cfg.cls_bands.low.second;
        }
        const auto& jb = jm.at("burst");
        cfg.burst.spike_threshold = jb.at("spike_threshold").get<double>();
        cfg.burst.refractory_ticks = jb.at("refractory_ticks").get<int>();
        cfg.burst.burst_min_spikes = jb.at("burst_min_spikes").get<int>();
        cfg.burst.burst_window_ticks = jb.at("burst_window_ticks").get<int>();

        const auto& jt = j.at("tectum");
        cfg.ridge_lambda = jt.at("ridge_lambda").get<double>();
        if (jt.contains("train") && !jt.at("train").is_null()) {
            TrainSpec t;
            const auto& jtr = jt.at("train");
            t.lateral_m = jtr.at("lateral_m").get<double>();
            t.radius_m = jtr.at("radius_m").get<double>();
            t.contrast = jtr.at("contrast").get<double>();
            t.settle_ticks = jtr.value("settle_ticks", 3);
            t.avg_ticks = jtr.value("avg_ticks", 1);
            t.train_reps = jtr.value("train_reps", 1);
            t.grid_margin_pitches = jtr.value("grid_margin_pitches", 1);
            t.contribution_cap_m = jtr.value("contribution_cap_m", 0.0);
            t.eval_count = jtr.value("eval_count", 200);
            cfg.train = t;
        }
        const auto& jcl = jt.at("classifier");
        cfg.classifier.cls_burst_rate = jcl.at("cls_burst_rate").get<double>();
        cfg.classifier.cms_burst_rate = jcl.at("cms_burst_rate").get<double>();
        cfg.classifier.envelope_floor_v = jcl.at("envelope_floor_v").get<double>();
        cfg.classifier_window_ticks = jcl.value("window_ticks", 8);
        cfg.classifier_warmup_ticks = jcl.value("warmup_ticks", 0);

        const auto& jp = j.at("pallium");
        cfg.gamma = jp.at("gamma").get<double>();
        cfg.min_dwell_ticks = jp.at("min_dwell_ticks").get<long>();
        cfg.initial_context =
            pallium::context_from_name(jp.value("initial_context", "active_electrolocation"));
        for (const auto& jr : jp.at("rules")) {
            pallium::Rule r;
            const std::string ctx = jr.value("context", "any");
            if (ctx != "any") r.when_context = pallium::context_from_name(ctx);
            r.event = event_from_name(jr.at("event").get<std::string>());
            r.threshold = jr.at("threshold").get<double>();
            const std::string tgt = jr.value("target", "stay");
            if (tgt != "stay") r.target = pallium::context_from_name(tgt);
            r.priority = jr.value("priority", 0);
            cfg.rules.push_back(r);
        }
        for (const auto& [name, jpol] : jp.at("policies").items()) {
            sensing::TuningCommand cmd = parse_policy(jpol);
            if (jpol.contains("cls_band")) {
                const std::string which = jpol.at("cls_band").get<std::string>();
                if (which == "high")
                    cmd.cls_band_hz = cfg.cls_bands.high;
                else if (which == "low")
                    cmd.cls_band_hz = cfg.cls_bands.low;
                else
                    throw ValidationError("policy cls_band must be 'low' or 'high'");
            }
            cfg.policies[pallium::context_from_name(name)] = cmd;
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config structure error: ") + e.what());
    }

    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ScenarioConfig& cfg) {
    if (cfg.sample_rate_hz <= 0.0) throw ValidationError("sample_rate_hz must be > 0");
    if (cfg.tick_samples < 2 || (cfg.tick_samples & (cfg.tick_samples - 1)) != 0)
        throw ValidationError("tick_samples must be a power of two >= 2");
    if (cfg.duration_s < 0.0) throw ValidationError("duration_s must be >= 0");

    env::validate(cfg.scene);
    if (cfg.sensor_count < 2) throw ValidationError("sensor_count must be >= 2");
    if (cfg.sensor_pitch_m <= 0.0) throw ValidationError("sensor_pitch_m must be > 0");

    if (cfg.wavelet.levels < 1 || (cfg.tick_samples >> cfg.wavelet.levels) < 1)
        throw ValidationError("wavelet levels must fit the tick window length");
    if (cfg.receptor_pattern != "alternate" && cfg.receptor_pattern != "all_amplitude" &&
        cfg.receptor_pattern != "all_transient")
        throw ValidationError("receptor_pattern must be alternate/all_amplitude/all_transient");
    if (cfg.transient_threshold_v <= 0.0)
        throw ValidationError("transient_threshold_v must be > 0");
    if (cfg.envelope_window < 2 || cfg.envelope_window > cfg.tick_samples)
        throw ValidationError("envelope_window must be in [2, tick_samples]");

    maps::validate(cfg.cms, cfg.sample_rate_hz);
    maps::validate(cfg.cls, cfg.sample_rate_hz);
    maps::validate(cfg.ls, cfg.sample_rate_hz);
    maps::validate_sizes(cfg.cms, cfg.cls, cfg.ls);
    {
        maps::MapConfig probe = cfg.cls;
        probe.band_low_hz = cfg.cls_bands.high.first;
        probe.band_high_hz = cfg.cls_bands.high.second;
        maps::validate(probe, cfg.sample_rate_hz);
    }
    maps::validate(cfg.burst);

    if (cfg.ridge_lambda < 0.0) throw ValidationError("ridge_lambda must be >= 0");
    if (cfg.classifier_window_ticks < cfg.burst.burst_window_ticks)
        throw ValidationError("classifier window must be >= burst_window_ticks");

    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ValidationError("gamma must be in (0,1)");
    if (cfg.min_dwell_ticks < 0) throw ValidationError("min_dwell_ticks must be >= 0");
    pallium::validate_rules(cfg.rules);
    pallium::validate_policies(cfg.policies);
}

}  // namespace webca::harness
