#include "webca/env.hpp"

#include <algorithm>
#include <cmath>

namespace webca::env {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

SensorGeometry make_linear_array(int count, double pitch_m) {
    SensorGeometry g;
    g.count = count;
    g.pitch_m = pitch_m;
    g.sensor_positions.reserve(static_cast<size_t>(count));
    const double x0 = -0.5 * pitch_m * (count - 1);
    for (int i = 0; i < count; ++i) {
        g.sensor_positions.push_back({x0 + i * pitch_m, 0.0});
    }
    validate(g);
    return g;
}

void validate(const SensorGeometry& g) {
    if (g.count < 2 || static_cast<int>(g.sensor_positions.size()) != g.count)
        throw ValidationError("sensor geometry: count must be >= 2 and match positions");
    if (g.pitch_m <= 0.0) throw ValidationError("sensor geometry: pitch must be > 0");
    for (int i = 1; i < g.count; ++i) {
        const double dx = g.sensor_positions[i].x - g.sensor_positions[i - 1].x;
        if (dx <= 0.0) throw ValidationError("sensor geometry: positions must be strictly ordered");
        if (std::abs(dx - g.pitch_m) > 1e-12)
            throw ValidationError("sensor geometry: adjacent spacing must equal pitch");
    }
}

void validate(const Scene& s) {
    if (s.objects.size() != s.object_velocities.size())
        throw ValidationError("scene: one velocity required per object");
    for (const auto& o : s.objects) {
        if (o.radius_m <= 0.0) throw ValidationError("object: radius must be > 0");
        if (std::abs(o.contrast) > 1.0) throw ValidationError("object: |contrast| must be <= 1");
    }
    if (s.self_source.amplitude_v > 0.0 && s.self_source.frequency_hz <= 0.0)
        throw ValidationError("eod source: frequency must be > 0 when amplitude > 0");
    for (const auto& c : s.conspecifics) {
        double prev_end = -1.0;
        for (const auto& ch : c.chirps) {
            if (ch.duration_s <= 0.0) throw ValidationError("chirp: duration must be > 0");
            if (ch.onset_s < prev_end)
                throw ValidationError("chirp: intervals must be sorted and non-overlapping");
            prev_end = ch.onset_s + ch.duration_s;
        }
    }
}

namespace {

// Cycle-position waveform shared by plain and chirped sources. `cycles` is the
// accumulated phase in units of full periods.
double waveform_at_cycles(const EodSource& s, double cycles) {
    if (s.amplitude_v == 0.0) return 0.0;
    if (s.kind == EodKind::SineWave) {
        return s.amplitude_v * std::sin(kTwoPi * cycles + s.phase_rad);
    }
    // Biphasic pulse: positive lobe over the first 10% of the period, negative
    // lobe over the next 10%, zero elsewhere.
    double frac = cycles + s.phase_rad / kTwoPi;
    frac -= std::floor(frac);
    if (frac < 0.1) return s.amplitude_v;
    if (frac < 0.2) return -s.amplitude_v;
    return 0.0;
}

}  // namespace

double eod_waveform(const EodSource& source, double t) {
    return waveform_at_cycles(source, source.frequency_hz * t);
}

double chirped_waveform(const EodSource& source, const std::vector<Chirp>& chirps, double t) {
    double cycles = source.frequency_hz * t;
    for (const auto& ch : chirps) {
        const double overlap =
            std::max(0.0, std::min(t, ch.onset_s + ch.duration_s) - ch.onset_s);
        cycles += ch.excursion_hz * overlap;
    }
    return waveform_at_cycles(source, cycles);
}

double object_perturbation(const ObjectSpec& object, Vec2 sensor_pos,
                           double emitter_amplitude_at_object, double k) {
    const double d = norm(sensor_pos - object.position);
    if (d <= object.radius_m)
        throw DegenerateGeometry("sensor-object distance must exceed object radius");
    const double r3 = object.radius_m * object.radius_m * object.radius_m;
    return object.contrast * r3 * emitter_amplitude_at_object * k / (d * d * d * d);
}

double conspecific_field(const ConspecificSpec& c, Vec2 at, double t,
                         double range_m, bool chirp_free) {
    const double d = norm(at - c.position);
    const double atten = 1.0 / (1.0 + (d * d) / (range_m * range_m));
    const double w = chirp_free ? eod_waveform(c.source, t)
                                : chirped_waveform(c.source, c.chirps, t);
    return w * atten;
}

SensorFrame render_frame(const Scene& scene, const SensorGeometry& geometry, double t) {
    SensorFrame frame;
    frame.time_s = t;
    frame.samples.assign(static_cast<size_t>(geometry.count), 0.0);

    const double self_v = eod_waveform(scene.self_source, t);

    for (int i = 0; i < geometry.count; ++i) {
        const Vec2 p = geometry.sensor_positions[i];
        double v = self_v;  // own field is uniform over the skin
        for (const auto& obj : scene.objects) {
            // The field illuminating the object: self EOD plus chirp-free
            // conspecific carriers attenuated by distance to the object.
            double emitter = self_v;
            for (const auto& c : scene.conspecifics)
                emitter += conspecific_field(c, obj.position, t, scene.conspecific_range_m, true);
            v += object_perturbation(obj, p, emitter, scene.perturbation_k);
        }
        for (const auto& c : scene.conspecifics)
            v += conspecific_field(c, p, t, scene.conspecific_range_m);
        frame.samples[static_cast<size_t>(i)] = v;
    }
    return frame;
}

Scene step_scene(const Scene& scene, double dt) {
    Scene next = scene;
    for (size_t i = 0; i < next.objects.size(); ++i)
        next.objects[i].position = next.objects[i].position + next.object_velocities[i] * dt;
    return next;
}

}  // namespace webca::env
