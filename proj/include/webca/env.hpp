#pragma once

#include <array>
#include <vector>

#include "webca/errors.hpp"

namespace webca::env {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
double norm(Vec2 a);

enum class EodKind { SineWave, BiphasicPulse };

struct EodSource {
    double frequency_hz = 0.0;
    double amplitude_v = 0.0;
    double phase_rad = 0.0;  // normalized to [0, 2pi)
    EodKind kind = EodKind::SineWave;
};

struct Chirp {
    double onset_s = 0.0;
    double duration_s = 0.0;
    double excursion_hz = 0.0;
};

struct ObjectSpec {
    Vec2 position;        // body frame, meters
    double radius_m = 0.0;
    double contrast = 0.0;  // [-1, +1], sign: conductor vs insulator
};

struct ConspecificSpec {
    Vec2 position;
    EodSource source;
    std::vector<Chirp> chirps;  // sorted by onset, non-overlapping
};

struct Scene {
    EodSource self_source;
    std::vector<ObjectSpec> objects;
    std::vector<ConspecificSpec> conspecifics;
    std::vector<Vec2> object_velocities;  // one per object
    double perturbation_k = 1.0;
    double conspecific_range_m = 0.1;  // attenuation length scale
};

struct SensorGeometry {
    std::vector<Vec2> sensor_positions;  // strictly ordered along body axis
    double pitch_m = 0.0;
    int count = 0;
};

struct SensorFrame {
    double time_s = 0.0;
    std::vector<double> samples;  // volts, one per sensor
};

// Centered linear array on the body axis (y = 0).
SensorGeometry make_linear_array(int count, double pitch_m);
void validate(const SensorGeometry& g);
void validate(const Scene& s);

double eod_waveform(const EodSource& source, double t);

// Carrier of a chirping source: instantaneous frequency is base + excursion
// inside each chirp window, phase-continuous across window edges.
double chirped_waveform(const EodSource& source, const std::vector<Chirp>& chirps, double t);

// Small-sphere perturbation: contrast * radius^3 * emitter * K / d^4.
double object_perturbation(const ObjectSpec& object, Vec2 sensor_pos,
                           double emitter_amplitude_at_object, double k = 1.0);

// Conspecific field sampled at a point, chirps applied unless chirp_free.
double conspecific_field(const ConspecificSpec& c, Vec2 at, double t,
                         double range_m, bool chirp_free = false);

SensorFrame render_frame(const Scene& scene, const SensorGeometry& geometry, double t);

Scene step_scene(const Scene& scene, double dt);

}  // namespace webca::env
