#pragma once

#include "knotfield/loop.hpp"

#include <cstdint>
#include <functional>
#include <random>

namespace knotfield {

using Rng = std::mt19937_64;

// SplitMix64 finaliser; stream i of master seed s is seeded with
// derive_seed(s, i). Counter based, so the seed of a trial does not depend on
// which worker runs it or in which order.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

enum class NoiseKind { Isotropic, Cylindrical };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Isotropic;
    double sigma = 0.0;
};

// Re-samples Gaussian vertex noise around a fixed nominal loop. The nominal
// frame is fitted once; cylindrical noise moves each vertex along its radial
// direction (from the nominal centroid, in the nominal plane) and along the
// plane normal only.
class LoopPerturber {
public:
    LoopPerturber(Loop nominal, NoiseSpec spec);

    Loop operator()(Rng& rng) const;

    const Loop& nominal() const { return nominal_; }
    const LoopFrame& frame() const { return frame_; }

private:
    Loop nominal_;
    NoiseSpec spec_;
    LoopFrame frame_;
    std::vector<Vec3> radial_;
};

Loop perturb(const Loop& nominal, const NoiseSpec& spec, Rng& rng);

enum class WaveDirection { Parallel, Perpendicular };

struct WaveSpec {
    double amplitude = 0.0;
    WaveDirection direction = WaveDirection::Perpendicular;
    int spatial_frequency = 2;
    // Angular frequency [rad/s] as a function of time; the phase is its
    // integral from 0. Defaults to a linear chirp.
    std::function<double(double)> temporal_frequency = [](double t) { return 1.0 + 0.5 * t; };

    void validate() const;
    double phase(double t) const;
};

// Amplitude over mean vertex distance from the centroid.
double wave_ratio(const Loop& nominal, const WaveSpec& spec);

class LoopWave {
public:
    LoopWave(Loop nominal, WaveSpec spec);

    Loop at(double t) const;
    double ratio() const;
    const LoopFrame& frame() const { return frame_; }

private:
    Loop nominal_;
    WaveSpec spec_;
    LoopFrame frame_;
    std::vector<double> angle_;
    std::vector<Vec3> radial_;
};

Loop deform_wave(const Loop& nominal, const WaveSpec& spec, double t);

struct MotionSpec {
    std::function<Eigen::Isometry3d(double)> pose = [](double) { return Eigen::Isometry3d::Identity(); };
    double max_speed = 0.0;
    double max_accel = 0.0;
};

// Pure translation: starts at rest, accelerates at `accel` up to `speed`
// along `direction`.
MotionSpec translation_motion(const Vec3& direction, double speed, double accel);

// Rotation about a fixed axis through `pivot` at constant angular rate.
MotionSpec rotation_motion(const Vec3& pivot, const Vec3& axis, double rate);

struct MotionBounds {
    double peak_speed = 0.0; // fastest vertex speed, finite differences
    double peak_accel = 0.0;
};

MotionBounds measure_motion(const MotionSpec& spec, const Loop& nominal, double t_end, double dt);

Loop move_loop(const Loop& nominal, const MotionSpec& spec, double t);

} // namespace knotfield
