#include "knotfield/perturbation.hpp"

#include "knotfield/error.hpp"

#include <cmath>
#include <string>

namespace knotfield {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

std::string_view to_string(NoiseKind kind) {
    return kind == NoiseKind::Isotropic ? "isotropic" : "cylindrical";
}

NoiseKind parse_noise_kind(std::string_view text) {
    if (text == "isotropic") return NoiseKind::Isotropic;
    if (text == "cylindrical" || text == "radial") return NoiseKind::Cylindrical;
    throw Error(ErrorKind::Parse, "unknown noise kind '" + std::string(text) + "'");
}

namespace {

std::vector<Vec3> radial_directions(const Loop& loop, const LoopFrame& frame) {
    std::vector<Vec3> out;
    out.reserve(loop.size());
    for (const auto& v : loop.vertices()) {
        Vec3 d = v - frame.centroid;
        d -= frame.normal * frame.normal.dot(d);
        const double n = d.norm();
        out.push_back(n > 0.0 ? Vec3(d / n) : frame.in_plane1);
    }
    return out;
}

} // namespace

LoopPerturber::LoopPerturber(Loop nominal, NoiseSpec spec)
    : nominal_(std::move(nominal)), spec_(spec), frame_(fit_plane_frame(nominal_)) {
    if (!(spec_.sigma >= 0.0) || !std::isfinite(spec_.sigma)) {
        throw Error(ErrorKind::InvalidParameter, "noise sigma must be non-negative");
    }
    radial_ = radial_directions(nominal_, frame_);
}

Loop LoopPerturber::operator()(Rng& rng) const {
    if (spec_.sigma == 0.0) return nominal_;
    std::normal_distribution<double> gauss(0.0, spec_.sigma);
    std::vector<Vec3> out(nominal_.vertices().begin(), nominal_.vertices().end());
    if (spec_.kind == NoiseKind::Isotropic) {
        for (auto& v : out) {
            const double dx = gauss(rng);
            const double dy = gauss(rng);
            const double dz = gauss(rng);
            v += Vec3(dx, dy, dz);
        }
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double dr = gauss(rng);
            const double dn = gauss(rng);
            out[i] += dr * radial_[i] + dn * frame_.normal;
        }
    }
    return Loop(std::move(out));
}

Loop perturb(const Loop& nominal, const NoiseSpec& spec, Rng& rng) {
    return LoopPerturber(nominal, spec)(rng);
}

void WaveSpec::validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw Error(ErrorKind::InvalidParameter, "wave amplitude must be non-negative");
    }
    if (spatial_frequency < 1) {
        throw Error(ErrorKind::InvalidParameter, "spatial frequency must be a positive integer");
    }
    if (!temporal_frequency) throw Error(ErrorKind::InvalidParameter, "temporal frequency is unset");
}

double WaveSpec::phase(double t) const {
    // Composite Simpson; exact for the polynomial chirps used by default.
    constexpr int panels = 64;
    if (t == 0.0) return 0.0;
    const double h = t / panels;
    double sum = temporal_frequency(0.0) + temporal_frequency(t);
    for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * temporal_frequency(i * h);
    return sum * h / 3.0;
}

double wave_ratio(const Loop& nominal, const WaveSpec& spec) {
    const Vec3 c = nominal.centroid();
    double mean = 0.0;
    for (const auto& v : nominal.vertices()) mean += (v - c).norm();
    mean /= static_cast<double>(nominal.size());
    return spec.amplitude / mean;
}

LoopWave::LoopWave(Loop nominal, WaveSpec spec)
    : nominal_(std::move(nominal)), spec_(std::move(spec)), frame_(fit_plane_frame(nominal_)) {
    spec_.validate();
    radial_ = radial_directions(nominal_, frame_);
    angle_.reserve(nominal_.size());
    for (const auto& v : nominal_.vertices()) {
        const Vec2 q = frame_.project(v);
        angle_.push_back(std::atan2(q.y(), q.x()));
    }
}

Loop LoopWave::at(double t) const {
    if (spec_.amplitude == 0.0) return nominal_;
    const double phase = spec_.phase(t);
    std::vector<Vec3> out(nominal_.vertices().begin(), nominal_.vertices().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = spec_.amplitude * std::cos(spec_.spatial_frequency * angle_[i] + phase);
        out[i] += d * (spec_.direction == WaveDirection::Parallel ? radial_[i] : frame_.normal);
    }
    return Loop(std::move(out));
}

double LoopWave::ratio() const { return wave_ratio(nominal_, spec_); }

Loop deform_wave(const Loop& nominal, const WaveSpec& spec, double t) {
    return LoopWave(nominal, spec).at(t);
}

MotionSpec translation_motion(const Vec3& direction, double speed, double accel) {
    if (!(speed >= 0.0) || !(accel > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "translation needs speed >= 0 and accel > 0");
    }
    const Vec3 u = direction.normalized();
    MotionSpec spec;
    spec.max_speed = speed;
    spec.max_accel = accel;
    spec.pose = [u, speed, accel](double t) {
        const double t_ramp = speed / accel;
        double s = 0.0;
        if (t <= 0.0) {
            s = 0.0;
        } else if (t < t_ramp) {
            s = 0.5 * accel * t * t;
        } else {
            s = 0.5 * accel * t_ramp * t_ramp + speed * (t - t_ramp);
        }
        Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
        pose.translation() = s * u;
        return pose;
    };
    return spec;
}

MotionSpec rotation_motion(const Vec3& pivot, const Vec3& axis, double rate) {
    const Vec3 u = axis.normalized();
    MotionSpec spec;
    spec.max_speed = 0.0; // depends on the loop extent; see measure_motion
    spec.max_accel = 0.0;
    spec.pose = [pivot, u, rate](double t) {
        Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
        pose.translate(pivot);
        pose.rotate(Eigen::AngleAxisd(rate * t, u));
        pose.translate(-pivot);
        return pose;
    };
    return spec;
}

MotionBounds measure_motion(const MotionSpec& spec, const Loop& nominal, double t_end, double dt) {
    MotionBounds bounds;
    const int steps = static_cast<int>(std::ceil(t_end / dt));
    for (const auto& v : nominal.vertices()) {
        Vec3 prev = spec.pose(0.0) * v;
        Vec3 prev_vel = Vec3::Zero();
        for (int i = 1; i <= steps; ++i) {
            const Vec3 cur = spec.pose(i * dt) * v;
            const Vec3 vel = (cur - prev) / dt;
            bounds.peak_speed = std::max(bounds.peak_speed, vel.norm());
            if (i > 1) bounds.peak_accel = std::max(bounds.peak_accel, ((vel - prev_vel) / dt).norm());
            prev = cur;
            prev_vel = vel;
        }
    }
    return bounds;
}

Loop move_loop(const Loop& nominal, const MotionSpec& spec, double t) {
    return nominal.transformed(spec.pose(t));
}

} // namespace knotfield
