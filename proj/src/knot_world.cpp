#include "knotfield/knot.hpp"

#include "knotfield/error.hpp"
#include "knotfield/linking.hpp"
#include "knotfield/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace knotfield {

namespace {

double wrap_angle(double a) {
    a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a - std::numbers::pi;
}

Vec3 horizontal(const Vec3& v) { return {v.x(), v.y(), 0.0}; }

Rope initial_rope(const SceneParams& scene, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0));
    std::normal_distribution<double> bend(0.0, scene.rope_jitter);
    const Vec3 u = scene.rope_direction.normalized();
    const Vec3 a = u.unitOrthogonal();
    const Vec3 b = u.cross(a);
    std::vector<Vec3> pts{scene.rope_start};
    Vec3 dir = u;
    for (std::size_t i = 1; i < scene.rope_points; ++i) {
        if (scene.rope_jitter > 0.0) {
            dir = (dir + bend(rng) * a + bend(rng) * b).normalized();
        }
        pts.push_back(pts.back() + scene.rope_segment * dir);
    }
    return Rope(std::move(pts), scene.rope_segment);
}

} // namespace

KnotConfig::KnotConfig() {
    insertion.field.gamma = 0.01;
    insertion.stop_persistence = 3;
    insertion.max_iters = 1000;
}

void KnotConfig::validate() const {
    insertion.validate();
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidParameter, std::string(what) + " must be positive");
    };
    positive(robot.reach, "reach");
    positive(robot.arm_speed, "arm speed");
    positive(robot.grasp_tolerance, "grasp tolerance");
    positive(robot.base_speed, "base speed");
    positive(robot.base_turn_rate, "base turn rate");
    positive(robot.base_tolerance, "base tolerance");
    positive(robot.track_tolerance, "track tolerance");
    positive(twist.rate, "twist rate");
    positive(twist.radius, "twist radius");
    if (!(twist.growth >= 0.0) || !(twist.max_overshoot >= 0.0) || !(twist.margin >= 0.0) || !std::isfinite(twist.drift)) {
        throw Error(ErrorKind::InvalidParameter, "twist growth, overshoot and margin must be non-negative");
    }
    positive(turn_rate, "turn rate");
    positive(receiver_standoff, "receiver standoff");
    positive(scene.rope_segment, "rope segment");
    if (scene.rope_points < 3) throw Error(ErrorKind::InvalidParameter, "rope needs at least 3 points");
    if (max_ticks < 1) throw Error(ErrorKind::InvalidParameter, "max ticks must be >= 1");
}

Vec3 BasePose::forward() const { return {std::cos(heading), std::sin(heading), 0.0}; }
Vec3 BasePose::left() const { return {-std::sin(heading), std::cos(heading), 0.0}; }

Eigen::Isometry3d BasePose::pose() const {
    Eigen::Isometry3d p = Eigen::Isometry3d::Identity();
    p.translate(Vec3(x, y, 0.0));
    p.rotate(Eigen::AngleAxisd(heading, Vec3::UnitZ()));
    return p;
}

KnotWorld::KnotWorld(KnotConfig config, LoopProvider anchor, std::uint64_t seed)
    : config_(std::move(config)), anchor_provider_(std::move(anchor)),
      rope_(initial_rope(config_.scene, seed)) {
    config_.validate();
    if (!anchor_provider_) throw Error(ErrorKind::InvalidParameter, "anchor provider is empty");
    arms_[0].position = config_.scene.arm1_start;
    arms_[1].position = config_.scene.arm2_start;
    const Loop first = anchor_provider_(0);
    Vec3 side = horizontal(Vec3(base_.x, base_.y, 0.0) - first.centroid());
    if (side.norm() < 1e-9) side = -Vec3::UnitX();
    anchor_side_ = side.normalized();
}

Vec3 KnotWorld::shoulder() const { return {base_.x, base_.y, config_.robot.shoulder_height}; }

bool KnotWorld::reachable(const Vec3& p) const { return (p - shoulder()).norm() <= config_.robot.reach; }

std::optional<int> KnotWorld::holder(std::size_t index) const {
    for (int i = 0; i < 2; ++i) {
        if (arm(i).closed && arm(i).binding == index) return i;
    }
    return std::nullopt;
}

std::optional<int> KnotWorld::free_arm() const {
    for (int i = 0; i < 2; ++i) {
        if (!arm(i).closed) return i;
    }
    return std::nullopt;
}

bool KnotWorld::move_arm_towards(int i, const Vec3& target) {
    Vec3& p = arm(i).position;
    const Vec3 d = target - p;
    const double n = d.norm();
    if (n <= config_.robot.arm_speed) {
        p = target;
        return true;
    }
    p += d * (config_.robot.arm_speed / n);
    return false;
}

void KnotWorld::move_base_towards(const BasePose& ref) {
    const Eigen::Isometry3d before = base_.pose();
    Eigen::Vector2d d(ref.x - base_.x, ref.y - base_.y);
    const double n = d.norm();
    if (n > config_.robot.base_speed) d *= config_.robot.base_speed / n;
    double dh = wrap_angle(ref.heading - base_.heading);
    dh = std::clamp(dh, -config_.robot.base_turn_rate, config_.robot.base_turn_rate);
    base_.x += d.x();
    base_.y += d.y();
    base_.heading += dh;
    const Eigen::Isometry3d motion = base_.pose() * before.inverse();
    for (auto& a : arms_) a.position = motion * a.position;
}

BasePose KnotWorld::base_reference() const {
    const Vec3 c = anchor().centroid();
    BasePose ref;
    ref.x = c.x() + config_.robot.standoff * anchor_side_.x();
    ref.y = c.y() + config_.robot.standoff * anchor_side_.y();
    ref.heading = std::atan2(-anchor_side_.y(), -anchor_side_.x()) + heading_offset_;
    // Keep the reference on the same branch as the current heading.
    ref.heading = base_.heading + wrap_angle(ref.heading - base_.heading);
    return ref;
}

void KnotWorld::begin_tick() {
    ++tick_;
    anchor_now_.emplace(anchor_provider_(tick_));
}

void KnotWorld::end_tick() {
    std::vector<Pin> pins;
    for (const auto& a : arms_) {
        if (a.closed && a.binding) pins.push_back({*a.binding, a.position});
    }
    rope_.update(pins);
    for (auto& a : arms_) {
        if (a.closed && a.binding) a.position = rope_[*a.binding];
    }
}

namespace {

struct ViewBasis {
    Vec3 u;
    Vec3 v;
};

ViewBasis view_basis(const Vec3& view) {
    const Vec3 w = view.normalized();
    Vec3 up = Vec3::UnitZ() - w * w.z();
    if (up.norm() < 1e-9) up = Vec3::UnitX() - w * w.x();
    up.normalize();
    return {up.cross(w), up};
}

// Proper intersection of p0p1 and q0q1, half-open at the far ends so that a
// crossing through a shared vertex is counted once.
bool segments_cross(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1) {
    const Vec2 r = p1 - p0;
    const Vec2 s = q1 - q0;
    const double denom = r.x() * s.y() - r.y() * s.x();
    if (std::abs(denom) < 1e-18) return false;
    const Vec2 d = q0 - p0;
    const double t = (d.x() * s.y() - d.y() * s.x()) / denom;
    const double u = (d.x() * r.y() - d.y() * r.x()) / denom;
    return t >= 0.0 && t < 1.0 && u >= 0.0 && u < 1.0;
}

} // namespace

std::vector<RopeCrossing> rope_crossings(std::span<const Vec3> points, const Vec3& view) {
    const ViewBasis basis = view_basis(view);
    std::vector<Vec2> q;
    q.reserve(points.size());
    for (const auto& p : points) q.emplace_back(p.dot(basis.u), p.dot(basis.v));
    std::vector<RopeCrossing> out;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        for (std::size_t j = i + 2; j + 1 < q.size(); ++j) {
            if (segments_cross(q[i], q[i + 1], q[j], q[j + 1])) out.push_back({i, j});
        }
    }
    return out;
}

Loop rope_loop(const Rope& rope, std::size_t first, std::size_t last, const Vec3& view) {
    if (last >= rope.size() || last < first + 2) throw Error(ErrorKind::InvalidParameter, "rope loop range is too short");
    std::vector<Vec3> v(rope.points().begin() + static_cast<std::ptrdiff_t>(first),
                        rope.points().begin() + static_cast<std::ptrdiff_t>(last) + 1);
    Loop loop(std::move(v));
    return loop.vector_area().dot(view) < 0.0 ? loop.reversed() : loop;
}

RopeLoop extract_rope_loop(const Rope& rope, const Vec3& view) {
    std::optional<RopeCrossing> best;
    for (const auto& c : rope_crossings(rope.points(), view)) {
        if (c.j - c.i < kMinRopeLoopVertices) continue;
        // Nearest the Rf end, where the loops are made; then the shortest.
        if (!best || c.i > best->i || (c.i == best->i && c.j < best->j)) best = c;
    }
    if (!best) throw Error(ErrorKind::NoLoop, "rope has no crossing enclosing a loop");
    return {best->i + 1, best->j, rope_loop(rope, best->i + 1, best->j, view)};
}

std::vector<Vec3> close_rope(const Rope& rope, double ray_length, double lift) {
    std::vector<Vec3> pts(rope.points().begin(), rope.points().end());
    const std::size_t n = pts.size();
    const Vec3 head = pts[n - 1] + ray_length * (pts[n - 1] - pts[n - 2]).normalized();
    const Vec3 tail = pts[0] + ray_length * (pts[0] - pts[1]).normalized();
    const Vec3 up(0.0, 0.0, lift);
    pts.push_back(head);
    pts.push_back(head + up);
    pts.push_back(tail + up);
    pts.push_back(tail);
    return pts;
}

int link_check(const Rope& rope, const Loop& loop) {
    const auto closed = close_rope(rope);
    return std::abs(linking_number(closed, loop.vertices()));
}

std::string_view to_string(AnchorMotion m) {
    switch (m) {
    case AnchorMotion::Static: return "static";
    case AnchorMotion::Wave: return "wave";
    case AnchorMotion::Moving: return "moving";
    }
    return "?";
}

AnchorMotion parse_anchor_motion(std::string_view text) {
    for (auto m : {AnchorMotion::Static, AnchorMotion::Wave, AnchorMotion::Moving}) {
        if (text == to_string(m)) return m;
    }
    throw Error(ErrorKind::InvalidParameter, "unknown anchor motion '" + std::string(text) + "'");
}

void AnchorParams::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(ErrorKind::InvalidParameter, "anchor radius must be positive");
    if (refine < 1) throw Error(ErrorKind::InvalidParameter, "anchor refinement must be >= 1");
    if (!(normal.norm() > 0.0)) throw Error(ErrorKind::InvalidParameter, "anchor normal must be non-zero");
    if (!(wave_ratio >= 0.0)) throw Error(ErrorKind::InvalidParameter, "wave ratio must be non-negative");
    if (!(speed_fraction >= 0.0)) throw Error(ErrorKind::InvalidParameter, "speed fraction must be non-negative");
    if (!(travel > 0.0)) throw Error(ErrorKind::InvalidParameter, "travel must be positive");
    if (!(tick_seconds > 0.0)) throw Error(ErrorKind::InvalidParameter, "tick duration must be positive");
}

Loop anchor_loop(const AnchorParams& params) {
    params.validate();
    return make_circle(params.radius, 2.0 * std::numbers::pi / (48.0 * params.refine), params.centre,
                       params.normal.normalized());
}

LoopProvider make_anchor(const AnchorParams& params, const KnotConfig& config, std::uint64_t seed) {
    Loop nominal = anchor_loop(params);
    switch (params.motion) {
    case AnchorMotion::Static:
        return [nominal](int) { return nominal; };
    case AnchorMotion::Wave: {
        WaveSpec spec;
        spec.amplitude = params.wave_ratio * params.radius;
        spec.direction = params.wave_direction;
        spec.spatial_frequency = params.spatial_frequency;
        auto wave = std::make_shared<LoopWave>(std::move(nominal), std::move(spec));
        const double dt = params.tick_seconds;
        return [wave, dt](int tick) { return wave->at(tick * dt); };
    }
    case AnchorMotion::Moving: {
        Rng rng(derive_seed(seed, 1));
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        const LoopFrame frame = fit_plane_frame(nominal);
        const double a = angle(rng);
        const Vec3 dir = std::cos(a) * frame.in_plane1 + std::sin(a) * frame.in_plane2;
        const double speed = params.speed_fraction * config.robot.base_speed; // m per tick
        const double w = speed / params.travel;                                // rad per tick
        MotionSpec motion;
        motion.pose = [dir, w, travel = params.travel](double tick) {
            Eigen::Isometry3d p = Eigen::Isometry3d::Identity();
            p.translate(travel * (1.0 - std::cos(w * tick)) * dir);
            return p;
        };
        motion.max_speed = speed;
        motion.max_accel = speed * w;
        return [nominal, motion](int tick) { return move_loop(nominal, motion, tick); };
    }
    }
    throw Error(ErrorKind::InvalidParameter, "unknown anchor motion");
}

Loop default_anchor() { return anchor_loop(AnchorParams{}); }

} // namespace knotfield
