#pragma once

#include "knotfield/behavior_tree.hpp"
#include "knotfield/insertion.hpp"
#include "knotfield/loop.hpp"
#include "knotfield/perturbation.hpp"
#include "knotfield/rope.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace knotfield {

struct RobotParams {
    double reach = 1.0;            // from the shoulder point
    double shoulder_height = 0.4;
    double arm_speed = 0.02;       // m per tick
    double grasp_tolerance = 1e-3;
    double base_speed = 0.01;      // m per tick
    double base_turn_rate = 0.1;   // rad per tick
    double base_tolerance = 1e-3;  // m and rad, first arrival
    double track_tolerance = 0.05; // m and rad, while following a moving anchor afterwards
    double standoff = 0.45;        // horizontal distance base -> anchor centroid
};

// The gripper holding Rf draws a widening circle in the plane facing the
// robot, starting across its own incoming strand, and keeps going until its
// trail crosses that strand in the facing view.
struct TwistParams {
    double rate = 0.05;           // rad per tick along the circle
    double forward = 0.32;        // twist pose, base frame
    double half_width = 0.15;
    double height = 0.45;
    double radius = 0.07;         // m, at the start
    double growth = 0.5;          // radius gain per turn, relative
    double max_overshoot = 3.0;   // rad past a full turn before giving up
    double margin = 0.3;          // rad past the new crossing
    double drift = 0.02;          // m per turn towards the robot
};

struct SceneParams {
    std::size_t rope_points = 61;
    double rope_segment = 0.02;
    Vec3 rope_start{0.30, -0.60, 0.30}; // R0
    Vec3 rope_direction{0.0, 1.0, 0.0};
    double rope_jitter = 0.02;          // rad, per-segment bend drawn from the world seed
    Vec3 arm1_start{0.25, -0.20, 0.45};
    Vec3 arm2_start{0.25, 0.20, 0.45};
};

struct KnotConfig {
    RobotParams robot;
    TwistParams twist;
    SceneParams scene;
    InsertionParams insertion;
    double turn_rate = 0.05;          // rad per tick for TurnBase
    double receiver_standoff = 0.12;  // far-side start of the receiving arm
    int max_ticks = 20000;

    KnotConfig();
    void validate() const;
};

struct BasePose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;

    Vec3 forward() const;
    Vec3 left() const;
    // Base frame (forward, left, up) to world, origin on the floor.
    Eigen::Isometry3d pose() const;
};

struct ArmState {
    Vec3 position = Vec3::Zero();
    bool closed = false;
    std::optional<std::size_t> binding;
};

// Ticked state of the robot, rope and anchoring loop. Single-threaded.
class KnotWorld {
public:
    KnotWorld(KnotConfig config, LoopProvider anchor, std::uint64_t seed);

    const KnotConfig& config() const { return config_; }
    int tick() const { return tick_; }

    // Anchoring loop at the current tick.
    const Loop& anchor() const { return *anchor_now_; }

    Rope& rope() { return rope_; }
    const Rope& rope() const { return rope_; }
    BasePose& base() { return base_; }
    const BasePose& base() const { return base_; }
    ArmState& arm(int i) { return arms_.at(static_cast<std::size_t>(i)); }
    const ArmState& arm(int i) const { return arms_.at(static_cast<std::size_t>(i)); }

    Vec3 shoulder() const;
    bool reachable(const Vec3& p) const;

    // Arm holding rope point `index`, if any (lowest arm number first).
    std::optional<int> holder(std::size_t index) const;
    std::optional<int> free_arm() const;

    // Proportional step clipped to arm speed. Returns true once at the target.
    bool move_arm_towards(int arm, const Vec3& target);

    // Moves the base one clipped step towards `ref`; arms ride along.
    void move_base_towards(const BasePose& ref);

    double heading_offset() const { return heading_offset_; }
    void add_heading_offset(double d) { heading_offset_ += d; }
    // Base pose step 1 tracks: standoff from the anchor on the robot side,
    // facing it, plus the accumulated TurnBase offset.
    BasePose base_reference() const;

    void begin_tick();
    // Applies gripper bindings to the rope.
    void end_tick();

private:
    KnotConfig config_;
    LoopProvider anchor_provider_;
    std::optional<Loop> anchor_now_;
    Vec3 anchor_side_;
    Rope rope_;
    BasePose base_;
    std::array<ArmState, 2> arms_;
    double heading_offset_ = 0.0;
    int tick_ = -1;
};

// Crossing of two non-adjacent rope segments (i < j) in the projection along
// `view`.
struct RopeCrossing {
    std::size_t i;
    std::size_t j;
};

std::vector<RopeCrossing> rope_crossings(std::span<const Vec3> points, const Vec3& view);

inline constexpr std::size_t kMinRopeLoopVertices = 8;

struct RopeLoop {
    std::size_t first; // rope indices of the loop vertices, inclusive
    std::size_t last;
    Loop loop;
};

// Rope points strictly between a crossing's segments, closed by the chord.
// Among loops with at least kMinRopeLoopVertices vertices, takes the one
// nearest the Rf end (loops are made there), then the shortest.
// Oriented so that its normal points along `view`. Throws NoLoop.
RopeLoop extract_rope_loop(const Rope& rope, const Vec3& view);

// Loop through rope points [first, last], normal along `view`.
Loop rope_loop(const Rope& rope, std::size_t first, std::size_t last, const Vec3& view);

// Rope closed by rays leaving both ends along their tangents, joined far
// above; used to measure threading with the linking number.
std::vector<Vec3> close_rope(const Rope& rope, double ray_length = 5.0, double lift = 10.0);

// |linking number| between the closed rope and the loop.
int link_check(const Rope& rope, const Loop& loop);

// One line of a program: a step number of the trefoil sequence, with 6
// optionally refined to 6.1 (TurnBase) or 6.2 (Twist).
struct ProgramStep {
    int number;        // 1..10
    int variant = 0;   // 0, or 1/2 for step 6

    std::string label() const;
    friend bool operator==(const ProgramStep&, const ProgramStep&) = default;
};

struct KnotProgram {
    std::string name;
    std::vector<ProgramStep> steps;
};

// unknot, 3_1, 4_1, 5_2, 7_3.
KnotProgram builtin_program(const std::string& name);
const std::vector<std::string>& builtin_program_names();
// Lines "step N" or "step 6.1"; '#' comments; optional "name X" line.
KnotProgram read_program(std::istream& in);
KnotProgram read_program_file(const std::string& path);

struct StepRecord {
    std::string step;
    Status status;
    int tick;
};

struct TickRecord {
    int tick;
    std::string active_step;
    Status status;
    BasePose base;
    Vec3 arm1;
    Vec3 arm2;
};

struct KnotResult {
    bool completed = false;
    int insertion_count = 0;
    int twist_count = 0;
    std::optional<int> link_check;
    int ticks = 0;
    std::string error;
    std::vector<StepRecord> steps;
    std::vector<TickRecord> log;
    std::optional<Rope> final_rope;
};

// Builds the tree: Sequence[1, SequenceStar[Sequence[2, 3], 4, 5, ...]].
// A bare step 6 becomes Selector*[6.1, 6.2].
NodePtr build_tree(const KnotProgram& program, KnotWorld& world, KnotResult& result);

KnotResult run_program(const KnotProgram& program, const KnotConfig& config, const LoopProvider& anchor,
                       std::uint64_t seed);

enum class AnchorMotion { Static, Wave, Moving };

std::string_view to_string(AnchorMotion m);
AnchorMotion parse_anchor_motion(std::string_view text);

// Anchoring loop: a circle facing the robot, optionally deformed by a
// travelling cosine wave or moved back and forth in its plane.
struct AnchorParams {
    AnchorMotion motion = AnchorMotion::Static;
    double radius = 0.1;
    Vec3 centre{0.45, 0.0, 0.40};
    Vec3 normal{1.0, 0.0, 0.0};
    int refine = 1;                  // vertices = 48 * refine
    double wave_ratio = 0.2;         // amplitude / radius
    WaveDirection wave_direction = WaveDirection::Perpendicular;
    int spatial_frequency = 2;
    double speed_fraction = 0.5;     // peak speed / base speed
    double travel = 0.1;             // m, half the swing
    double tick_seconds = 0.05;      // wave time per tick

    void validate() const;
};

Loop anchor_loop(const AnchorParams& params);

// Moving: the swing direction in the loop plane comes from the seed; the
// swing starts at rest, x(t) = travel * (1 - cos(w t)).
LoopProvider make_anchor(const AnchorParams& params, const KnotConfig& config, std::uint64_t seed);

// anchor_loop(AnchorParams{}).
Loop default_anchor();

void write_tick_log_csv(std::ostream& out, const std::vector<TickRecord>& log);

} // namespace knotfield
