#include "knot_actions.hpp"

#include "knotfield/error.hpp"
#include "knotfield/field.hpp"

#include <cmath>
#include <numbers>

namespace knotfield::actions {

namespace {

std::size_t index_of(const KnotWorld& w, RopeEnd end) {
    return end == RopeEnd::Start ? w.rope().first() : w.rope().last();
}

// Logs finished runs and resets per-run state.
class Action : public Node {
public:
    Action(Context& ctx, std::string label) : Node(std::move(label)), ctx_(ctx) {}

    Status tick() final {
        ctx_.active = name();
        const Status s = step();
        if (s != Status::Running) {
            ctx_.log(*this, s);
            if (s == Status::Success) on_success();
            reset();
        }
        return s;
    }

protected:
    virtual Status step() = 0;
    virtual void on_success() {}

    KnotWorld& world() { return ctx_.world; }
    KnotResult& result() { return ctx_.result; }

private:
    Context& ctx_;
};

class ApproachLoop : public Node {
public:
    explicit ApproachLoop(Context& ctx) : Node("1"), ctx_(ctx) {}

    Status tick() override {
        KnotWorld& w = ctx_.world;
        const BasePose ref = w.base_reference();
        w.move_base_towards(ref);
        const BasePose& b = w.base();
        const double tol = arrived_ ? w.config().robot.track_tolerance : w.config().robot.base_tolerance;
        const bool ok = std::hypot(ref.x - b.x, ref.y - b.y) <= tol && std::abs(ref.heading - b.heading) <= tol;
        arrived_ = arrived_ || ok;
        const Status s = ok ? Status::Success : Status::Running;
        if (s != last_) {
            ctx_.log(*this, s);
            last_ = s;
        }
        if (s == Status::Running) ctx_.active = name();
        return s;
    }

private:
    Context& ctx_;
    std::optional<Status> last_;
    bool arrived_ = false;
};

class Grasp : public Action {
public:
    Grasp(Context& ctx, std::string label, RopeEnd end, int arm) : Action(ctx, std::move(label)), end_(end), fixed_(arm) {}

    void reset() override { arm_.reset(); }

protected:
    Status step() override {
        KnotWorld& w = world();
        const std::size_t target = index_of(w, end_);
        if (!arm_) {
            if (fixed_ >= 0) {
                arm_ = fixed_;
            } else if (auto h = w.holder(target)) {
                arm_ = *h;
            } else if (auto f = w.free_arm()) {
                arm_ = *f;
            } else {
                return Status::Failure;
            }
        }
        ArmState& a = w.arm(*arm_);
        if (a.closed) return a.binding == target ? Status::Success : Status::Failure;
        // A held point is where its gripper is; the rope catches up at the
        // end of the tick.
        const auto other = w.holder(target);
        const Vec3 goal = other ? w.arm(*other).position : w.rope()[target];
        if (!w.reachable(goal)) return Status::Failure;
        w.move_arm_towards(*arm_, goal);
        if ((a.position - goal).norm() > w.config().robot.grasp_tolerance) return Status::Running;
        a.position = goal;
        a.closed = true;
        a.binding = target;
        return Status::Success;
    }

private:
    RopeEnd end_;
    int fixed_;
    std::optional<int> arm_;
};

class Release : public Action {
public:
    Release(Context& ctx, std::string label, RopeEnd end) : Action(ctx, std::move(label)), end_(end) {}

    void reset() override { opened_ = false; }

protected:
    Status step() override {
        if (opened_) return Status::Success;
        KnotWorld& w = world();
        const auto h = w.holder(index_of(w, end_));
        if (!h) return Status::Success;
        // The reference stays where the gripper is; only the gripper opens.
        ArmState& a = w.arm(*h);
        a.closed = false;
        a.binding.reset();
        opened_ = true;
        return Status::Running;
    }

private:
    RopeEnd end_;
    bool opened_ = false;
};

class HandOver : public Action {
public:
    HandOver(Context& ctx, std::string label, RopeEnd end) : Action(ctx, std::move(label)), end_(end) {}

    void reset() override {
        from_.reset();
        released_ = false;
    }

protected:
    Status step() override {
        KnotWorld& w = world();
        const std::size_t target = index_of(w, end_);
        if (!from_) {
            from_ = w.holder(target);
            if (!from_) return Status::Failure;
            to_ = 1 - *from_;
            if (w.arm(to_).closed) return Status::Failure;
        }
        if (released_) return Status::Success;
        ArmState& to = w.arm(to_);
        if (!to.closed) {
            const Vec3 goal = w.arm(*from_).position;
            if (!w.reachable(goal)) return Status::Failure;
            w.move_arm_towards(to_, goal);
            if ((to.position - goal).norm() > w.config().robot.grasp_tolerance) return Status::Running;
            to.position = goal;
            to.closed = true;
            to.binding = target;
            return Status::Running;
        }
        ArmState& from = w.arm(*from_);
        from.closed = false;
        from.binding.reset();
        released_ = true;
        return Status::Running;
    }

private:
    RopeEnd end_;
    std::optional<int> from_;
    int to_ = 0;
    bool released_ = false;
};

class Insertion : public Action {
public:
    Insertion(Context& ctx, std::string label, RopeEnd end, bool to_anchor)
        : Action(ctx, std::move(label)), end_(end), to_anchor_(to_anchor) {}

    void reset() override { run_.reset(); }

protected:
    Status step() override {
        KnotWorld& w = world();
        const std::size_t end_index = index_of(w, end_);
        try {
            if (!run_ && !start(w, end_index)) return Status::Failure;
            Run& r = *run_;
            if (!w.arm(r.carrier).closed || w.arm(r.carrier).binding != end_index) return Status::Failure;

            const Loop loop = target(w);
            const Loop reversed = loop.reversed();
            if (!r.carrier_tracker) {
                if (w.move_arm_towards(r.carrier, r.carrier_start)) {
                    r.carrier_tracker.emplace(r.carrier_start, w.config().insertion);
                }
            } else if (!r.carrier_tracker->finished()) {
                const Vec3 before = r.carrier_tracker->position();
                r.carrier_tracker->tick(loop);
                w.arm(r.carrier).position = r.carrier_tracker->position();
                const LoopFrame frame = fit_plane_frame(loop);
                if (const auto c = plane_crossing(before, r.carrier_tracker->position(), frame)) {
                    if (point_inside_planar(loop, frame, c->point)) r.threaded = true;
                }
                if (!w.reachable(r.carrier_tracker->position())) return Status::Failure;
            }
            if (!r.receiver_bound) {
                if (!r.receiver_tracker) {
                    if (w.move_arm_towards(r.receiver, r.receiver_start)) {
                        r.receiver_tracker.emplace(r.receiver_start, w.config().insertion);
                    }
                } else if (!r.receiver_tracker->finished()) {
                    r.receiver_tracker->tick(reversed);
                    w.arm(r.receiver).position = r.receiver_tracker->position();
                    if (!w.reachable(r.receiver_tracker->position())) return Status::Failure;
                }
            }
            if (!r.carrier_tracker) return Status::Running;
            if (!stopped(*r.carrier_tracker)) return r.carrier_tracker->finished() ? Status::Failure : Status::Running;
            // Stopping short of the loop is not an insertion.
            if (!r.threaded) return Status::Failure;
            if (r.receiver_bound) return Status::Success;
            if (!r.receiver_tracker || !r.receiver_tracker->finished()) return Status::Running;
            return stopped(*r.receiver_tracker) ? Status::Success : Status::Failure;
        } catch (const Error&) {
            return Status::Failure;
        }
    }

    void on_success() override { ++result().insertion_count; }

private:
    struct Run {
        int carrier;
        int receiver;
        bool receiver_bound;
        bool flip;
        bool threaded = false;
        std::size_t first = 0;
        std::size_t last = 0;
        Vec3 view;
        Vec3 carrier_start;
        Vec3 receiver_start;
        std::optional<InsertionTracker> carrier_tracker;
        std::optional<InsertionTracker> receiver_tracker;
    };

    static bool stopped(const InsertionTracker& t) { return t.termination() == Termination::StoppedByFieldDrop; }

    Loop raw_target(const KnotWorld& w) const {
        if (to_anchor_) return w.anchor();
        return rope_loop(w.rope(), run_->first, run_->last, run_->view);
    }

    Loop target(const KnotWorld& w) const {
        Loop l = raw_target(w);
        return run_->flip ? l.reversed() : l;
    }

    bool start(KnotWorld& w, std::size_t end_index) {
        const auto carrier = w.holder(end_index);
        if (!carrier) return false;
        const int receiver = 1 - *carrier;
        const Vec3 from = w.arm(*carrier).position;
        const Vec3 view = w.base().forward();
        std::size_t first = 0;
        std::size_t last = 0;
        Loop loop = w.anchor();
        if (!to_anchor_) {
            RopeLoop rl = extract_rope_loop(w.rope(), view);
            first = rl.first;
            last = rl.last;
            loop = std::move(rl.loop);
        }
        const double d = w.config().receiver_standoff;
        Vec3 carrier_start = from;
        Loop oriented = orient_toward(loop, from);
        if (!to_anchor_) {
            // The carrier first moves onto the loop axis on its own side.
            const LoopFrame f = fit_plane_frame(loop);
            const double side = (from - f.centroid).dot(f.normal) >= 0.0 ? 1.0 : -1.0;
            carrier_start = f.centroid + side * d * f.normal;
            oriented = orient_toward(loop, carrier_start);
        }
        const bool flip = oriented.vector_area().dot(loop.vector_area()) < 0.0;
        const LoopFrame frame = fit_plane_frame(oriented);
        run_.emplace(Run{*carrier, receiver, w.arm(receiver).closed, flip, false, first, last, view, carrier_start,
                         frame.centroid + d * frame.normal, std::nullopt, std::nullopt});
        return true;
    }

    RopeEnd end_;
    bool to_anchor_;
    std::optional<Run> run_;
};

// Moves both hands toward the twist pose in front of the base, keeping
// their left/right order. True once both are there.
bool pose_hands(KnotWorld& w) {
    const TwistParams& p = w.config().twist;
    const Eigen::Isometry3d base = w.base().pose();
    const bool first_left = (w.arm(0).position - w.arm(1).position).dot(w.base().left()) >= 0.0;
    const Vec3 pl = base * Vec3(p.forward, p.half_width, p.height);
    const Vec3 pr = base * Vec3(p.forward, -p.half_width, p.height);
    const bool r0 = w.move_arm_towards(0, first_left ? pl : pr);
    const bool r1 = w.move_arm_towards(1, first_left ? pr : pl);
    return r0 && r1;
}

bool both_bound(const KnotWorld& w) {
    return w.arm(0).closed && w.arm(0).binding && w.arm(1).closed && w.arm(1).binding;
}

// The circle drawn by the Rf gripper; see TwistParams.
class LoopCircle {
public:
    // Fixes the circle from the current hands and rope. Fails when nobody
    // holds Rf.
    bool begin(const KnotWorld& w) {
        const std::size_t end = w.rope().size() - 1;
        const auto h = w.holder(end);
        if (!h) return false;
        const TwistParams& p = w.config().twist;
        hand_ = *h;
        angle_ = 0.0;
        closed_at_.reset();
        forward_ = w.base().forward();
        const Vec3 p0 = w.arm(hand_).position;
        // Direction of the strand leaving the hand, in the facing plane.
        Vec3 t = Vec3::Zero();
        for (std::size_t k = end; k-- > 0 && t.norm() < 2.0 * w.rope().segment_length();) {
            t = w.rope()[k] - p0;
            t -= forward_ * t.dot(forward_);
        }
        if (t.norm() < 1e-9) t = w.arm(1 - hand_).position - p0;
        t -= forward_ * t.dot(forward_);
        if (t.norm() < 1e-9) t = Vec3::UnitZ();
        u_ = t.normalized();
        v_ = forward_.cross(u_);
        centre_ = p0 - p.radius * u_;
        return true;
    }

    // One tick along the circle. Returns nullopt on failure, else whether
    // the circle is complete.
    std::optional<bool> advance(KnotWorld& w) {
        const TwistParams& p = w.config().twist;
        const double full = 2.0 * std::numbers::pi;
        if (!w.arm(hand_).closed || w.arm(hand_).binding != w.rope().size() - 1) return std::nullopt;
        angle_ += p.rate;
        const double turns = angle_ / full;
        const double r = p.radius * (1.0 + p.growth * turns);
        const Vec3 q = centre_ + r * (std::cos(angle_) * u_ + std::sin(angle_) * v_) - p.drift * turns * forward_;
        if (!w.reachable(q)) return std::nullopt;
        w.arm(hand_).position = q;
        // The rope follows the hand only at the end of the tick, so this
        // sees the trail one tick late; the margin absorbs that.
        if (!closed_at_ && angle_ >= std::numbers::pi && trail_closed(w.rope())) closed_at_ = angle_;
        if (closed_at_) return angle_ >= *closed_at_ + p.margin;
        if (angle_ >= full + p.max_overshoot) return std::nullopt;
        return false;
    }

private:
    // The newest trail segments cross rope at least a loop further back.
    bool trail_closed(const Rope& rope) const {
        const std::size_t fresh = rope.size() - 4;
        for (const auto& c : rope_crossings(rope.points(), forward_)) {
            if (c.j >= fresh && c.j - c.i >= kMinRopeLoopVertices) return true;
        }
        return false;
    }

    int hand_ = 0;
    double angle_ = 0.0;
    std::optional<double> closed_at_;
    Vec3 forward_ = Vec3::UnitX();
    Vec3 centre_ = Vec3::Zero();
    Vec3 u_ = Vec3::UnitY();
    Vec3 v_ = Vec3::UnitZ();
};

// Both hands to the twist pose, then the loop circle.
class Twist : public Action {
public:
    Twist(Context& ctx, std::string label) : Action(ctx, std::move(label)) {}

    void reset() override { phase_ = Phase::Pose; }

protected:
    Status step() override {
        KnotWorld& w = world();
        if (!both_bound(w)) return Status::Failure;
        if (phase_ == Phase::Pose) {
            if (!pose_hands(w)) return Status::Running;
            if (!circle_.begin(w)) return Status::Failure;
            phase_ = Phase::Circle;
            return Status::Running;
        }
        const auto done = circle_.advance(w);
        if (!done) return Status::Failure;
        return *done ? Status::Success : Status::Running;
    }

    void on_success() override { ++result().twist_count; }

private:
    enum class Phase { Pose, Circle };
    Phase phase_ = Phase::Pose;
    LoopCircle circle_;
};

// Advances the heading reference tracked by step 1 by pi with the hands in
// the twist pose riding along, then draws the loop circle. Turning alone
// moves the hands on horizontal circles, which never makes the rope cross
// itself in the facing view.
class TurnBase : public Action {
public:
    TurnBase(Context& ctx, std::string label) : Action(ctx, std::move(label)) {}

    void reset() override {
        phase_ = Phase::Pose;
        turned_ = 0.0;
    }

protected:
    Status step() override {
        KnotWorld& w = world();
        if (!both_bound(w)) return Status::Failure;
        switch (phase_) {
        case Phase::Pose:
            if (pose_hands(w)) phase_ = Phase::Turn;
            return Status::Running;
        case Phase::Turn: {
            if (turned_ < std::numbers::pi) {
                const double d = std::min(w.config().turn_rate, std::numbers::pi - turned_);
                w.add_heading_offset(d);
                turned_ += d;
                return Status::Running;
            }
            const BasePose ref = w.base_reference();
            if (std::abs(ref.heading - w.base().heading) > w.config().robot.base_tolerance) return Status::Running;
            if (!circle_.begin(w)) return Status::Failure;
            phase_ = Phase::Circle;
            return Status::Running;
        }
        case Phase::Circle: break;
        }
        const auto done = circle_.advance(w);
        if (!done) return Status::Failure;
        return *done ? Status::Success : Status::Running;
    }

    void on_success() override { ++result().twist_count; }

private:
    enum class Phase { Pose, Turn, Circle };
    Phase phase_ = Phase::Pose;
    double turned_ = 0.0;
    LoopCircle circle_;
};

} // namespace

NodePtr approach_loop(Context& ctx) { return std::make_unique<ApproachLoop>(ctx); }

NodePtr grasp(Context& ctx, std::string label, RopeEnd end, int arm) {
    return std::make_unique<Grasp>(ctx, std::move(label), end, arm);
}

NodePtr hand_over(Context& ctx, std::string label, RopeEnd end) {
    return std::make_unique<HandOver>(ctx, std::move(label), end);
}

NodePtr release(Context& ctx, std::string label, RopeEnd end) {
    return std::make_unique<Release>(ctx, std::move(label), end);
}

NodePtr insertion(Context& ctx, std::string label, RopeEnd end, bool to_anchor) {
    return std::make_unique<Insertion>(ctx, std::move(label), end, to_anchor);
}

NodePtr twist(Context& ctx, std::string label) { return std::make_unique<Twist>(ctx, std::move(label)); }

NodePtr turn_base(Context& ctx, std::string label) { return std::make_unique<TurnBase>(ctx, std::move(label)); }

} // namespace knotfield::actions
