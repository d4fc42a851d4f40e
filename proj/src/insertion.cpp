#include "knotfield/insertion.hpp"

#include "knotfield/error.hpp"

#include <cmath>

namespace knotfield {

void InsertionParams::validate() const {
    field.validate();
    if (max_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_iters must be >= 1");
    if (stop_persistence < 1) throw Error(ErrorKind::InvalidParameter, "stop persistence must be >= 1");
}

int default_max_iters(const Vec3& start, const Loop& loop, double gamma) {
    const double d = (start - loop.centroid()).norm();
    return std::max(1, static_cast<int>(std::ceil(10.0 * d / gamma)));
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::StoppedByFieldDrop: return "stopped";
    case Termination::ReachedPlane: return "reached-plane";
    case Termination::MaxIters: return "max-iters";
    case Termination::Error: return "error";
    }
    return "unknown";
}

Vec3 step(const Vec3& x, const Loop& loop, const InsertionParams& params, const LoopFrame* frame) {
    if (!params.planar_mode) return x + offset(loop, x, params.field);
    if (frame != nullptr) return x + offset_planar(loop, *frame, x, params.field);
    const LoopFrame fitted = fit_plane_frame(loop);
    return x + offset_planar(loop, fitted, x, params.field);
}

InsertionTracker::InsertionTracker(const Vec3& start, InsertionParams params)
    : params_(params), position_(start), stop_point_(start) {
    params_.validate();
}

bool InsertionTracker::tick(const Loop& loop) {
    if (termination_) return true;
    try {
        const double flux = flux_magnitude(loop, position_, params_.field);
        record_.positions.push_back(position_);
        record_.flux.push_back(flux);
        const std::size_t n = record_.flux.size();
        if (n >= 2 && flux < record_.flux[n - 2]) {
            ++decreases_;
        } else {
            decreases_ = 0;
        }
        if (decreases_ >= params_.stop_persistence) {
            stop_point_ = record_.positions[n - 1 - static_cast<std::size_t>(decreases_)];
            termination_ = Termination::StoppedByFieldDrop;
            return true;
        }
        if (iterations_ >= params_.max_iters) {
            stop_point_ = position_;
            termination_ = Termination::MaxIters;
            return true;
        }
        const Vec3 next = step(position_, loop, params_);
        ++iterations_;
        if (params_.halt_plane && plane_crossing(position_, next, *params_.halt_plane)) {
            position_ = next;
            record_.positions.push_back(position_);
            record_.flux.push_back(flux_magnitude(loop, position_, params_.field));
            stop_point_ = position_;
            termination_ = Termination::ReachedPlane;
            return true;
        }
        position_ = next;
        return false;
    } catch (const Error&) {
        stop_point_ = position_;
        termination_ = Termination::Error;
        throw;
    }
}

InsertionOutcome run_insertion(const Vec3& start, const LoopProvider& loop_at, const InsertionParams& params,
                               const Loop& nominal) {
    InsertionTracker tracker(start, params);
    InsertionOutcome outcome;
    try {
        for (int t = 0; !tracker.tick(loop_at(t)); ++t) {
        }
    } catch (const Error& e) {
        outcome.error = e.what();
    }
    outcome.termination = *tracker.termination();
    outcome.stop_point = tracker.stop_point();
    outcome.trajectory = tracker.take_trajectory();

    const LoopFrame frame = fit_plane_frame(nominal);
    outcome.success = detect_success(outcome.trajectory, nominal, frame);
    try {
        outcome.quality = score_quality(outcome.trajectory, nominal, frame);
        outcome.delay = score_delay(outcome.trajectory, frame);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoInsertion) throw;
    }
    return outcome;
}

InsertionOutcome run_insertion(const Vec3& start, const LoopProvider& loop_at, const InsertionParams& params) {
    return run_insertion(start, loop_at, params, loop_at(0));
}

namespace {

struct FirstCrossing {
    std::size_t move;
    PlaneCrossing crossing;
};

std::optional<FirstCrossing> first_crossing(const TrajectoryRecord& trajectory, const LoopFrame& frame) {
    const auto& p = trajectory.positions;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        if (auto c = plane_crossing(p[i], p[i + 1], frame)) return FirstCrossing{i, *c};
    }
    return std::nullopt;
}

} // namespace

double score_quality(const TrajectoryRecord& trajectory, const Loop& loop, const LoopFrame& frame) {
    (void)loop;
    const auto first = first_crossing(trajectory, frame);
    if (!first) throw Error(ErrorKind::NoInsertion, "trajectory never reaches the loop plane");
    return (first->crossing.point - frame.centroid).norm();
}

int score_delay(const TrajectoryRecord& trajectory, const LoopFrame& frame) {
    const auto first = first_crossing(trajectory, frame);
    if (!first) throw Error(ErrorKind::NoInsertion, "trajectory never reaches the loop plane");
    return static_cast<int>(first->move) + 1;
}

bool detect_success(const TrajectoryRecord& trajectory, const Loop& loop, const LoopFrame& frame) {
    const auto& p = trajectory.positions;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const auto c = plane_crossing(p[i], p[i + 1], frame);
        if (c && c->direction > 0 && point_inside_planar(loop, frame, c->point)) return true;
    }
    return false;
}

} // namespace knotfield
