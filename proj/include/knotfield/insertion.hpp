#pragma once

#include "knotfield/field.hpp"
#include "knotfield/loop.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace knotfield {

struct InsertionParams {
    FieldParams field;
    int max_iters = 1000;
    // Consecutive flux decreases required before stopping.
    int stop_persistence = 1;
    // Use the alpha/beta weighted offset with a per-tick plane frame.
    bool planar_mode = false;
    // When set, the run also ends right after the first move that crosses
    // this plane. Used by the noise sweep, whose measurements all live at
    // the first crossing.
    std::optional<LoopFrame> halt_plane;

    void validate() const;
};

// max_iters = 10 * distance(start, centroid) / gamma, at least 1.
int default_max_iters(const Vec3& start, const Loop& loop, double gamma);

struct TrajectoryRecord {
    std::vector<Vec3> positions;
    std::vector<double> flux;
};

enum class Termination { StoppedByFieldDrop, ReachedPlane, MaxIters, Error };

std::string_view to_string(Termination t);

struct InsertionOutcome {
    bool success = false;
    std::optional<double> quality; // metres; empty when the plane was never crossed
    std::optional<int> delay;      // iterations; empty when the plane was never crossed
    Vec3 stop_point = Vec3::Zero();
    TrajectoryRecord trajectory;
    Termination termination = Termination::MaxIters;
    std::string error;
};

// x + delta, with delta from offset() or offset_planar() per planar_mode.
// A missing frame in planar mode is fitted from `loop`.
Vec3 step(const Vec3& x, const Loop& loop, const InsertionParams& params,
          const LoopFrame* frame = nullptr);

// Per-tick state machine shared by run_insertion and the knotting actions.
// Each call to tick() records the flux at the current position against the
// supplied loop, checks the stopping rule, and otherwise advances one step.
class InsertionTracker {
public:
    InsertionTracker(const Vec3& start, InsertionParams params);

    // Returns true once stopped (field drop, halt plane) or the iteration
    // budget is spent.
    // Field errors propagate; the trajectory keeps everything recorded so far.
    bool tick(const Loop& loop);

    bool finished() const { return termination_.has_value(); }
    std::optional<Termination> termination() const { return termination_; }
    const Vec3& position() const { return position_; }
    const Vec3& stop_point() const { return stop_point_; }
    const TrajectoryRecord& trajectory() const { return record_; }
    TrajectoryRecord take_trajectory() { return std::move(record_); }
    int iterations() const { return iterations_; }

private:
    InsertionParams params_;
    Vec3 position_;
    Vec3 stop_point_;
    TrajectoryRecord record_;
    int decreases_ = 0;
    int iterations_ = 0;
    std::optional<Termination> termination_;
};

using LoopProvider = std::function<Loop(int iteration)>;

// Scores against the nominal loop and its fitted frame.
InsertionOutcome run_insertion(const Vec3& start, const LoopProvider& loop_at, const InsertionParams& params,
                               const Loop& nominal);
InsertionOutcome run_insertion(const Vec3& start, const LoopProvider& loop_at, const InsertionParams& params);

// Distance from the first plane crossing to the loop centroid. Throws
// NoInsertion when the trajectory never crosses the plane.
double score_quality(const TrajectoryRecord& trajectory, const Loop& loop, const LoopFrame& frame);

// Number of moves up to and including the first one that crosses the plane.
int score_delay(const TrajectoryRecord& trajectory, const LoopFrame& frame);

// True iff some move crosses the plane inside the loop along +normal.
bool detect_success(const TrajectoryRecord& trajectory, const Loop& loop, const LoopFrame& frame);

} // namespace knotfield
