#pragma once

#include "knotfield/loop.hpp"

#include <span>
#include <vector>

namespace knotfield {

// A rope point held in place by a closed gripper.
struct Pin {
    std::size_t index;
    Vec3 position;
};

// Kinematic rope: a chain of points with fixed spacing and no dynamics.
// Index 0 is R0, the last index is Rf.
class Rope {
public:
    Rope(std::vector<Vec3> points, double segment_length);

    // n points spaced segment_length apart from `from` along `direction`.
    static Rope straight(const Vec3& from, const Vec3& direction, std::size_t n, double segment_length);

    std::span<const Vec3> points() const { return points_; }
    const Vec3& operator[](std::size_t i) const { return points_[i]; }
    std::size_t size() const { return points_.size(); }
    std::size_t first() const { return 0; }
    std::size_t last() const { return points_.size() - 1; }
    double segment_length() const { return segment_; }
    double length() const;

    // Moves pinned points to their positions. Between two consecutive pins the
    // chain is solved with FABRIK, beyond the outermost pins it follows the
    // leader. Throws Overstretch when pins are farther apart than the rope
    // between them, or when one point is pinned at two places.
    void update(std::span<const Pin> pins);

private:
    void follow(std::size_t from, std::size_t to);
    void solve_between(std::size_t a, const Vec3& pa, std::size_t b, const Vec3& pb);

    std::vector<Vec3> points_;
    double segment_;
};

// Largest |distance(p_i, p_{i+1}) - segment_length| over the chain.
double max_segment_error(const Rope& rope);

} // namespace knotfield
