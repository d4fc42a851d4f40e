#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace knotfield {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kMinVertexSeparation = 1e-9;

// Closed oriented polyline. The last vertex connects back to the first; the
// vertex order is the direction of the virtual current.
class Loop {
public:
    explicit Loop(std::vector<Vec3> vertices);

    std::span<const Vec3> vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    const Vec3& operator[](std::size_t i) const { return vertices_[i]; }

    // Segment i runs from vertex i to vertex (i + 1) mod n.
    Vec3 segment(std::size_t i) const { return vertices_[next(i)] - vertices_[i]; }
    Vec3 midpoint(std::size_t i) const { return 0.5 * (vertices_[i] + vertices_[next(i)]); }
    std::size_t next(std::size_t i) const { return i + 1 == vertices_.size() ? 0 : i + 1; }

    Vec3 centroid() const;
    double length() const;
    // Half the sum of v_i x v_{i+1}; its direction is the right-hand normal of
    // the current and its norm the projected area.
    Vec3 vector_area() const;
    double diameter() const;

    Loop reversed() const;
    Loop transformed(const Eigen::Isometry3d& pose) const;

private:
    std::vector<Vec3> vertices_;
};

// Orthonormal right-handed triad attached to a (near-)planar loop.
// normal is signed so that the loop's signed area about it is positive.
struct LoopFrame {
    Vec3 centroid;
    Vec3 normal;
    Vec3 in_plane1;
    Vec3 in_plane2;

    Vec2 project(const Vec3& p) const {
        const Vec3 d = p - centroid;
        return {d.dot(in_plane1), d.dot(in_plane2)};
    }
    double height(const Vec3& p) const { return (p - centroid).dot(normal); }
};

double signed_area(const Loop& loop, const Vec3& normal);

Loop make_circle(double radius, double angular_step, const Vec3& center = Vec3::Zero(),
                 const Vec3& normal = Vec3::UnitZ());

// Unit-plane circle about +Z folded along the X axis: the y > 0 half is
// rotated by fold_angle about that diameter.
Loop make_folded(double radius, double angular_step, double fold_angle);

// Two turns about +Z rising by `pitch` per turn, closed back to the start.
Loop make_double(double radius, double angular_step, double pitch);

LoopFrame fit_plane_frame(const Loop& loop);

struct PlaneCrossing {
    Vec3 point;
    int direction;   // +1 when moving along +normal, -1 otherwise
    double fraction; // position of the crossing along p0 -> p1
};

// Half-open test: a segment ending exactly on the plane crosses, one starting
// on it does not. Consecutive segments of a path therefore never both report
// the same touch.
std::optional<PlaneCrossing> plane_crossing(const Vec3& p0, const Vec3& p1, const LoopFrame& frame);

int winding_number(std::span<const Vec2> polygon, const Vec2& p);
bool point_inside_planar(const Loop& loop, const LoopFrame& frame, const Vec3& p);

// Rotates +Z onto `normal`; used to place planar constructions in 3D.
Eigen::Matrix3d rotation_from_z(const Vec3& normal);

// Plain-text vertex list: one "x y z" per line, '#' starts a comment.
Loop read_loop(std::istream& in);
Loop read_loop_file(const std::string& path);
void write_loop(std::ostream& out, const Loop& loop);

} // namespace knotfield
