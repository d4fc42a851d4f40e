#include "knotfield/field.hpp"

#include "knotfield/error.hpp"

#include <cmath>
#include <numbers>

namespace knotfield {

void FieldParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorKind::InvalidParameter, "gamma must be positive");
    }
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "alpha and beta must be non-negative");
    }
    if (alpha == 0.0 && beta == 0.0) {
        throw Error(ErrorKind::InvalidParameter, "alpha and beta cannot both be zero");
    }
    if (!std::isfinite(scale_c) || scale_c == 0.0) {
        throw Error(ErrorKind::InvalidParameter, "scale_c must be finite and nonzero");
    }
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

Vec3 field(const Loop& loop, const Vec3& x, const FieldParams& params) {
    Vec3 sum = Vec3::Zero();
    const auto verts = loop.vertices();
    const std::size_t n = verts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& a = verts[i];
        const Vec3& b = verts[i + 1 == n ? 0 : i + 1];
        const Vec3 dl = b - a;
        const Vec3 r = x - 0.5 * (a + b);
        const double r2 = r.squaredNorm();
        // Cheap reject before the exact distance test: the segment lies
        // within |dl|/2 of its midpoint.
        const double reach = 0.5 * dl.norm() + kSingularDistance;
        if (r2 <= reach * reach && point_segment_distance(x, a, b) <= kSingularDistance) {
            throw Error(ErrorKind::Singularity, "query point lies on the conductor");
        }
        sum += dl.cross(r) / (r2 * std::sqrt(r2));
    }
    return params.scale_c * sum;
}

namespace {

Vec3 normalize_offset(const Vec3& b, double gamma) {
    const double norm = b.norm();
    if (!(norm > kMinFieldNorm)) {
        throw Error(ErrorKind::DegenerateDirection, "field magnitude too small to define a direction");
    }
    return gamma * b / norm;
}

} // namespace

Vec3 offset(const Loop& loop, const Vec3& x, const FieldParams& params) {
    return normalize_offset(field(loop, x, params), params.gamma);
}

Vec3 field_planar(const Loop& loop, const LoopFrame& frame, const Vec3& x, const FieldParams& params) {
    const Vec3 b = field(loop, x, params);
    const double b_p1 = b.dot(frame.in_plane1);
    const double b_p2 = b.dot(frame.in_plane2);
    const double b_n = b.dot(frame.normal);
    return params.alpha * (b_p1 * frame.in_plane1 + b_p2 * frame.in_plane2) + params.beta * b_n * frame.normal;
}

Vec3 offset_planar(const Loop& loop, const LoopFrame& frame, const Vec3& x, const FieldParams& params) {
    return normalize_offset(field_planar(loop, frame, x, params), params.gamma);
}

double flux_magnitude(const Loop& loop, const Vec3& x, const FieldParams& params) {
    return field(loop, x, params).norm();
}

double circle_axis_flux(double radius, double z, double scale_c) {
    const double r2 = radius * radius;
    return 2.0 * std::numbers::pi * std::abs(scale_c) * r2 / std::pow(r2 + z * z, 1.5);
}

Loop orient_toward(const Loop& loop, const Vec3& from) {
    const FieldParams unit;
    const Vec3 b = field(loop, from, unit);
    if (b.dot(loop.centroid() - from) < 0.0) return loop.reversed();
    return loop;
}

} // namespace knotfield
