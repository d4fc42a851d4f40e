#pragma once

#include "knotfield/loop.hpp"

#include <span>

namespace knotfield {

double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);

// Gauss double sum over segment pairs of two closed polylines, each pair's
// term evaluated exactly as the signed solid angle of the quadrilateral it
// spans (divided by 4 pi). The result is an integer up to rounding.
double linking_sum(std::span<const Vec3> a, std::span<const Vec3> b);

// Rounded linking_sum. Throws IllConditioned when the curves come within
// 1e-6 of each other or the sum is not within 0.1 of an integer.
int linking_number(std::span<const Vec3> a, std::span<const Vec3> b);
inline int linking_number(const Loop& a, const Loop& b) { return linking_number(a.vertices(), b.vertices()); }

} // namespace knotfield
