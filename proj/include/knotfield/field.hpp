#pragma once

#include "knotfield/loop.hpp"

namespace knotfield {

inline constexpr double kSingularDistance = 1e-6; // metres from the conductor
inline constexpr double kMinFieldNorm = 1e-12;

struct FieldParams {
    double scale_c = 1.0; // mu0 * I / (4 pi), lumped
    double gamma = 0.01;  // offset length per iteration [m]
    double alpha = 1.0;   // in-plane weight
    double beta = 1.0;    // normal weight

    void validate() const;
};

// Midpoint-rule Biot-Savart sum over the loop segments:
//   B(x) = c * sum_i dl_i x (x - m_i) / |x - m_i|^3
// Throws Singularity when x is within kSingularDistance of any segment.
// The exact finite-segment closed form would remove the quadrature error but
// is not used; the error at 0.1 rad discretization is well below 0.5 %.
Vec3 field(const Loop& loop, const Vec3& x, const FieldParams& params);

// gamma * B / |B|.
Vec3 offset(const Loop& loop, const Vec3& x, const FieldParams& params);

// alpha-weighted in-plane components plus beta-weighted normal component.
Vec3 field_planar(const Loop& loop, const LoopFrame& frame, const Vec3& x, const FieldParams& params);
Vec3 offset_planar(const Loop& loop, const LoopFrame& frame, const Vec3& x, const FieldParams& params);

double flux_magnitude(const Loop& loop, const Vec3& x, const FieldParams& params);

// Closed-form on-axis flux of a continuum circle of radius R:
//   2 pi c R^2 / (R^2 + z^2)^{3/2}
double circle_axis_flux(double radius, double z, double scale_c = 1.0);

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

// Returns `loop` or its reverse, whichever makes the field at `from` point
// towards the loop centroid.
Loop orient_toward(const Loop& loop, const Vec3& from);

} // namespace knotfield
