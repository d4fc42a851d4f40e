#include "knotfield/linking.hpp"

#include "knotfield/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace knotfield {

double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
    const Vec3 d1 = p1 - p0;
    const Vec3 d2 = q1 - q0;
    const Vec3 r = p0 - q0;
    const double a = d1.squaredNorm();
    const double e = d2.squaredNorm();
    const double f = d2.dot(r);
    double s = 0.0;
    double t = 0.0;
    if (a <= 0.0 && e <= 0.0) return r.norm();
    if (a <= 0.0) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= 0.0) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

namespace {

double safe_asin(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }

Vec3 unit_or_zero(const Vec3& v) {
    const double n = v.norm();
    return n > 0.0 ? Vec3(v / n) : Vec3::Zero();
}

// Signed solid angle subtended by segment pair (p1->p2, p3->p4), over 4 pi.
double pair_term(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
    const Vec3 r13 = p3 - p1;
    const Vec3 r14 = p4 - p1;
    const Vec3 r23 = p3 - p2;
    const Vec3 r24 = p4 - p2;
    const Vec3 n1 = unit_or_zero(r13.cross(r14));
    const Vec3 n2 = unit_or_zero(r14.cross(r24));
    const Vec3 n3 = unit_or_zero(r24.cross(r23));
    const Vec3 n4 = unit_or_zero(r23.cross(r13));
    const double omega = safe_asin(n1.dot(n2)) + safe_asin(n2.dot(n3)) + safe_asin(n3.dot(n4)) +
                         safe_asin(n4.dot(n1));
    const double orientation = (p4 - p3).cross(p2 - p1).dot(r13);
    if (orientation == 0.0) return 0.0;
    return std::copysign(omega, orientation) / (4.0 * std::numbers::pi);
}

} // namespace

double linking_sum(std::span<const Vec3> a, std::span<const Vec3> b) {
    double total = 0.0;
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    for (std::size_t i = 0; i < na; ++i) {
        const Vec3& p1 = a[i];
        const Vec3& p2 = a[(i + 1) % na];
        for (std::size_t j = 0; j < nb; ++j) {
            total += pair_term(p1, p2, b[j], b[(j + 1) % nb]);
        }
    }
    return total;
}

int linking_number(std::span<const Vec3> a, std::span<const Vec3> b) {
    if (a.size() < 3 || b.size() < 3) throw Error(ErrorKind::InvalidParameter, "curves need 3+ vertices");
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = segment_segment_distance(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]);
            if (d <= 1e-6) throw Error(ErrorKind::IllConditioned, "curves are too close to link reliably");
        }
    }
    const double sum = linking_sum(a, b);
    const double rounded = std::round(sum);
    if (std::abs(sum - rounded) >= 0.1) {
        throw Error(ErrorKind::IllConditioned, "linking sum " + std::to_string(sum) + " is not near an integer");
    }
    return static_cast<int>(rounded);
}

} // namespace knotfield
