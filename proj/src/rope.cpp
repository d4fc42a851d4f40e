#include "knotfield/rope.hpp"

#include "knotfield/error.hpp"

#include <algorithm>
#include <cmath>

namespace knotfield {

namespace {

constexpr int kFabrikMaxIters = 2000;
constexpr double kFabrikTolerance = 1e-10;
constexpr double kPinTolerance = 1e-6;

// Point at distance s from `anchor` towards `p`. When p sits on the anchor
// the previous direction `fallback` is kept.
Vec3 place(const Vec3& anchor, const Vec3& p, double s, const Vec3& fallback) {
    Vec3 d = p - anchor;
    const double n = d.norm();
    if (n < 1e-15) {
        d = fallback;
        const double m = d.norm();
        return m < 1e-15 ? Vec3(anchor + Vec3(s, 0.0, 0.0)) : Vec3(anchor + d * (s / m));
    }
    return anchor + d * (s / n);
}

} // namespace

Rope::Rope(std::vector<Vec3> points, double segment_length) : points_(std::move(points)), segment_(segment_length) {
    if (points_.size() < 3) throw Error(ErrorKind::InvalidParameter, "rope needs at least 3 points");
    if (!(segment_ > 0.0) || !std::isfinite(segment_)) {
        throw Error(ErrorKind::InvalidParameter, "rope segment length must be positive");
    }
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        if (std::abs((points_[i + 1] - points_[i]).norm() - segment_) > 1e-6) {
            throw Error(ErrorKind::InvalidParameter, "rope points are not evenly spaced");
        }
    }
}

Rope Rope::straight(const Vec3& from, const Vec3& direction, std::size_t n, double segment_length) {
    const Vec3 u = direction.normalized();
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(from + static_cast<double>(i) * segment_length * u);
    return Rope(std::move(pts), segment_length);
}

double Rope::length() const {
    double l = 0.0;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) l += (points_[i + 1] - points_[i]).norm();
    return l;
}

void Rope::follow(std::size_t from, std::size_t to) {
    if (to > from) {
        for (std::size_t i = from + 1; i <= to; ++i) {
            const Vec3 fallback = i >= 2 ? Vec3(points_[i - 1] - points_[i - 2]) : Vec3::UnitX();
            points_[i] = place(points_[i - 1], points_[i], segment_, fallback);
        }
    } else {
        for (std::size_t i = from; i-- > to;) {
            const Vec3 fallback = i + 2 < points_.size() ? Vec3(points_[i + 1] - points_[i + 2]) : Vec3::UnitX();
            points_[i] = place(points_[i + 1], points_[i], segment_, fallback);
        }
    }
}

void Rope::solve_between(std::size_t a, const Vec3& pa, std::size_t b, const Vec3& pb) {
    const double span = static_cast<double>(b - a) * segment_;
    if ((pb - pa).norm() > span + kPinTolerance) {
        throw Error(ErrorKind::Overstretch, "grippers are farther apart than the rope between them");
    }
    for (int it = 0; it < kFabrikMaxIters; ++it) {
        points_[a] = pa;
        follow(a, b);
        points_[b] = pb;
        follow(b, a);
        if ((points_[a] - pa).norm() < kFabrikTolerance) break;
    }
    if ((points_[a] - pa).norm() > kPinTolerance) {
        throw Error(ErrorKind::Overstretch, "rope between grippers cannot be relaxed");
    }
    points_[a] = pa;
}

void Rope::update(std::span<const Pin> input) {
    std::vector<Pin> pins(input.begin(), input.end());
    std::sort(pins.begin(), pins.end(), [](const Pin& l, const Pin& r) { return l.index < r.index; });
    std::vector<Pin> unique;
    for (const auto& p : pins) {
        if (p.index >= points_.size()) throw Error(ErrorKind::InvalidParameter, "pin index out of range");
        if (!unique.empty() && unique.back().index == p.index) {
            if ((unique.back().position - p.position).norm() > kPinTolerance) {
                throw Error(ErrorKind::Overstretch, "one rope point held at two places");
            }
            continue;
        }
        unique.push_back(p);
    }
    if (unique.empty()) return;

    for (std::size_t k = 0; k + 1 < unique.size(); ++k) {
        solve_between(unique[k].index, unique[k].position, unique[k + 1].index, unique[k + 1].position);
    }
    points_[unique.front().index] = unique.front().position;
    follow(unique.front().index, 0);
    points_[unique.back().index] = unique.back().position;
    follow(unique.back().index, points_.size() - 1);
}

double max_segment_error(const Rope& rope) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < rope.size(); ++i) {
        worst = std::max(worst, std::abs((rope[i + 1] - rope[i]).norm() - rope.segment_length()));
    }
    return worst;
}

} // namespace knotfield
