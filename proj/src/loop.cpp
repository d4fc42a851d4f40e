#include "knotfield/loop.hpp"

#include "knotfield/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace knotfield {

namespace {

std::size_t turn_vertex_count(double angular_step) {
    // Guard against 2*pi/step landing a hair above an integer.
    return static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / angular_step - 1e-9));
}

void check_circle_params(double radius, double angular_step) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw Error(ErrorKind::InvalidParameter, "radius must be positive, got " + std::to_string(radius));
    }
    if (!(angular_step > 0.0) || !(angular_step < std::numbers::pi)) {
        throw Error(ErrorKind::InvalidParameter,
                    "angular step must lie in (0, pi), got " + std::to_string(angular_step));
    }
}

} // namespace

Loop::Loop(std::vector<Vec3> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) {
        throw Error(ErrorKind::InvalidParameter, "loop needs at least 3 vertices");
    }
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (!vertices_[i].allFinite()) {
            throw Error(ErrorKind::InvalidParameter, "non-finite vertex " + std::to_string(i));
        }
        if (segment(i).norm() <= kMinVertexSeparation) {
            throw Error(ErrorKind::InvalidParameter, "coincident consecutive vertices at " + std::to_string(i));
        }
    }
}

Vec3 Loop::centroid() const {
    Vec3 sum = Vec3::Zero();
    for (const auto& v : vertices_) sum += v;
    return sum / static_cast<double>(vertices_.size());
}

double Loop::length() const {
    double total = 0.0;
    for (std::size_t i = 0; i < size(); ++i) total += segment(i).norm();
    return total;
}

Vec3 Loop::vector_area() const {
    const Vec3 c = centroid();
    Vec3 area = Vec3::Zero();
    for (std::size_t i = 0; i < size(); ++i) {
        area += (vertices_[i] - c).cross(vertices_[next(i)] - c);
    }
    return 0.5 * area;
}

double Loop::diameter() const {
    double best = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = i + 1; j < size(); ++j) {
            best = std::max(best, (vertices_[i] - vertices_[j]).squaredNorm());
        }
    }
    return std::sqrt(best);
}

Loop Loop::reversed() const {
    return Loop(std::vector<Vec3>(vertices_.rbegin(), vertices_.rend()));
}

Loop Loop::transformed(const Eigen::Isometry3d& pose) const {
    std::vector<Vec3> out;
    out.reserve(size());
    for (const auto& v : vertices_) out.push_back(pose * v);
    return Loop(std::move(out));
}

double signed_area(const Loop& loop, const Vec3& normal) {
    return loop.vector_area().dot(normal.normalized());
}

Eigen::Matrix3d rotation_from_z(const Vec3& normal) {
    const double len = normal.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
        throw Error(ErrorKind::InvalidParameter, "normal must be a finite nonzero vector");
    }
    const Vec3 n = normal / len;
    const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 u = (helper - n * n.dot(helper)).normalized();
    const Vec3 v = n.cross(u);
    Eigen::Matrix3d r;
    r.col(0) = u;
    r.col(1) = v;
    r.col(2) = n;
    return r;
}

Loop make_circle(double radius, double angular_step, const Vec3& center, const Vec3& normal) {
    check_circle_params(radius, angular_step);
    const Eigen::Matrix3d r = rotation_from_z(normal);
    const std::size_t n = turn_vertex_count(angular_step);
    std::vector<Vec3> vertices;
    vertices.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = static_cast<double>(k) * angular_step;
        vertices.push_back(center + r * Vec3(radius * std::cos(theta), radius * std::sin(theta), 0.0));
    }
    return Loop(std::move(vertices));
}

Loop make_folded(double radius, double angular_step, double fold_angle) {
    check_circle_params(radius, angular_step);
    if (!(fold_angle >= 0.0) || fold_angle > std::numbers::pi) {
        throw Error(ErrorKind::InvalidParameter, "fold angle must lie in [0, pi]");
    }
    const Loop circle = make_circle(radius, angular_step);
    const double c = std::cos(fold_angle);
    const double s = std::sin(fold_angle);
    std::vector<Vec3> vertices;
    vertices.reserve(circle.size());
    for (const auto& v : circle.vertices()) {
        if (v.y() > 0.0) {
            vertices.emplace_back(v.x(), v.y() * c, v.y() * s);
        } else {
            vertices.push_back(v);
        }
    }
    return Loop(std::move(vertices));
}

Loop make_double(double radius, double angular_step, double pitch) {
    check_circle_params(radius, angular_step);
    if (!(pitch >= 0.0) || !std::isfinite(pitch)) {
        throw Error(ErrorKind::InvalidParameter, "pitch must be non-negative");
    }
    const std::size_t n = turn_vertex_count(angular_step);
    std::vector<Vec3> vertices;
    vertices.reserve(2 * n + 1);
    for (std::size_t turn = 0; turn < 2; ++turn) {
        for (std::size_t k = 0; k < n; ++k) {
            const double theta = static_cast<double>(k) * angular_step;
            const double z = pitch * (static_cast<double>(turn) + theta / (2.0 * std::numbers::pi));
            vertices.emplace_back(radius * std::cos(theta), radius * std::sin(theta), z);
        }
    }
    if (pitch > 0.0) {
        // The return leg would otherwise cut through the chord joining the two
        // turns; route it half a pitch outside the rim.
        const double last = static_cast<double>(n - 1) * angular_step;
        const double mid = 0.5 * (last + 2.0 * std::numbers::pi);
        const double r = radius + 0.5 * pitch;
        vertices.emplace_back(r * std::cos(mid), r * std::sin(mid), pitch);
    }
    return Loop(std::move(vertices));
}

LoopFrame fit_plane_frame(const Loop& loop) {
    LoopFrame frame;
    frame.centroid = loop.centroid();

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& v : loop.vertices()) {
        const Vec3 d = v - frame.centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Vec3 evals = solver.eigenvalues(); // ascending
    if (!(evals(1) > 1e-12 * evals(2))) {
        throw Error(ErrorKind::DegenerateGeometry, "loop vertices are collinear");
    }

    Vec3 normal = solver.eigenvectors().col(0).normalized();
    if (loop.vector_area().dot(normal) < 0.0) normal = -normal;
    frame.normal = normal;

    Vec3 axis = Vec3::Zero();
    for (const auto& v : loop.vertices()) {
        const Vec3 d = v - frame.centroid;
        axis = d - normal * normal.dot(d);
        if (axis.norm() > 1e-12) break;
    }
    frame.in_plane1 = axis.normalized();
    frame.in_plane2 = normal.cross(frame.in_plane1);
    return frame;
}

std::optional<PlaneCrossing> plane_crossing(const Vec3& p0, const Vec3& p1, const LoopFrame& frame) {
    const double d0 = frame.height(p0);
    const double d1 = frame.height(p1);
    int direction = 0;
    if (d0 < 0.0 && d1 >= 0.0) {
        direction = 1;
    } else if (d0 > 0.0 && d1 <= 0.0) {
        direction = -1;
    } else {
        return std::nullopt;
    }
    const double t = d0 / (d0 - d1);
    return PlaneCrossing{p0 + t * (p1 - p0), direction, t};
}

int winding_number(std::span<const Vec2> polygon, const Vec2& p) {
    int winding = 0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[(i + 1) % n];
        const double side = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && side > 0.0) ++winding;
        } else if (b.y() <= p.y() && side < 0.0) {
            --winding;
        }
    }
    return winding;
}

bool point_inside_planar(const Loop& loop, const LoopFrame& frame, const Vec3& p) {
    if (std::abs(frame.height(p)) > 1e-6 * loop.diameter()) {
        throw Error(ErrorKind::Precondition, "point is not on the loop plane");
    }
    std::vector<Vec2> polygon;
    polygon.reserve(loop.size());
    for (const auto& v : loop.vertices()) polygon.push_back(frame.project(v));
    return winding_number(polygon, frame.project(p)) != 0;
}

} // namespace knotfield
