#include "knotfield/error.hpp"
#include "knotfield/loop.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace knotfield;

namespace {

constexpr double kPi = std::numbers::pi;

// Total turning of p -> polygon vertices, in turns.
double angle_sum_winding(const std::vector<Vec2>& poly, const Vec2& p) {
    double total = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i] - p;
        const Vec2 b = poly[(i + 1) % poly.size()] - p;
        total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    }
    return total / (2.0 * kPi);
}

} // namespace

TEST(Loop, RejectsDegenerateInput) {
    EXPECT_THROW(Loop({Vec3::Zero(), Vec3::UnitX()}), Error);
    EXPECT_THROW(Loop({Vec3::Zero(), Vec3::Zero(), Vec3::UnitX()}), Error);
    EXPECT_THROW(make_circle(-1.0, 0.1), Error);
    EXPECT_THROW(make_circle(1.0, 0.0), Error);
    EXPECT_THROW(make_folded(1.0, 0.1, 4.0), Error);
    EXPECT_THROW(make_double(1.0, 0.1, -0.1), Error);
}

TEST(Loop, CircleVertexCountAndArea) {
    const Loop c = make_circle(1.0, 0.1);
    EXPECT_EQ(c.size(), 63u); // ceil(2 pi / 0.1)
    for (const auto& v : c.vertices()) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    // Polygon area of the regular-ish 63-gon, counter-clockwise about +Z.
    EXPECT_NEAR(signed_area(c, Vec3::UnitZ()), kPi, 0.01);
    EXPECT_NEAR(signed_area(c.reversed(), Vec3::UnitZ()), -signed_area(c, Vec3::UnitZ()), 1e-12);
}

TEST(Loop, CircleAboutArbitraryNormal) {
    const Vec3 n = Vec3(1.0, 2.0, -0.5).normalized();
    const Vec3 centre(0.3, -0.2, 1.0);
    const Loop c = make_circle(0.5, 2.0 * kPi / 120.0, centre, n);
    for (const auto& v : c.vertices()) {
        EXPECT_NEAR((v - centre).norm(), 0.5, 1e-12);
        EXPECT_NEAR((v - centre).dot(n), 0.0, 1e-12);
    }
    const LoopFrame f = fit_plane_frame(c);
    EXPECT_NEAR(f.normal.dot(n), 1.0, 1e-9);
    EXPECT_NEAR((f.centroid - centre).norm(), 0.0, 1e-9);
    EXPECT_NEAR(f.in_plane1.cross(f.in_plane2).dot(f.normal), 1.0, 1e-9);
}

TEST(Loop, FoldedHalfIsRotated) {
    const Loop f = make_folded(1.0, 0.1, kPi / 2.0);
    for (const auto& v : f.vertices()) {
        EXPECT_NEAR(v.norm(), 1.0, 1e-12);
        EXPECT_LE(v.y(), 1e-12); // the upper half now stands in the xz plane
        EXPECT_GE(v.z(), 0.0);
    }
    const Loop flat = make_folded(1.0, 0.1, 0.0);
    const Loop circle = make_circle(1.0, 0.1);
    for (std::size_t i = 0; i < flat.size(); ++i) EXPECT_NEAR((flat[i] - circle[i]).norm(), 0.0, 1e-12);
}

TEST(Loop, DoubleHasTwoTurns) {
    const double pitch = 0.2;
    const Loop d = make_double(1.0, 0.1, pitch);
    EXPECT_EQ(d.size(), 2u * 63u + 1u);
    // Projected area counts both turns.
    EXPECT_NEAR(signed_area(d, Vec3::UnitZ()), 2.0 * kPi, 0.1);
    EXPECT_NEAR(d[63].z(), pitch, 1e-12);
}

TEST(Loop, WindingMatchesAngleSum) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_real_distribution<double> r(0.3, 1.2);
    for (int trial = 0; trial < 200; ++trial) {
        // Random star-shaped polygon, either orientation.
        const int n = 5 + trial % 20;
        std::vector<Vec2> poly;
        for (int k = 0; k < n; ++k) {
            const double t = 2.0 * kPi * k / n;
            const double rad = r(rng);
            poly.emplace_back(rad * std::cos(t), rad * std::sin(t));
        }
        if (trial % 2) std::reverse(poly.begin(), poly.end());
        for (int s = 0; s < 20; ++s) {
            const Vec2 p(u(rng), u(rng));
            const double w = angle_sum_winding(poly, p);
            if (std::abs(w - std::round(w)) > 1e-6) continue; // on an edge
            EXPECT_EQ(winding_number(poly, p), static_cast<int>(std::lround(w)));
        }
    }
}

TEST(Loop, WindingCountsDoubleCover) {
    std::vector<Vec2> poly;
    for (int k = 0; k < 40; ++k) {
        const double t = 4.0 * kPi * k / 40;
        poly.emplace_back(std::cos(t), std::sin(t));
    }
    EXPECT_EQ(winding_number(poly, Vec2(0.1, 0.2)), 2);
    EXPECT_EQ(winding_number(poly, Vec2(2.0, 0.0)), 0);
}

TEST(Loop, PlaneCrossingIsHalfOpen) {
    const LoopFrame f = fit_plane_frame(make_circle(1.0, 0.1));
    const Vec3 below(0.1, 0.0, -0.5);
    const Vec3 on(0.1, 0.0, 0.0);
    const Vec3 above(0.1, 0.0, 0.5);
    const auto c = plane_crossing(below, above, f);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->direction, 1);
    EXPECT_NEAR(c->fraction, 0.5, 1e-12);
    EXPECT_NEAR((c->point - on).norm(), 0.0, 1e-12);
    EXPECT_TRUE(plane_crossing(below, on, f));
    EXPECT_FALSE(plane_crossing(on, above, f));
    EXPECT_EQ(plane_crossing(above, below, f)->direction, -1);
    EXPECT_FALSE(plane_crossing(above, above + Vec3::UnitX(), f));
}

TEST(Loop, PointInsidePlanar) {
    const Loop c = make_circle(1.0, 0.1);
    const LoopFrame f = fit_plane_frame(c);
    EXPECT_TRUE(point_inside_planar(c, f, Vec3(0.5, 0.5, 0.0)));
    EXPECT_FALSE(point_inside_planar(c, f, Vec3(0.9, 0.9, 0.0)));
    EXPECT_THROW(point_inside_planar(c, f, Vec3(0.0, 0.0, 0.1)), Error);
}

TEST(Loop, TextRoundTrip) {
    const Loop c = make_folded(0.7, 0.2, 1.0);
    std::stringstream s;
    write_loop(s, c);
    const Loop back = read_loop(s);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR((back[i] - c[i]).norm(), 0.0, 1e-12);
}

TEST(Loop, TextParsing) {
    std::istringstream ok("# square\n0 0 0\n1 0 0  # corner\n\n1 1 0\n0 1 0\n");
    EXPECT_EQ(read_loop(ok).size(), 4u);
    std::istringstream bad("0 0 0\n1 0\n1 1 0\n");
    EXPECT_THROW(read_loop(bad), Error);
    std::istringstream extra("0 0 0\n1 0 0 4\n1 1 0\n");
    EXPECT_THROW(read_loop(extra), Error);
    EXPECT_THROW(read_loop_file("/nonexistent/loop.txt"), Error);
}

TEST(Loop, TransformKeepsShape) {
    const Loop c = make_double(0.5, 0.3, 0.1);
    Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
    pose.rotate(Eigen::AngleAxisd(0.7, Vec3(1, 1, 0).normalized()));
    pose.pretranslate(Vec3(1, 2, 3));
    const Loop t = c.transformed(pose);
    EXPECT_NEAR(t.length(), c.length(), 1e-12);
    EXPECT_NEAR((t.centroid() - pose * c.centroid()).norm(), 0.0, 1e-12);
}
