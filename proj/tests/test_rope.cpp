#include "knotfield/error.hpp"
#include "knotfield/rope.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace knotfield;

namespace {

constexpr double kSeg = 0.02;

Rope straight(std::size_t n = 41) { return Rope::straight(Vec3::Zero(), Vec3::UnitY(), n, kSeg); }

} // namespace

TEST(Rope, Construction) {
    const Rope r = straight();
    EXPECT_EQ(r.size(), 41u);
    EXPECT_NEAR(r.length(), 40 * kSeg, 1e-12);
    EXPECT_EQ(r.last(), 40u);
    EXPECT_THROW(Rope({Vec3::Zero(), Vec3::UnitX()}, 1.0), Error);
    EXPECT_THROW(Rope({Vec3::Zero(), Vec3::UnitX(), Vec3(3, 0, 0)}, 1.0), Error);
    EXPECT_THROW(Rope({Vec3::Zero(), Vec3::UnitX(), Vec3(2, 0, 0)}, 0.0), Error);
}

TEST(Rope, FollowTheLeaderFromEnd) {
    Rope r = straight();
    const Vec3 target = r[40] + Vec3(0.1, 0.05, 0.2);
    const Pin pin{40, target};
    r.update({&pin, 1});
    EXPECT_EQ(r[40], target);
    EXPECT_LT(max_segment_error(r), 1e-12);
    // Points far from the leader barely move.
    EXPECT_LT((r[0] - Vec3::Zero()).norm(), 0.25);
}

TEST(Rope, FollowerKeepsDirectionTowardsLeader) {
    // FTL: each follower lies on the line from its old position to the new
    // position of its leader.
    Rope r = straight(6);
    const std::vector<Vec3> before(r.points().begin(), r.points().end());
    const Pin pin{0, Vec3(0.03, -0.01, 0.0)};
    r.update({&pin, 1});
    for (std::size_t i = 1; i < r.size(); ++i) {
        const Vec3 lead = r[i - 1];
        const Vec3 expected = lead + kSeg * (before[i] - lead).normalized();
        EXPECT_NEAR((r[i] - expected).norm(), 0.0, 1e-12) << i;
    }
}

TEST(Rope, TwoPinsWithinReach) {
    Rope r = straight();
    const std::array<Pin, 2> pins{Pin{5, Vec3(0.05, 0.12, 0.02)}, Pin{30, Vec3(0.0, 0.5, 0.1)}};
    r.update(pins);
    EXPECT_NEAR((r[5] - pins[0].position).norm(), 0.0, 1e-9);
    EXPECT_NEAR((r[30] - pins[1].position).norm(), 0.0, 1e-9);
    EXPECT_LT(max_segment_error(r), 1e-5);
}

TEST(RopeProperty, LengthPreservedUnderRandomPins) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.03, 0.03);
    Rope r = straight();
    Vec3 a = r[10];
    Vec3 b = r[35];
    for (int step = 0; step < 500; ++step) {
        const Vec3 na = a + Vec3(u(rng), u(rng), u(rng));
        const Vec3 nb = b + Vec3(u(rng), u(rng), u(rng));
        if ((nb - na).norm() > 25 * kSeg * 0.95) continue;
        a = na;
        b = nb;
        const std::array<Pin, 2> pins{Pin{10, a}, Pin{35, b}};
        r.update(pins);
        ASSERT_LT(max_segment_error(r), 1e-5) << step;
        EXPECT_NEAR(r.length(), 40 * kSeg, 40 * 1e-5);
    }
}

TEST(Rope, Overstretch) {
    Rope r = straight();
    const std::array<Pin, 2> far{Pin{0, Vec3::Zero()}, Pin{10, Vec3(0, 0.5, 0)}};
    try {
        r.update(far);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Overstretch);
    }
}

TEST(Rope, SamePointTwice) {
    Rope r = straight();
    const std::array<Pin, 2> same{Pin{4, r[4]}, Pin{4, r[4]}};
    EXPECT_NO_THROW(r.update(same));
    const std::array<Pin, 2> split{Pin{4, r[4]}, Pin{4, r[4] + Vec3(0.01, 0, 0)}};
    EXPECT_THROW(r.update(split), Error);
    const Pin out{99, Vec3::Zero()};
    EXPECT_THROW(r.update({&out, 1}), Error);
}

TEST(Rope, NoPinsNoChange) {
    Rope r = straight();
    const std::vector<Vec3> before(r.points().begin(), r.points().end());
    r.update({});
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], before[i]);
}
