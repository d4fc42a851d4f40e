#include "knotfield/error.hpp"
#include "knotfield/perturbation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace knotfield;

TEST(Seeds, SplitMixReferenceValues) {
    // Published SplitMix64 outputs for state 0: the first call adds the
    // golden gamma before mixing.
    EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(mix64(0x9e3779b97f4a7c15ULL), 0x6e789e6aa1b965f4ULL);
}

TEST(Seeds, DerivedStreamsDifferAndRepeat) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 10000; ++s) seen.insert(derive_seed(42, s));
    EXPECT_EQ(seen.size(), 10000u);
    EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
    EXPECT_NE(derive_seed(42, 7), derive_seed(43, 7));
}

TEST(Noise, ZeroSigmaIsNominal) {
    const Loop c = make_circle(1.0, 0.1);
    Rng rng(1);
    for (auto kind : {NoiseKind::Isotropic, NoiseKind::Cylindrical}) {
        const Loop p = perturb(c, {kind, 0.0}, rng);
        for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(p[i], c[i]);
    }
}

TEST(Noise, CylindricalHasNoTangentialPart) {
    const Loop c = make_circle(1.0, 0.1, Vec3(0.2, 0.3, 0.4), Vec3(1, 1, 1));
    const LoopFrame f = fit_plane_frame(c);
    const LoopPerturber noise(c, {NoiseKind::Cylindrical, 0.1});
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const Loop p = noise(rng);
        for (std::size_t i = 0; i < c.size(); ++i) {
            Vec3 radial = c[i] - f.centroid;
            radial -= f.normal * f.normal.dot(radial);
            const Vec3 tangent = f.normal.cross(radial.normalized());
            EXPECT_NEAR((p[i] - c[i]).dot(tangent), 0.0, 1e-12);
        }
    }
}

TEST(Noise, SampleSpreadMatchesSigma) {
    const Loop c = make_circle(1.0, 0.1);
    const double sigma = 0.2;
    for (auto kind : {NoiseKind::Isotropic, NoiseKind::Cylindrical}) {
        const LoopPerturber noise(c, {kind, sigma});
        Rng rng(9);
        double sq = 0.0;
        int n = 0;
        for (int rep = 0; rep < 400; ++rep) {
            const Loop p = noise(rng);
            for (std::size_t i = 0; i < c.size(); ++i, ++n) sq += (p[i] - c[i]).squaredNorm();
        }
        // Three free axes for isotropic noise, two for cylindrical.
        const double dof = kind == NoiseKind::Isotropic ? 3.0 : 2.0;
        EXPECT_NEAR(std::sqrt(sq / n / dof), sigma, 0.01 * sigma * 2.0);
    }
}

TEST(Noise, SameSeedSameLoop) {
    const Loop c = make_circle(1.0, 0.1);
    const LoopPerturber noise(c, {NoiseKind::Isotropic, 0.1});
    Rng a(77);
    Rng b(77);
    const Loop la = noise(a);
    const Loop lb = noise(b);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(la[i], lb[i]);
}

TEST(Noise, Parsing) {
    EXPECT_EQ(parse_noise_kind("isotropic"), NoiseKind::Isotropic);
    EXPECT_EQ(parse_noise_kind("cylindrical"), NoiseKind::Cylindrical);
    EXPECT_THROW(parse_noise_kind("gaussian"), Error);
    EXPECT_THROW(LoopPerturber(make_circle(1, 0.1), {NoiseKind::Isotropic, -1.0}), Error);
}

TEST(Wave, RatioAndShape) {
    const Loop c = make_circle(1.0, std::numbers::pi / 64.0);
    WaveSpec spec;
    spec.amplitude = 0.2;
    const LoopWave wave(c, spec);
    EXPECT_NEAR(wave.ratio(), 0.2, 1e-12);
    const LoopFrame f = fit_plane_frame(c);
    for (double t : {0.0, 0.7, 3.0}) {
        const Loop l = wave.at(t);
        double peak = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const Vec3 d = l[i] - c[i];
            // Perpendicular waves move vertices along the normal only.
            EXPECT_NEAR((d - f.normal * f.normal.dot(d)).norm(), 0.0, 1e-12);
            peak = std::max(peak, std::abs(f.normal.dot(d)));
        }
        EXPECT_NEAR(peak, 0.2, 0.01);
    }
}

TEST(Wave, ParallelStaysInPlane) {
    const Loop c = make_circle(1.0, 0.05);
    WaveSpec spec;
    spec.amplitude = 0.3;
    spec.direction = WaveDirection::Parallel;
    const Loop l = deform_wave(c, spec, 1.3);
    const LoopFrame f = fit_plane_frame(c);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(f.height(l[i]), 0.0, 1e-12);
}

TEST(Wave, PhaseIntegratesFrequency) {
    WaveSpec spec;
    // default chirp 1 + 0.5 t
    EXPECT_NEAR(spec.phase(2.0), 2.0 + 0.25 * 4.0, 1e-12);
    spec.temporal_frequency = [](double t) { return std::cos(t); };
    EXPECT_NEAR(spec.phase(1.0), std::sin(1.0), 1e-8);
    spec.spatial_frequency = 0;
    EXPECT_THROW(spec.validate(), Error);
}

TEST(Motion, TranslationRespectsBounds) {
    const Loop c = make_circle(0.1, 0.1);
    const MotionSpec m = translation_motion(Vec3(1, 2, 0), 0.05, 0.1);
    const MotionBounds b = measure_motion(m, c, 5.0, 0.01);
    EXPECT_LE(b.peak_speed, 0.05 + 1e-9);
    EXPECT_LE(b.peak_accel, 0.1 + 1e-6);
    EXPECT_NEAR(b.peak_speed, 0.05, 1e-6);
    const Loop moved = move_loop(c, m, 0.5); // still ramping: s = a t^2 / 2
    EXPECT_NEAR((moved.centroid() - c.centroid()).norm(), 0.5 * 0.1 * 0.25, 1e-12);
}

TEST(Motion, RotationKeepsPivotDistance) {
    const Loop c = make_circle(0.1, 0.1, Vec3(1, 0, 0));
    const MotionSpec m = rotation_motion(Vec3::Zero(), Vec3::UnitZ(), 0.5);
    const Loop l = move_loop(c, m, 2.0 * std::numbers::pi); // half a turn
    const Vec3 c0 = c.centroid();
    EXPECT_NEAR((l.centroid() - Vec3(-c0.x(), -c0.y(), c0.z())).norm(), 0.0, 1e-9);
    EXPECT_NEAR(l.centroid().norm(), c0.norm(), 1e-12);
    const MotionBounds b = measure_motion(m, c, 1.0, 1e-3);
    EXPECT_NEAR(b.peak_speed, 0.5 * 1.1, 1e-3);
}
