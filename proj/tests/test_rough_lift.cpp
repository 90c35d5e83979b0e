#include <gtest/gtest.h>

#include <cmath>

#include "roughpath/io.hpp"
#include "roughpath/rough_path.hpp"

namespace rp = roughpath;

TEST(ChenExtend, PointIntervalIsZero) {
    auto x = rp::sample_path([](double t) { return rp::Vec{t}; }, 8, 1.0, 1);
    auto lift = rp::smooth_lift(x, 2.0);
    EXPECT_EQ(lift.chen_extend(0.5, 0.5).max_abs_entry(), 0.0);
}

TEST(ChenExtend, LinearScalarPathGivesHalfSquare) {
    auto x = rp::sample_path([](double t) { return rp::Vec{t}; }, 16, 1.0, 1);
    auto lift = rp::smooth_lift(x, 2.0);
    EXPECT_NEAR(lift.chen_extend(0.0, 1.0)(0, 0), 0.5, 1e-14);  // int_0^1 r dr
    EXPECT_NEAR(lift.chen_extend(0.25, 0.75)(0, 0), 0.125, 1e-14);
}

TEST(ChenExtend, ChainingIsAssociative) {
    auto lift = rp::brownian_lift(5, 64, 1.0, 2, 2.1);
    // splitting [0, s] at different midpoints gives the same block
    for (std::size_t u : {10u, 25u, 40u}) {
        rp::Matrix via_u = lift.block(0, u) + lift.block(u, 60);
        via_u += rp::Matrix::outer(lift.base().increment(0, u), lift.base().increment(u, 60));
        rp::Matrix direct = lift.block(0, 60);
        EXPECT_LE((via_u - direct).max_abs_entry(), 1e-12);
    }
}

TEST(ChenDefect, CleanConstructionsAreConsistent) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto b = rp::brownian_lift(seed, 256, 1.0, 2, 2.1);
        EXPECT_LE(rp::chen_defect(b), 1e-12) << "seed " << seed;
    }
    auto x = rp::sample_path([](double t) { return rp::Vec{std::sin(t), t * t}; }, 128, 1.0, 2);
    EXPECT_LE(rp::chen_defect(rp::smooth_lift(x, 2.0)), 1e-12);
}

TEST(ChenDefect, CorruptedBlockIsDetected) {
    auto b = rp::brownian_lift(42, 256, 1.0, 2, 2.1);
    auto bad = rp::with_corrupted_block(b, 100, 0, 0, 1.0);
    EXPECT_GE(rp::chen_defect(bad), 1.0 - 1e-9);
    EXPECT_GE(rp::chen_defect(bad), rp::kSecondLevelDefectThreshold);
    // off-diagonal corruption surfaces through the symmetric part as well
    auto bad2 = rp::with_corrupted_block(b, 17, 0, 1, 1.0);
    EXPECT_GE(rp::chen_defect(bad2), rp::kSecondLevelDefectThreshold);
}

TEST(SmoothLift, LinearTwoDimensionalExample) {
    auto x = rp::sample_path([](double t) { return rp::Vec{t, 2.0 * t}; }, 1, 1.0, 2);
    auto lift = rp::smooth_lift(x, 2.0);
    auto xx = lift.chen_extend(0.0, 1.0);
    EXPECT_NEAR(xx(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(xx(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(xx(1, 0), 1.0, 1e-15);
    EXPECT_NEAR(xx(1, 1), 2.0, 1e-15);
}

TEST(SmoothLift, GeometricSymmetryHoldsPerInterval) {
    auto x = rp::sample_path([](double t) { return rp::Vec{std::cos(3 * t), std::sin(2 * t)}; },
                             64, 1.0, 2);
    auto lift = rp::smooth_lift(x, 2.5);
    for (std::size_t k = 0; k < lift.base().segments(); ++k) {
        rp::Vec dx = lift.base().increment(k, k + 1);
        rp::Matrix sym = lift.blocks()[k].symmetric_part() - 0.5 * rp::Matrix::outer(dx, dx);
        EXPECT_LE(sym.max_abs_entry(), 1e-15);
    }
    EXPECT_THROW(rp::smooth_lift(x, 1.9), rp::DomainError);
    EXPECT_THROW(rp::smooth_lift(x, 3.0), rp::DomainError);
}

TEST(BrownianLift, DeterministicGivenSeed) {
    auto a = rp::brownian_lift(7, 128, 1.0, 2, 2.1);
    auto b = rp::brownian_lift(7, 128, 1.0, 2, 2.1);
    EXPECT_TRUE(a.base() == b.base());
    for (std::size_t k = 0; k < a.blocks().size(); ++k)
        EXPECT_TRUE(a.blocks()[k] == b.blocks()[k]);
    auto c = rp::brownian_lift(8, 128, 1.0, 2, 2.1);
    EXPECT_FALSE(a.base() == c.base());
    EXPECT_THROW(rp::brownian_lift(7, 1, 1.0, 1, 2.1), rp::DomainError);
    EXPECT_THROW(rp::brownian_lift(7, 64, 1.0, 1, 2.0), rp::DomainError);
}

TEST(BrownianLift, ScalarSecondLevelIsHalfSquaredIncrement) {
    auto b = rp::brownian_lift(3, 64, 1.0, 1, 2.1);
    for (std::size_t k = 0; k < b.base().segments(); ++k) {
        double dx = b.base().value(k + 1)[0] - b.base().value(k)[0];
        EXPECT_NEAR(b.blocks()[k](0, 0), 0.5 * dx * dx, 1e-12);
    }
    // consequently XX_{t,s} = X_{t,s}^2 / 2 over any interval
    double dx = b.base().value(50)[0] - b.base().value(10)[0];
    EXPECT_NEAR(b.block(10, 50)(0, 0), 0.5 * dx * dx, 1e-12);
}

TEST(BrownianLift, LevyAreaVarianceMatchesFineOracle) {
    // antisymmetric part of XX_{0,T} for d = 2; sample variance over seeds
    // compared against a refinement-256 oracle and the closed form T^2/4
    const double T = 1.0;
    const std::size_t n = 64, seeds = 500;
    double var_coarse = 0.0, var_fine = 0.0;
    for (std::uint64_t s = 1; s <= seeds; ++s) {
        auto lift = rp::brownian_lift(s, n, T, 2, 2.1, 16);
        double a = lift.block(0, n).antisymmetric_part()(0, 1);
        var_coarse += a * a;
        auto oracle = rp::brownian_lift(s, n, T, 2, 2.1, 256);
        double b = oracle.block(0, n).antisymmetric_part()(0, 1);
        var_fine += b * b;
    }
    var_coarse /= seeds;
    var_fine /= seeds;
    EXPECT_NEAR(var_coarse / var_fine, 1.0, 0.25);
    EXPECT_NEAR(var_coarse / (T * T / 4.0), 1.0, 0.25);
}

TEST(ChenRefine, ChainsBackToStoredBlocks) {
    auto b = rp::brownian_lift(9, 32, 1.0, 2, 2.3);
    auto fine = rp::chen_refine(b, 8);
    EXPECT_EQ(fine.base().segments(), 32u * 8u);
    for (std::size_t k = 0; k < b.base().segments(); ++k) {
        rp::Matrix chained = fine.block(k * 8, (k + 1) * 8);
        EXPECT_LE((chained - b.blocks()[k]).max_abs_entry(), 1e-13) << "interval " << k;
    }
    EXPECT_LE(rp::chen_defect(fine), 1e-12);
}

TEST(RoughPathIo, JsonRoundTripPreservesEverything) {
    auto b = rp::brownian_lift(21, 48, 2.0, 2, 2.2);
    auto back = rp::rough_from_json(rp::rough_to_json(b));
    EXPECT_TRUE(back.base() == b.base());
    EXPECT_EQ(back.p_exponent(), b.p_exponent());
    for (std::size_t k = 0; k < b.blocks().size(); ++k)
        EXPECT_TRUE(back.blocks()[k] == b.blocks()[k]);
    // content id is stable
    EXPECT_EQ(rp::rough_path_id(b), rp::rough_path_id(back));
}
