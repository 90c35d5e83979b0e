#include <gtest/gtest.h>

#include <cmath>

#include "roughpath/functional.hpp"
#include "roughpath/oracle.hpp"
#include "roughpath/registry.hpp"
#include "roughpath/rough_path.hpp"

namespace rp = roughpath;

namespace {

std::shared_ptr<const rp::DiscretePath> brownian_probe(std::uint64_t seed, std::size_t n = 128) {
    auto lift = rp::brownian_lift(seed, n, 1.0, 1, 2.1);
    return std::make_shared<const rp::DiscretePath>(lift.base());
}

rp::PathFunctional endpoint() { return rp::make_functional("endpoint", 1, 1); }

}  // namespace

TEST(DInfty, BasicExamples) {
    auto x = std::make_shared<const rp::DiscretePath>(
        rp::sample_path([](double t) { return rp::Vec{t}; }, 8, 1.0, 1));
    EXPECT_DOUBLE_EQ(rp::d_infty({0.5, x}, {0.5, x}), 0.0);
    auto c0 = std::make_shared<const rp::DiscretePath>(rp::DiscretePath::zeros(8, 1.0, 1));
    // constant path, different stop times: only the time term remains
    EXPECT_DOUBLE_EQ(rp::d_infty({0.25, c0}, {0.75, c0}), 0.5);
    std::vector<double> cvals(9, 2.0);
    auto c2 = std::make_shared<const rp::DiscretePath>(
        rp::DiscretePath(std::vector<double>(c0->times()), std::move(cvals), 1));
    EXPECT_DOUBLE_EQ(rp::d_infty({1.0, c0}, {1.0, c2}), 2.0);
}

TEST(NonAnticipativity, TailModificationsAreInvisible) {
    auto base = brownian_probe(3, 64);
    double t = base->time(32);
    // shift every sample strictly after t
    std::vector<double> vals(base->raw_values());
    for (std::size_t i = 33; i < base->size(); ++i) vals[i] += 17.0;
    auto tampered = std::make_shared<const rp::DiscretePath>(
        rp::DiscretePath(std::vector<double>(base->times()), std::move(vals), 1));

    std::vector<rp::PathFunctional> shipped;
    shipped.push_back(endpoint());
    shipped.push_back(rp::running_max());
    shipped.push_back(rp::smoothed_running_max(0.25));
    shipped.push_back(rp::make_functional("intdep:y2", 1, 1));
    shipped.push_back(rp::make_functional("discrete:t=0.25;0.5:prod", 1, 1));
    for (const auto& f : shipped) {
        rp::Vec a = f.evaluate({t, base});
        rp::Vec b = f.evaluate({t, tampered});
        for (std::size_t c = 0; c < a.size(); ++c)
            EXPECT_EQ(a[c], b[c]) << f.id;
    }
}

TEST(VerticalDerivative, EndpointFunctionalHasUnitGradient) {
    auto base = brownian_probe(1);
    auto f = endpoint();
    auto vd = rp::vertical_derivative(f, {0.5, base});
    EXPECT_DOUBLE_EQ(vd.value[0], 1.0);
    // finite differences agree when the analytic derivative is dropped
    rp::PathFunctional fd = f;
    fd.vertical = nullptr;
    auto vfd = rp::vertical_derivative(fd, {0.5, base});
    EXPECT_NEAR(vfd.value[0], 1.0, 1e-9);
    EXPECT_TRUE(vfd.stable);
}

TEST(VerticalDerivative, RunningIntegralIgnoresTerminalBump) {
    auto f = rp::make_functional("intdep:xs", 1, 1);
    auto base = brownian_probe(2);
    auto vd = rp::vertical_derivative(f, {0.75, base});
    EXPECT_DOUBLE_EQ(vd.value[0], 0.0);  // analytic: bump at t does not move int_0^t x
}

TEST(VerticalDerivative, SmoothedMaxAtTheMaximumIsOne) {
    auto up = std::make_shared<const rp::DiscretePath>(
        rp::sample_path([](double t) { return rp::Vec{t}; }, 16, 1.0, 1));
    auto f = rp::smoothed_running_max(0.25);
    auto vd = rp::vertical_derivative(f, {1.0, up});
    EXPECT_DOUBLE_EQ(vd.value[0], 1.0);  // z(t) = m(t, z)
}

TEST(HorizontalDerivative, FrozenPathsDoNotMove) {
    auto base = brownian_probe(4);
    EXPECT_DOUBLE_EQ(rp::horizontal_derivative(endpoint(), {0.5, base})[0], 0.0);
    EXPECT_DOUBLE_EQ(rp::horizontal_derivative(rp::running_max(), {0.5, base})[0], 0.0);
    EXPECT_THROW(rp::horizontal_derivative(endpoint(), {1.0, base}), rp::HorizonError);
}

TEST(HorizontalDerivative, IntegralFamilyRecoversIntegrand) {
    auto f = rp::make_functional("intdep:y2", 1, 1);
    auto base = brownian_probe(5);
    double t = base->time(96);
    double z = base->value(96)[0];
    EXPECT_NEAR(rp::horizontal_derivative(f, {t, base})[0], z * z, 1e-12);
    // forward finite difference agrees: the frozen integrand is constant in s
    rp::PathFunctional fd = f;
    fd.horizontal = nullptr;
    EXPECT_NEAR(rp::horizontal_derivative(fd, {t, base})[0], z * z, 1e-9);
}

TEST(SmoothedRunningMax, BranchValuesAndDerivatives) {
    double eps = 0.25;
    auto f = rp::smoothed_running_max(eps);
    // path rises to 1 then falls; running max stays 1
    auto path = std::make_shared<const rp::DiscretePath>(rp::DiscretePath::scalar(
        {0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 1.0, 0.3, 0.55, 0.2}));
    // z = 0.3 <= m - 2 eps = 0.5: flat branch
    EXPECT_DOUBLE_EQ(f.evaluate({0.5, path})[0], 1.0 - eps);
    EXPECT_DOUBLE_EQ(f.vertical({0.5, path})[0], 0.0);
    EXPECT_DOUBLE_EQ(f.vertical2({0.5, path})[0], 0.0);
    // z = 0.55 in the blending band
    double u = 0.55 - 0.5;
    auto [a3, a4, a5] = rp::quintic_blend_coefficients(eps);
    double expected = 1.0 - eps + ((a5 * u + a4) * u + a3) * u * u * u;
    EXPECT_NEAR(f.evaluate({0.75, path})[0], expected, 1e-15);
    // z at the maximum
    EXPECT_DOUBLE_EQ(f.evaluate({0.25, path})[0], 1.0);
    EXPECT_DOUBLE_EQ(f.vertical({0.25, path})[0], 1.0);
}

TEST(SmoothedRunningMax, QuinticCoefficientsSolveTheBoundarySystem) {
    for (double eps : {0.1, 0.25, 0.5, 2.0}) {
        auto [a3, a4, a5] = rp::quintic_blend_coefficients(eps);
        double w = 2.0 * eps;
        auto h = [&](double u) { return ((a5 * u + a4) * u + a3) * u * u * u; };
        auto h1 = [&](double u) { return ((5 * a5 * u + 4 * a4) * u + 3 * a3) * u * u; };
        auto h2 = [&](double u) { return ((20 * a5 * u + 12 * a4) * u + 6 * a3) * u; };
        EXPECT_NEAR(h(w), eps, 1e-12 * std::max(1.0, eps));
        EXPECT_NEAR(h1(w), 1.0, 1e-12);
        EXPECT_NEAR(h2(w), 0.0, 1e-12 / eps);
        EXPECT_DOUBLE_EQ(h(0.0), 0.0);
        EXPECT_DOUBLE_EQ(h1(0.0), 0.0);
        EXPECT_DOUBLE_EQ(h2(0.0), 0.0);
        // closed form of the solved system: a5 = 0, quartic suffices
        EXPECT_NEAR(a3, 1.0 / (w * w), 1e-12);
        EXPECT_NEAR(a4, -0.5 / (w * w * w), 1e-12);
        EXPECT_NEAR(a5, 0.0, 1e-12);
    }
}

TEST(SmoothedRunningMax, QuinticBranchBoundariesAreSmooth) {
    double eps = 0.25;
    auto f = rp::smoothed_running_max(eps, rp::SmoothingKind::Quintic);
    // walk z across [m - 2 eps, m] with m = 1 pinned by an early spike
    auto path_at = [&](double z) {
        return std::make_shared<const rp::DiscretePath>(
            rp::DiscretePath::scalar({0.0, 0.25, 1.0}, {0.0, 1.0, z}));
    };
    for (double boundary : {1.0 - 2 * eps, 1.0}) {
        double lo = boundary - 1e-11, hi = boundary + 1e-11;
        for (auto deriv : {&rp::PathFunctional::evaluate, &rp::PathFunctional::vertical,
                           &rp::PathFunctional::vertical2}) {
            double below = (f.*deriv)({1.0, path_at(lo)})[0];
            double above = (f.*deriv)({1.0, path_at(hi)})[0];
            EXPECT_NEAR(below, above, 1e-9);
        }
    }
}

TEST(SmoothedRunningMax, QuadraticBlendMeetsValueAndSlopeOnly) {
    double eps = 0.5;
    auto f = rp::smoothed_running_max(eps, rp::SmoothingKind::Quadratic);
    auto path = std::make_shared<const rp::DiscretePath>(
        rp::DiscretePath::scalar({0.0, 0.25, 1.0}, {0.0, 1.0, 1.0 - 1e-12}));
    EXPECT_NEAR(f.evaluate({1.0, path})[0], 1.0, 1e-11);
    EXPECT_NEAR(f.vertical({1.0, path})[0], 1.0, 1e-11);
    // h'' = 1/(2 eps) does not vanish at the band edges
    EXPECT_NEAR(f.vertical2({1.0, path})[0], 1.0 / (2.0 * eps), 1e-9);
}

TEST(DiscreteTimeFunctional, SinglePinAtHorizonIsTheEndpoint) {
    auto f = rp::discrete_time_functional(
        {1.0}, 1, 1, [](double, const std::vector<rp::Vec>& xs) { return rp::Vec{xs[0][0]}; },
        [](double, const std::vector<rp::Vec>&, std::size_t) { return rp::Vec{1.0}; });
    auto base = brownian_probe(6);
    for (double t : {0.25, 0.5, 1.0}) {
        EXPECT_DOUBLE_EQ(f.evaluate({t, base})[0], base->value_at(t)[0]);
        EXPECT_DOUBLE_EQ(f.vertical({t, base})[0], 1.0);
    }
}

TEST(DiscreteTimeFunctional, GradientVanishesOncePinsHavePassed) {
    auto f = rp::make_functional("discrete:t=0.2;0.4:sum", 1, 1);
    auto base = brownian_probe(7);
    EXPECT_DOUBLE_EQ(f.vertical({0.7, base})[0], 0.0);  // empty sum over pins >= t
    EXPECT_DOUBLE_EQ(f.vertical({0.1, base})[0], 2.0);  // both pins still ahead
}

TEST(DiscreteTimeFunctional, ProductPinsMatchFiniteDifferences) {
    auto f = rp::make_functional("discrete:t=0.25;0.75:prod", 1, 1);
    auto base = brownian_probe(8);
    for (double t : {0.1, 0.5, 0.9}) {
        rp::PathFunctional fd = f;
        fd.vertical = nullptr;
        double analytic = f.vertical({t, base})[0];
        double numeric = rp::vertical_derivative(fd, {t, base}).value[0];
        EXPECT_NEAR(analytic, numeric, 1e-7);
    }
}

TEST(IntegralFunctional, TerminalIntegrandExamples) {
    auto line = std::make_shared<const rp::DiscretePath>(
        rp::sample_path([](double t) { return rp::Vec{t}; }, 64, 1.0, 1));
    // psi = y: F = t x(t), gradient t
    auto fy = rp::make_functional("intdep:y", 1, 1);
    for (double t : {0.25, 0.5, 1.0}) {
        EXPECT_NEAR(fy.evaluate({t, line})[0], t * t, 1e-14);
        EXPECT_NEAR(fy.vertical({t, line})[0], t, 1e-14);
    }
    // psi = y^2 with x(t) = t: F = t^3, gradient 2 t^2
    auto fy2 = rp::make_functional("intdep:y2", 1, 1);
    for (double t : {0.25, 0.5, 1.0}) {
        EXPECT_NEAR(fy2.evaluate({t, line})[0], t * t * t, 1e-14);
        EXPECT_NEAR(fy2.vertical({t, line})[0], 2.0 * t * t, 1e-14);
    }
    // psi = x(s): horizontal derivative x(t), vertical zero
    auto fxs = rp::make_functional("intdep:xs", 1, 1);
    EXPECT_NEAR(fxs.evaluate({1.0, line})[0], 0.5, 1e-14);
    EXPECT_DOUBLE_EQ(fxs.vertical({0.5, line})[0], 0.0);
    EXPECT_NEAR(fxs.horizontal({0.5, line})[0], 0.5, 1e-14);
}

TEST(FunctionalRemainder, ExactFirstOrderExpansionsVanish) {
    auto base = brownian_probe(9, 64);
    auto f = endpoint();
    for (std::size_t i = 0; i < 64; i += 9)
        EXPECT_DOUBLE_EQ(rp::functional_remainder(f, *base, i, std::min<std::size_t>(i + 17, 64))[0],
                         0.0);
    auto c = rp::make_functional("const:3.25", 1, 1);
    EXPECT_DOUBLE_EQ(rp::functional_remainder(c, *base, std::size_t{0}, std::size_t{40})[0], 0.0);
    EXPECT_THROW(rp::functional_remainder(rp::running_max(), *base, std::size_t{0}, std::size_t{10}),
                 rp::CapabilityError);
}

TEST(FunctionalRemainder, RunningIntegralOnTheLine) {
    auto line = rp::sample_path([](double t) { return rp::Vec{t}; }, 32, 1.0, 1);
    auto f = rp::make_functional("intdep:xs", 1, 1);
    for (std::size_t i = 0; i <= 32; i += 5)
        for (std::size_t j = i; j <= 32; j += 7) {
            double t = line.time(i), s = line.time(j);
            EXPECT_NEAR(rp::functional_remainder(f, line, i, j)[0], 0.5 * (s * s - t * t),
                        1e-12);
        }
}

TEST(FdChecks, AnalyticDerivativesMatchToSecondOrder) {
    // integral family with a cubic terminal integrand: central differences
    // carry an O(h^2) error, halving h divides the discrepancy by ~4
    auto f = rp::integral_functional(
        1, 1,
        [](double, const rp::StoppedPath&, std::span<const double> y) {
            return rp::Vec{y[0] * y[0] * y[0]};
        },
        [](double, const rp::StoppedPath&, std::span<const double> y) {
            return rp::Vec{3.0 * y[0] * y[0]};
        });
    std::vector<rp::StoppedPath> probes;
    auto base = brownian_probe(10);
    for (double t : {0.3, 0.6, 0.9}) probes.push_back({t, base});
    auto rep = rp::oracle::fd_derivative_check(f, probes);
    EXPECT_LE(rep.max_vertical_discrepancy, 1e-6);
    ASSERT_TRUE(rep.has_slope);
    EXPECT_NEAR(rep.vertical_slope, 2.0, 0.3);
    EXPECT_TRUE(rep.stable);
}

TEST(FdChecks, RawRunningMaxIsUnstableAtTheArgmax) {
    // the maximum is attained earlier as well, so a downward bump at t leaves
    // the running max pinned while an upward bump moves it: one-sided slopes
    // disagree (1 vs 0)
    auto tie = std::make_shared<const rp::DiscretePath>(
        rp::DiscretePath::scalar({0.0, 0.25, 0.5, 1.0}, {0.0, 1.0, 0.3, 1.0}));
    rp::PathFunctional f = rp::running_max();
    auto vd = rp::vertical_derivative(f, {1.0, tie});
    EXPECT_FALSE(vd.stable);
}

TEST(RemainderScaling, SmoothedMaxHasTheCertifiedExponent) {
    double p = 2.1;
    double threshold = (1.0 + 1.0 / p) / p - 0.15;
    auto f = rp::smoothed_running_max(0.25, rp::SmoothingKind::Quintic);
    std::vector<rp::DiscretePath> probes;
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
        probes.push_back(rp::brownian_lift(seed, 256, 1.0, 1, p).base());
    auto rep = rp::regularity_report(f, probes, p);
    ASSERT_TRUE(rep.has_remainder_slope);
    EXPECT_GE(rep.remainder_slope, threshold);
}

TEST(ContinuityOfControl, RemainderDifferenceRatiosAreStable) {
    double p = 2.1, qp = rp::q_exponent(p), nu = 1.0 / p;
    auto f = rp::smoothed_running_max(0.5, rp::SmoothingKind::Quintic);
    std::vector<double> ratios;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto y1 = rp::brownian_lift(seed, 96, 1.0, 1, p).base();
        auto y2 = rp::brownian_lift(seed + 100, 96, 1.0, 1, p).base();
        // blend towards y1 so the pair is close but not identical
        std::vector<double> blend(y1.raw_values());
        for (std::size_t i = 0; i < blend.size(); ++i)
            blend[i] = 0.85 * blend[i] + 0.15 * y2.raw_values()[i];
        rp::DiscretePath y2b(std::vector<double>(y1.times()), std::move(blend), 1);

        auto s1 = rp::sample_functional(f, y1);
        auto s2 = rp::sample_functional(f, y2b);
        auto rdiff = [&](std::size_t i, std::size_t j) {
            auto rem = [&](const rp::FunctionalSamples& s, const rp::DiscretePath& y) {
                double r = s.values.value(j)[0] - s.values.value(i)[0];
                r -= s.gradients.value(i)[0] * (y.value(j)[0] - y.value(i)[0]);
                return r;
            };
            return std::abs(rem(s1, y1) - rem(s2, y2b));
        };
        double num = rp::variation_norm_two_param(rdiff, qp, 0, y1.size() - 1);
        double sup = 0.0;
        for (std::size_t i = 0; i < y1.size(); ++i)
            sup = std::max(sup, std::abs(y1.value(i)[0] - y2b.value(i)[0]));
        double pv = rp::p_variation_exact(
            rp::DiscretePath(std::vector<double>(y1.times()),
                             rp::sub(y1.raw_values(), y2b.raw_values()), 1),
            p);
        double den = std::pow(sup, nu) + std::pow(pv, nu);
        ASSERT_GT(den, 0.0);
        ratios.push_back(num / den);
    }
    std::sort(ratios.begin(), ratios.end());
    double median = ratios[ratios.size() / 2];
    EXPECT_LT(ratios.back(), 25.0 * median);  // constant stability, no blow-up
    EXPECT_TRUE(std::isfinite(ratios.back()));
}

TEST(RegularityReport, EndpointFunctionalHasUnitConstant) {
    std::vector<rp::DiscretePath> probes;
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
        probes.push_back(rp::brownian_lift(seed, 64, 1.0, 1, 2.1).base());
    auto rep = rp::regularity_report(endpoint(), probes);
    EXPECT_NEAR(rep.f_lipschitz, 1.0, 1e-9);
    EXPECT_TRUE(rep.lipschitz_ok);
    EXPECT_TRUE(rep.vertical_ok);
}

TEST(RegularityReport, SmoothedMaxPassesAndRawMaxFails) {
    std::vector<rp::DiscretePath> probes;
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
        probes.push_back(rp::brownian_lift(seed, 64, 1.0, 1, 2.1).base());
    auto good = rp::regularity_report(rp::smoothed_running_max(0.25), probes);
    EXPECT_TRUE(good.lipschitz_ok);
    EXPECT_TRUE(good.vertical_ok);
    EXPECT_TRUE(good.vertical_stable);

    // probes whose stop points revisit the maximum expose the raw running max
    std::vector<rp::DiscretePath> ties;
    for (double amp : {1.0, 2.0}) {
        std::vector<double> t(33), v(33);
        for (std::size_t i = 0; i <= 32; ++i) {
            t[i] = static_cast<double>(i) / 32.0;
            v[i] = (i % 2 == 0) ? amp : 0.0;
        }
        ties.emplace_back(std::move(t), std::move(v), 1);
    }
    auto bad = rp::regularity_report(rp::running_max(), ties);
    EXPECT_FALSE(bad.vertical_stable);
    EXPECT_FALSE(bad.vertical_ok);
}

TEST(StoppedPath, MaterializeAndBumpSemantics) {
    auto base = brownian_probe(11, 16);
    rp::StoppedPath sp{0.5, base};
    rp::DiscretePath frozen = rp::materialize(sp);
    for (std::size_t i = 0; i < frozen.size(); ++i)
        if (frozen.time(i) > 0.5)
            EXPECT_DOUBLE_EQ(frozen.value(i)[0], base->value_at(0.5)[0]);
    rp::Vec e{0.125};
    auto bumped = rp::vertical_bump(sp, e);
    EXPECT_DOUBLE_EQ(bumped.current()[0], base->value_at(0.5)[0] + 0.125);
    EXPECT_DOUBLE_EQ(bumped.value_at(0.25)[0], base->value_at(0.25)[0]);
}
