#include <gtest/gtest.h>

#include <cmath>

#include "roughpath/oracle.hpp"
#include "roughpath/registry.hpp"

namespace rp = roughpath;

namespace {

rp::RdeProblem scalar_problem(const std::string& b, const std::string& sigma,
                              std::shared_ptr<const rp::RoughPath> driver, double xi,
                              double p = 2.1) {
    rp::DiscretePath hist({driver->base().start_time()}, {xi}, 1);
    return rp::RdeProblem(rp::make_functional(b, 1, 1), rp::make_functional(sigma, 1, 1),
                          std::move(driver), hist, p);
}

std::shared_ptr<const rp::RoughPath> line_driver(std::size_t n, double p = 2.1) {
    auto x = rp::sample_path([](double t) { return rp::Vec{t}; }, n, 1.0, 1);
    return std::make_shared<const rp::RoughPath>(rp::smooth_lift(x, p));
}

}  // namespace

TEST(RsIntegral, PolynomialExamples) {
    auto t = rp::sample_path([](double u) { return rp::Vec{u}; }, 1024, 1.0, 1);
    std::vector<double> lin(1025), sq(1025);
    for (std::size_t i = 0; i <= 1024; ++i) {
        lin[i] = t.value(i)[0];
        sq[i] = t.value(i)[0] * t.value(i)[0];
    }
    auto lin_path = rp::DiscretePath(std::vector<double>(t.times()), std::move(lin), 1);
    auto sq_path = rp::DiscretePath(std::vector<double>(t.times()), std::move(sq), 1);
    EXPECT_NEAR(rp::oracle::rs_integral_scalar(lin_path, t), 0.5, 1e-14);
    EXPECT_NEAR(rp::oracle::rs_integral_scalar(sq_path, t), 1.0 / 3.0, 1e-6);
}

TEST(RsIntegral, MidpointRuleIsExactForTheQuadratic) {
    auto lift = rp::brownian_lift(5, 512, 1.0, 1, 2.1);
    const auto& w = lift.base();
    std::vector<double> f(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) f[i] = w.value(i)[0];
    double got = rp::oracle::rs_integral_scalar(
        rp::DiscretePath(std::vector<double>(w.times()), std::move(f), 1), w);
    double x0 = w.value(0)[0], xT = w.value(w.size() - 1)[0];
    EXPECT_NEAR(got, 0.5 * (xT * xT - x0 * x0), 1e-12);
}

TEST(RsIntegral, RejectsMismatchedGrids) {
    auto a = rp::sample_path([](double u) { return rp::Vec{u}; }, 8, 1.0, 1);
    auto b = rp::sample_path([](double u) { return rp::Vec{u}; }, 16, 1.0, 1);
    EXPECT_THROW(rp::oracle::rs_integral(a, b), rp::DomainError);
}

TEST(EulerLevel2, AdditiveNoiseIsExact) {
    auto driver = std::make_shared<const rp::RoughPath>(rp::brownian_lift(2, 32, 1.0, 1, 2.1));
    auto pb = scalar_problem("zero", "const:1.5", driver, 0.25);
    auto y = rp::oracle::euler_level2(pb, 32 * 4);
    for (std::size_t i = 0; i <= 32; ++i) {
        double t = driver->base().time(i);
        double expected = 0.25 + 1.5 * (driver->base().value_at(t)[0] - driver->base().value(0)[0]);
        EXPECT_NEAR(y.value_at(t)[0], expected, 1e-13) << "i " << i;
    }
}

TEST(EulerLevel2, ExponentialConvergesAtFirstOrderOrBetter) {
    std::vector<double> errs;
    for (std::size_t f : {4u, 8u, 16u}) {
        auto pb = scalar_problem("zero", "endpoint", line_driver(64), 1.0);
        auto y = rp::oracle::euler_level2(pb, 64 * f);
        errs.push_back(std::abs(y.value(y.size() - 1)[0] - std::exp(1.0)));
    }
    EXPECT_GE(std::log2(errs[0] / errs[1]), 1.0);
    EXPECT_GE(std::log2(errs[1] / errs[2]), 1.0);
}

TEST(EulerLevel2, DroppingTheSecondLevelDegradesTheOrder) {
    auto pb = scalar_problem("zero", "endpoint", line_driver(64), 1.0);
    double with = std::abs(
        rp::oracle::euler_level2(pb, 64 * 8, true).value(64 * 8)[0] - std::exp(1.0));
    double without = std::abs(
        rp::oracle::euler_level2(pb, 64 * 8, false).value(64 * 8)[0] - std::exp(1.0));
    EXPECT_GT(without, 5.0 * with);
}

TEST(EulerLevel2, PathDependentSelfConvergence) {
    double p = 2.1;
    auto driver = std::make_shared<const rp::RoughPath>(rp::brownian_lift(6, 64, 1.0, 1, p));
    auto pb = scalar_problem("zero", "smax:eps=0.5:quintic", driver, 1.0, p);
    auto y1 = rp::oracle::euler_level2(pb, 64 * 4);
    auto y2 = rp::oracle::euler_level2(pb, 64 * 8);
    auto y4 = rp::oracle::euler_level2(pb, 64 * 16);
    auto supdiff = [&](const rp::DiscretePath& a, const rp::DiscretePath& b) {
        double worst = 0.0;
        for (std::size_t i = 0; i <= 64; ++i) {
            double t = driver->base().time(i);
            worst = std::max(worst, std::abs(a.value_at(t)[0] - b.value_at(t)[0]));
        }
        return worst;
    };
    double d1 = supdiff(y1, y2), d2 = supdiff(y2, y4);
    EXPECT_GE(std::log2(d1 / d2), 2.0 / p - 0.25);
}

TEST(EulerLevel2, GuardsOnInput) {
    auto pb = scalar_problem("zero", "endpoint", line_driver(64), 1.0);
    EXPECT_THROW(rp::oracle::euler_level2(pb, 100), rp::DomainError);  // not a multiple
}

TEST(FdDerivativeCheck, EndpointFunctionalIsExact) {
    auto base = std::make_shared<const rp::DiscretePath>(
        rp::brownian_lift(8, 64, 1.0, 1, 2.1).base());
    std::vector<rp::StoppedPath> probes{{0.25, base}, {0.5, base}, {0.75, base}};
    auto rep = rp::oracle::fd_derivative_check(rp::make_functional("endpoint", 1, 1), probes);
    EXPECT_LE(rep.max_vertical_discrepancy, 1e-10);
    EXPECT_LE(rep.max_horizontal_discrepancy, 1e-10);
    EXPECT_TRUE(rep.stable);
}

TEST(FdDerivativeCheck, QuadraticTerminalIntegrandIsExactUnderCentralDifferences) {
    auto f = rp::make_functional("intdep:y2", 1, 1);
    auto base = std::make_shared<const rp::DiscretePath>(
        rp::brownian_lift(9, 64, 1.0, 1, 2.1).base());
    std::vector<rp::StoppedPath> probes{{0.3, base}, {0.9, base}};
    auto rep = rp::oracle::fd_derivative_check(f, probes);
    EXPECT_LE(rep.max_vertical_discrepancy, 1e-9);
}

TEST(FdDerivativeCheck, CubicIntegrandShowsSecondOrderRichardson) {
    auto f = rp::integral_functional(
        1, 1,
        [](double, const rp::StoppedPath&, std::span<const double> y) {
            return rp::Vec{y[0] * y[0] * y[0]};
        },
        [](double, const rp::StoppedPath&, std::span<const double> y) {
            return rp::Vec{3.0 * y[0] * y[0]};
        });
    auto base = std::make_shared<const rp::DiscretePath>(
        rp::brownian_lift(10, 64, 1.0, 1, 2.1).base());
    std::vector<rp::StoppedPath> probes{{0.4, base}, {0.8, base}};
    auto rep = rp::oracle::fd_derivative_check(f, probes);
    ASSERT_TRUE(rep.has_slope);
    EXPECT_NEAR(rep.vertical_slope, 2.0, 0.3);
}

TEST(OracleIndependence, BruteForceAgreesWithDpOnRandomSections) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto w = rp::brownian_lift(seed, 10, 1.0, 1, 2.1).base();
        double dp = rp::p_variation_sum(w, 2.1, 0, 10);
        double bf = rp::oracle::pvar_sum_bruteforce(w, 2.1, 0, 10);
        EXPECT_EQ(dp, bf) << "seed " << seed;
    }
}
