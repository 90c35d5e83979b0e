#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "roughpath/errors.hpp"
#include "roughpath/functional.hpp"
#include "roughpath/path.hpp"
#include "roughpath/rde.hpp"
#include "roughpath/rough_path.hpp"

// Brute-force references used by tests and derived expected values.  Every
// routine here is implemented with its own loops, independent of the dynamic
// programs and integral machinery it is used to check.

namespace roughpath::oracle {

struct OracleConfig {
    std::size_t refinement_factor = 64;
    std::size_t enumeration_cap = 12;  // max grid points for exhaustive enumeration
    double fd_step = 1e-5;

    OracleConfig() = default;
    OracleConfig(std::size_t refine, std::size_t cap, double h)
        : refinement_factor(refine), enumeration_cap(cap), fd_step(h) {
        if (refinement_factor < 2) throw DomainError("OracleConfig: refinement_factor >= 2");
        if (enumeration_cap > 16) throw DomainError("OracleConfig: enumeration_cap <= 16");
    }
};

/// sup over all sub-partitions of sum |increment|^p, by exhaustive
/// enumeration of the 2^(n-2) subsets of interior points (pre-root value).
inline double pvar_sum_bruteforce(const DiscretePath& path, double p, std::size_t i0,
                                  std::size_t i1, std::size_t cap = 12) {
    if (i1 <= i0) return 0.0;
    std::size_t interior = i1 - i0 - 1;
    if (interior + 2 > cap) throw GuardError("pvar_bruteforce: enumeration cap exceeded");
    double best = 0.0;
    std::uint64_t masks = 1ull << interior;
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
        double sum = 0.0;
        std::size_t prev = i0;
        for (std::size_t b = 0; b < interior; ++b) {
            if (!(mask >> b & 1ull)) continue;
            std::size_t idx = i0 + 1 + b;
            double inc = 0.0;
            for (std::size_t c = 0; c < path.dimension(); ++c) {
                double t = path.value(idx)[c] - path.value(prev)[c];
                inc += t * t;
            }
            sum += std::pow(std::sqrt(inc), p);
            prev = idx;
        }
        double inc = 0.0;
        for (std::size_t c = 0; c < path.dimension(); ++c) {
            double t = path.value(i1)[c] - path.value(prev)[c];
            inc += t * t;
        }
        sum += std::pow(std::sqrt(inc), p);
        best = std::max(best, sum);
    }
    return best;
}

/// ||X||_{p,[t,s]} by the same enumeration (with the root).
inline double pvar_bruteforce(const DiscretePath& path, double p, std::size_t i0, std::size_t i1,
                              std::size_t cap = 12) {
    double s = pvar_sum_bruteforce(path, p, i0, i1, cap);
    return s <= 0.0 ? 0.0 : std::pow(s, 1.0 / p);
}

inline double pvar_bruteforce(const DiscretePath& path, double p, const OracleConfig& cfg = {}) {
    return pvar_bruteforce(path, p, 0, path.size() - 1, cfg.enumeration_cap);
}

/// Riemann-Stieltjes sum with the integrand sampled at segment midpoints
/// (the midpoint of a piecewise-linear integrand is the endpoint average), so
/// smooth-case comparisons converge to the Stratonovich / geometric value.
/// f is L(R^d, R^k)-valued on the same grid as the integrator.
inline Vec rs_integral(const DiscretePath& f_of_path, const DiscretePath& path) {
    if (f_of_path.times() != path.times())
        throw DomainError("rs_integral: integrand and integrator must share the grid");
    std::size_t d = path.dimension();
    if (f_of_path.dimension() % d != 0)
        throw DomainError("rs_integral: integrand must be L(R^d, R^k)-valued");
    std::size_t k = f_of_path.dimension() / d;
    Vec acc(k, 0.0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        auto f0 = f_of_path.value(i);
        auto f1 = f_of_path.value(i + 1);
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < d; ++j)
                acc[l] += 0.5 * (f0[l * d + j] + f1[l * d + j]) *
                          (path.value(i + 1)[j] - path.value(i)[j]);
    }
    return acc;
}

inline double rs_integral_scalar(const DiscretePath& f, const DiscretePath& path) {
    return rs_integral(f, path)[0];
}

/// One-step scheme with the second-level correction,
///   Y_{j+1} = Y_j + b dt + sigma dX + (grad sigma . sigma) XX,
/// run on a Chen-refinement of the driver grid.  `n_fine` counts fine
/// intervals and must be a multiple of the driver's interval count.
/// `with_second_level = false` drops the XX term (plain Euler), exposed to
/// demonstrate the loss of order.
inline DiscretePath euler_level2(const RdeProblem& pb, std::size_t n_fine,
                                 bool with_second_level = true) {
    std::size_t coarse = pb.driver->base().segments();
    if (n_fine % coarse != 0)
        throw DomainError("euler_level2: n_fine must be a multiple of the driver grid");
    RoughPath fine = chen_refine(*pb.driver, n_fine / coarse);
    const DiscretePath& x = fine.base();
    std::size_t n = x.size();
    std::size_t k = pb.state_dim();
    std::size_t d = fine.dimension();

    std::vector<double> y(n * k, 0.0);
    // history: the initial segment interpolated onto the fine grid
    double t0 = pb.initial.horizon();
    std::size_t j0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x.time(i) <= t0 + kGridTimeTol) {
            Vec v = pb.initial.value_at(x.time(i));
            std::copy(v.begin(), v.end(), y.begin() + i * k);
            j0 = i;
        } else {
            break;
        }
    }
    for (std::size_t i = j0 + 1; i < n; ++i)
        std::copy(y.begin() + j0 * k, y.begin() + (j0 + 1) * k, y.begin() + i * k);

    for (std::size_t j = j0; j + 1 < n; ++j) {
        auto snapshot = std::make_shared<const DiscretePath>(
            DiscretePath(std::vector<double>(x.times()), std::vector<double>(y), k));
        StoppedPath sp{x.time(j), snapshot};
        Vec bv = pb.drift.evaluate(sp);
        Vec sv = pb.sigma.evaluate(sp);          // k x d
        double dt = x.time(j + 1) - x.time(j);
        Vec dx = x.increment(j, j + 1);
        Vec next(k);
        for (std::size_t c = 0; c < k; ++c) {
            double v = y[j * k + c] + bv[c] * dt;
            for (std::size_t e = 0; e < d; ++e) v += sv[c * d + e] * dx[e];
            next[c] = v;
        }
        if (with_second_level) {
            Vec gv = pb.sigma.vertical(sp);      // (k*d) x k
            const Matrix& xx = fine.blocks()[j];
            for (std::size_t l = 0; l < k; ++l) {
                double corr = 0.0;
                for (std::size_t j2 = 0; j2 < d; ++j2)
                    for (std::size_t i2 = 0; i2 < d; ++i2) {
                        double tensor = 0.0;  // (grad sigma . sigma)^{(l j2)}_{i2}
                        for (std::size_t c = 0; c < k; ++c)
                            tensor += gv[(l * d + j2) * k + c] * sv[c * d + i2];
                        corr += tensor * xx(i2, j2);
                    }
                next[l] += corr;
            }
        }
        std::copy(next.begin(), next.end(), y.begin() + (j + 1) * k);
        // freeze the not-yet-computed tail at the latest value
        for (std::size_t i = j + 2; i < n; ++i)
            std::copy(next.begin(), next.end(), y.begin() + i * k);
    }
    return DiscretePath(std::vector<double>(x.times()), std::move(y), k);
}

/// Analytic-vs-finite-difference comparison across probes and two bump sizes
/// with the Richardson order estimate.
struct FdCheckReport {
    double max_vertical_discrepancy = 0.0;    // at fd_step
    double max_horizontal_discrepancy = 0.0;  // at fd_step (forward difference)
    double vertical_slope = 0.0;              // log2(d(h) / d(h/2)), ~2 for smooth branches
    bool has_slope = false;
    bool stable = true;                       // one-sided differences agree at all probes
};

inline FdCheckReport fd_derivative_check(const PathFunctional& f,
                                         const std::vector<StoppedPath>& probes,
                                         const OracleConfig& cfg = {}) {
    if (!f.vertical) throw CapabilityError("fd_derivative_check: analytic vertical required");
    FdCheckReport rep;
    double dh = 0.0, dh2 = 0.0;
    for (const auto& sp : probes) {
        Vec analytic = f.vertical(sp);
        for (int halvings = 0; halvings < 2; ++halvings) {
            double h = cfg.fd_step / (halvings ? 2.0 : 1.0);
            double worst = 0.0;
            for (std::size_t i = 0; i < f.path_dim; ++i) {
                Vec e(f.path_dim, 0.0);
                e[i] = h;
                Vec up = f.evaluate(vertical_bump(sp, e));
                e[i] = -h;
                Vec dn = f.evaluate(vertical_bump(sp, e));
                for (std::size_t a = 0; a < f.out_dim; ++a) {
                    double fd = (up[a] - dn[a]) / (2.0 * h);
                    worst = std::max(worst, std::abs(fd - analytic[a * f.path_dim + i]));
                }
            }
            (halvings ? dh2 : dh) = std::max(halvings ? dh2 : dh, worst);
        }
        PathFunctional fd_only = f;
        fd_only.vertical = nullptr;
        if (!vertical_derivative(fd_only, sp, cfg.fd_step).stable) rep.stable = false;

        if (f.horizontal) {
            double T = sp.horizon();
            if (sp.time < T - 10 * cfg.fd_step) {
                Vec ana = f.horizontal(sp);
                PathFunctional fwd = f;
                fwd.horizontal = nullptr;
                Vec fd = horizontal_derivative(fwd, sp, cfg.fd_step);
                for (std::size_t a = 0; a < f.out_dim; ++a)
                    rep.max_horizontal_discrepancy =
                        std::max(rep.max_horizontal_discrepancy, std::abs(fd[a] - ana[a]));
            }
        }
    }
    rep.max_vertical_discrepancy = dh;
    if (dh > 1e-12 && dh2 > 1e-14) {
        rep.vertical_slope = std::log2(dh / dh2);
        rep.has_slope = true;
    }
    return rep;
}

}  // namespace roughpath::oracle
