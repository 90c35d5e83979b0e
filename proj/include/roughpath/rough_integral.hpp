#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "roughpath/controlled.hpp"
#include "roughpath/errors.hpp"
#include "roughpath/functional.hpp"
#include "roughpath/rough_path.hpp"

namespace roughpath {

namespace detail {

/// (Y_t X_{t,s})_l = sum_j Y[l*d + j] dx[j] for an L(R^d, R^k)-valued sample.
inline Vec contract_matrix_vector(std::span<const double> y, std::span<const double> dx,
                                  std::size_t k, std::size_t d) {
    Vec out(k, 0.0);
    for (std::size_t l = 0; l < k; ++l)
        for (std::size_t j = 0; j < d; ++j) out[l] += y[l * d + j] * dx[j];
    return out;
}

/// (Y'_t XX_{t,s})_l = sum_{i,j} Y'[(l*d + j)*d + i] XX(i, j).
inline Vec contract_tensor_matrix(std::span<const double> yp, const Matrix& xx, std::size_t k,
                                  std::size_t d) {
    Vec out(k, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < d; ++i) s += yp[(l * d + j) * d + i] * xx(i, j);
        out[l] = s;
    }
    return out;
}

}  // namespace detail

/// One-term compensated Riemann sum S(pi) = sum Y_t X_{t,s} + Y'_t XX_{t,s}
/// over the consecutive grid intervals of [t_{i0}, t_{i1}].  This is the
/// coarse germ the sewing estimates compare against; the integral value
/// itself is the refinement limit computed by rough_integrate.
inline Vec compensated_sum(const ControlledPath& cp, std::size_t i0, std::size_t i1) {
    const RoughPath& rp = *cp.reference;
    std::size_t d = rp.dimension();
    std::size_t k = cp.value_dim() / d;
    Vec acc(k, 0.0);
    for (std::size_t i = i0; i < i1; ++i) {
        Vec a = detail::contract_matrix_vector(cp.y.value(i), rp.base().increment(i, i + 1), k, d);
        Vec b = detail::contract_tensor_matrix(cp.y_prime.value(i), rp.blocks()[i], k, d);
        for (std::size_t l = 0; l < k; ++l) acc[l] += a[l] + b[l];
    }
    return acc;
}

/// The rough integral of a controlled integrand together with per-interval
/// diagnostics.  `value` holds the partial integrals Z(t_j) (Z = 0 at the
/// interval start); `as_controlled` is the pair (Z, Z') with Z' = Y, itself a
/// controlled path on the restriction of the reference; `local_defects[k]`
/// is |step_k - (Y_k X_k + Y'_k XX_k)|, the one-interval sewing defect.
struct IntegralResult {
    DiscretePath value;
    std::vector<double> local_defects;
    ControlledPath as_controlled;
};

/// Rough integral of (Y, Y') against the reference rough path over the
/// grid-aligned interval [t_{i0}, t_{i1}].
///
/// Per grid interval the value is the limit of compensated Riemann sums under
/// refinement of the interpolated model (base path refined linearly, stored
/// blocks split Chen-consistently), which has the closed form
///   (Y_k + Y_{k+1})/2 . X_k  +  (Y'_k + Y'_{k+1})/2 . B_k,
/// with B_k = XX_k - X_k (x) X_k / 2 the block's deviation from the pure
/// linear lift (the area for geometric lifts, the bracket correction
/// otherwise).  Summing the closed forms keeps the integral additive over
/// intervals and exact for the calculus of the interpolated model.
inline IntegralResult rough_integrate(const ControlledPath& cp,
                                      const std::shared_ptr<const RoughPath>& rp, std::size_t i0,
                                      std::size_t i1) {
    if (cp.reference != rp)
        throw ReferenceError("rough_integrate: integrand references a different rough path");
    if (1.0 / cp.p + 1.0 / cp.q <= 1.0)
        throw ExponentError("rough_integrate: need 1/p + 1/q > 1 (sewing condition)");
    std::size_t d = rp->dimension();
    if (cp.value_dim() % d != 0)
        throw DomainError("rough_integrate: integrand must be L(R^d, R^k)-valued");
    std::size_t k = cp.value_dim() / d;
    if (i1 >= rp->size()) throw DomainError("rough_integrate: interval outside grid");
    if (i0 > i1) throw DomainError("rough_integrate: reversed interval");

    std::vector<double> times(rp->base().times().begin() + i0,
                              rp->base().times().begin() + i1 + 1);
    std::vector<double> zvals((i1 - i0 + 1) * k, 0.0);
    std::vector<double> defects;
    defects.reserve(i1 - i0);
    Vec acc(k, 0.0);
    for (std::size_t i = i0; i < i1; ++i) {
        Vec dx = rp->base().increment(i, i + 1);
        Vec ymid = add(cp.y.value(i), cp.y.value(i + 1));
        Vec step = detail::contract_matrix_vector(scaled(ymid, 0.5), dx, k, d);
        Matrix excess = rp->excess(i);
        Vec ypmid = add(cp.y_prime.value(i), cp.y_prime.value(i + 1));
        Vec area = detail::contract_tensor_matrix(scaled(ypmid, 0.5), excess, k, d);
        for (std::size_t l = 0; l < k; ++l) step[l] += area[l];

        Vec germ = detail::contract_matrix_vector(cp.y.value(i), dx, k, d);
        Vec germ2 = detail::contract_tensor_matrix(cp.y_prime.value(i), rp->blocks()[i], k, d);
        double defect = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            double diff = step[l] - germ[l] - germ2[l];
            defect += diff * diff;
        }
        defects.push_back(std::sqrt(defect));

        for (std::size_t l = 0; l < k; ++l) acc[l] += step[l];
        std::copy(acc.begin(), acc.end(), zvals.begin() + (i + 1 - i0) * k);
    }

    DiscretePath z(std::move(times), std::move(zvals), k);
    auto restricted = std::make_shared<const RoughPath>(rp->restrict(i0, i1));
    ControlledPath zc(z, cp.y.restrict(i0, i1), restricted, cp.p, cp.q);
    return IntegralResult{std::move(z), std::move(defects), std::move(zc)};
}

inline IntegralResult rough_integrate(const ControlledPath& cp,
                                      const std::shared_ptr<const RoughPath>& rp, double t,
                                      double s) {
    return rough_integrate(cp, rp, rp->base().index_at(t), rp->base().index_at(s));
}

inline IntegralResult rough_integrate(const ControlledPath& cp,
                                      const std::shared_ptr<const RoughPath>& rp) {
    return rough_integrate(cp, rp, 0, rp->size() - 1);
}

// ---------------------------------------------------------------------------
// Sewing diagnostics
// ---------------------------------------------------------------------------

struct SewingRow {
    double t = 0.0, s = 0.0;
    double defect = 0.0;  // |Z_{t,s} - Y_t X_{t,s} - Y'_t XX_{t,s}|
    double rho = 0.0;     // rho_X([t,s])
};

struct SewingDiagnostics {
    std::vector<SewingRow> rows;
    double slope = 0.0;  // log defect vs log rho over dyadic window levels
    bool has_slope = false;
};

/// Compares the integral against its one-term germ over dyadic coarsenings
/// and fits the decay exponent in log rho_X.  The sewing condition
/// 1/p + 1/q > 1 predicts a slope strictly above one.
inline SewingDiagnostics sewing_diagnostics(const ControlledPath& cp,
                                            const std::shared_ptr<const RoughPath>& rp,
                                            std::size_t i0, std::size_t i1) {
    IntegralResult full = rough_integrate(cp, rp, i0, i1);
    const DiscretePath& x = rp->base();
    std::size_t d = rp->dimension();
    std::size_t k = cp.value_dim() / d;
    auto rho = rho_control(rp);

    SewingDiagnostics diag;
    std::vector<double> lx, ly;
    for (std::size_t span = 1; span <= i1 - i0; span *= 2) {
        double level_defect = 0.0, level_rho = 0.0;
        std::size_t count = 0;
        for (std::size_t i = i0; i + span <= i1; i += span) {
            std::size_t j = i + span;
            Vec z = full.value.increment(i - i0, j - i0);
            Vec germ = detail::contract_matrix_vector(cp.y.value(i), x.increment(i, j), k, d);
            Vec germ2 = detail::contract_tensor_matrix(cp.y_prime.value(i), rp->block(i, j), k, d);
            double defect = 0.0;
            for (std::size_t l = 0; l < k; ++l) {
                double diff = z[l] - germ[l] - germ2[l];
                defect += diff * diff;
            }
            defect = std::sqrt(defect);
            double r = rho(i, j);
            diag.rows.push_back({x.time(i), x.time(j), defect, r});
            level_defect += defect;
            level_rho += r;
            ++count;
        }
        // level averages enter the fit only when the level holds enough
        // windows: a max would carry an extreme-value bias, and one or two
        // samples of the heavy-tailed coarse defect say nothing about decay
        if (count >= 8 && level_defect / count > 1e-15 && level_rho > 0.0) {
            lx.push_back(std::log(level_rho / count));
            ly.push_back(std::log(level_defect / count));
        }
    }
    if (lx.size() >= 2) {
        diag.slope = least_squares_slope(lx, ly);
        diag.has_slope = true;
    }
    return diag;
}

// ---------------------------------------------------------------------------
// Functional integrands
// ---------------------------------------------------------------------------

/// Extra diagnostics for functional integrands: the two products that bound
/// the local sewing defect, ||X||_p ||RF||_{q_p} and ||gradF||_p ||XX||_{p/2}.
struct FunctionalIntegralInfo {
    double x_pvar = 0.0;            // ||X||_{p,[t,s]}
    double remainder_qvar = 0.0;    // ||RF(X)||_{q_p,[t,s]}
    double grad_pvar = 0.0;         // ||gradF(.,X)||_{p,[t,s]}
    double xx_halfp_var = 0.0;      // ||XX||_{p/2,[t,s]}
    double estimate_first = 0.0;    // product of the first pair
    double estimate_second = 0.0;   // product of the second pair
};

/// Rough integral of a functional integrand: the pair (F(., X), gradF(., X))
/// is a controlled path, and because F is evaluable anywhere on the
/// interpolated model the per-interval refinement limit is computed by
/// Simpson quadrature (endpoint and midpoint stopped paths), which integrates
/// the model exactly for integrands quadratic along segments.
/// Restricted to p in [2, 1 + sqrt(2)): beyond that window the remainder
/// exponent q_p fails the sewing condition and level-3 data would be needed.
inline IntegralResult integrate_functional(const PathFunctional& f,
                                           const std::shared_ptr<const RoughPath>& rp,
                                           std::size_t i0, std::size_t i1,
                                           FunctionalIntegralInfo* info = nullptr) {
    double p = rp->p_exponent();
    if (!(p >= 2.0 && p < p_upper_limit()))
        throw ExponentError(
            "integrate_functional: requires p in [2, 1+sqrt(2)) so that 1/p + 1/q_p > 1");
    if (!f.vertical)
        throw CapabilityError("integrate_functional: analytic vertical derivative required");
    std::size_t d = rp->dimension();
    if (f.path_dim != d) throw DomainError("integrate_functional: functional/path dimension mismatch");
    if (f.out_dim % d != 0)
        throw DomainError("integrate_functional: output must be L(R^d, R^k)-valued");
    std::size_t k = f.out_dim / d;

    const DiscretePath& x = rp->base();
    FunctionalSamples samples = sample_functional(f, x);
    auto base = std::make_shared<const DiscretePath>(x);

    std::vector<double> times(x.times().begin() + i0, x.times().begin() + i1 + 1);
    std::vector<double> zvals((i1 - i0 + 1) * k, 0.0);
    std::vector<double> defects;
    Vec acc(k, 0.0);
    for (std::size_t i = i0; i < i1; ++i) {
        double tm = 0.5 * (x.time(i) + x.time(i + 1));
        StoppedPath mid{tm, base};
        Vec fm = f.evaluate(mid);
        Vec gm = f.vertical(mid);
        Vec dx = x.increment(i, i + 1);
        auto f0 = samples.values.value(i);
        auto f1 = samples.values.value(i + 1);
        auto g0 = samples.gradients.value(i);
        auto g1 = samples.gradients.value(i + 1);
        Vec fs(f.out_dim), gs(f.out_dim * d);
        for (std::size_t a = 0; a < f.out_dim; ++a) fs[a] = (f0[a] + 4.0 * fm[a] + f1[a]) / 6.0;
        for (std::size_t a = 0; a < f.out_dim * d; ++a)
            gs[a] = (g0[a] + 4.0 * gm[a] + g1[a]) / 6.0;
        Vec step = detail::contract_matrix_vector(fs, dx, k, d);
        Vec area = detail::contract_tensor_matrix(gs, rp->excess(i), k, d);
        for (std::size_t l = 0; l < k; ++l) step[l] += area[l];

        Vec germ = detail::contract_matrix_vector(f0, dx, k, d);
        Vec germ2 = detail::contract_tensor_matrix(g0, rp->blocks()[i], k, d);
        double defect = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            double diff = step[l] - germ[l] - germ2[l];
            defect += diff * diff;
        }
        defects.push_back(std::sqrt(defect));
        for (std::size_t l = 0; l < k; ++l) acc[l] += step[l];
        std::copy(acc.begin(), acc.end(), zvals.begin() + (i + 1 - i0) * k);
    }

    if (info) {
        double qp = q_exponent(p);
        info->x_pvar = p_variation_exact(x, p, x.time(i0), x.time(i1));
        info->remainder_qvar = variation_norm_two_param(
            [&](std::size_t i, std::size_t j) {
                Vec r = samples.values.increment(i, j);
                Vec dx = x.increment(i, j);
                auto g = samples.gradients.value(i);
                for (std::size_t a = 0; a < f.out_dim; ++a)
                    for (std::size_t c = 0; c < d; ++c) r[a] -= g[a * d + c] * dx[c];
                return norm2(r);
            },
            qp, i0, i1);
        info->grad_pvar = p_variation_exact(samples.gradients, p, x.time(i0), x.time(i1));
        info->xx_halfp_var = variation_norm_two_param(
            [&](std::size_t i, std::size_t j) { return rp->block(i, j).frobenius(); }, p / 2.0,
            i0, i1);
        info->estimate_first = info->x_pvar * info->remainder_qvar;
        info->estimate_second = info->grad_pvar * info->xx_halfp_var;
    }

    DiscretePath z(std::move(times), std::move(zvals), k);
    auto restricted = std::make_shared<const RoughPath>(rp->restrict(i0, i1));
    ControlledPath zc(z, samples.values.restrict(i0, i1), restricted, p, q_exponent(p));
    return IntegralResult{std::move(z), std::move(defects), std::move(zc)};
}

inline IntegralResult integrate_functional(const PathFunctional& f,
                                           const std::shared_ptr<const RoughPath>& rp,
                                           double t, double s,
                                           FunctionalIntegralInfo* info = nullptr) {
    return integrate_functional(f, rp, rp->base().index_at(t), rp->base().index_at(s), info);
}

inline IntegralResult integrate_functional(const PathFunctional& f,
                                           const std::shared_ptr<const RoughPath>& rp,
                                           FunctionalIntegralInfo* info = nullptr) {
    return integrate_functional(f, rp, 0, rp->size() - 1, info);
}

/// Composition (F(., Y), gradF(., Y) Y'): controlled paths are invariant
/// under regular functionals, and the output remainder splits exactly as
/// R_{t,s} = RF_{t,s}(Y) + gradF(t, Y_t) R^Y_{t,s} on the grid.
inline ControlledPath compose_controlled(const PathFunctional& f, const ControlledPath& cp) {
    if (!f.vertical)
        throw CapabilityError("compose_controlled: analytic vertical derivative required");
    if (f.path_dim != cp.value_dim())
        throw DomainError("compose_controlled: functional expects a different path dimension");
    std::size_t d = cp.driver_dim();
    std::size_t m = cp.value_dim();
    FunctionalSamples samples = sample_functional(f, cp.y);
    std::vector<double> gv;
    gv.reserve(cp.size() * f.out_dim * d);
    for (std::size_t i = 0; i < cp.size(); ++i) {
        auto g = samples.gradients.value(i);   // out_dim x m
        auto yp = cp.y_prime.value(i);         // m x d
        for (std::size_t a = 0; a < f.out_dim; ++a)
            for (std::size_t e = 0; e < d; ++e) {
                double s = 0.0;
                for (std::size_t c = 0; c < m; ++c) s += g[a * m + c] * yp[c * d + e];
                gv.push_back(s);
            }
    }
    DiscretePath gpath(std::vector<double>(cp.y.times()), std::move(gv), f.out_dim * d);
    return ControlledPath(samples.values, std::move(gpath), cp.reference, cp.p,
                          q_exponent(cp.p));
}

}  // namespace roughpath
