#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "roughpath/errors.hpp"
#include "roughpath/path.hpp"
#include "roughpath/variation.hpp"

namespace roughpath {

// ---------------------------------------------------------------------------
// Stopped paths
// ---------------------------------------------------------------------------

/// A path frozen at a given time: value_at(u) reads the underlying samples at
/// u ^ time, which makes the pair a representative of the equivalence class
/// (t, x(t ^ .)).  The underlying path is shared and never mutated.
struct StoppedPath {
    double time = 0.0;
    std::shared_ptr<const DiscretePath> path;

    Vec value_at(double u) const { return path->value_at(std::min(u, time)); }
    Vec current() const { return path->value_at(time); }
    double horizon() const { return path->horizon(); }
    std::size_t dimension() const { return path->dimension(); }
};

inline StoppedPath stop(std::shared_ptr<const DiscretePath> path, double t) {
    if (!path) throw DomainError("stop: null path");
    return StoppedPath{t, std::move(path)};
}

inline StoppedPath stop(const DiscretePath& path, double t) {
    return StoppedPath{t, std::make_shared<const DiscretePath>(path)};
}

/// Materialises the frozen representative on the underlying grid (with a knot
/// inserted at the stop time when it is off-grid): values after the stop time
/// are replaced by the value at the stop time.
inline DiscretePath materialize(const StoppedPath& sp) {
    DiscretePath base = sp.path->with_knot(std::min(sp.time, sp.path->horizon()));
    std::vector<double> v(base.raw_values());
    Vec frozen = base.value_at(sp.time);
    std::size_t d = base.dimension();
    for (std::size_t i = 0; i < base.size(); ++i)
        if (base.time(i) > sp.time)
            std::copy(frozen.begin(), frozen.end(), v.begin() + i * d);
    return DiscretePath(std::vector<double>(base.times()), std::move(v), d);
}

/// The vertical perturbation x_t + e 1_{[t,T]}: freeze, then shift every
/// sample from the stop time onwards by e.
inline StoppedPath vertical_bump(const StoppedPath& sp, std::span<const double> e) {
    DiscretePath frozen = materialize(sp);
    std::vector<double> v(frozen.raw_values());
    std::size_t d = frozen.dimension();
    double tol = kGridTimeTol * std::max(1.0, std::abs(frozen.horizon()));
    for (std::size_t i = 0; i < frozen.size(); ++i)
        if (frozen.time(i) >= sp.time - tol)
            for (std::size_t c = 0; c < d; ++c) v[i * d + c] += e[c];
    auto bumped = std::make_shared<const DiscretePath>(
        DiscretePath(std::vector<double>(frozen.times()), std::move(v), d));
    return StoppedPath{sp.time, bumped};
}

/// d_inf((t,x), (t',x')) = sup_u |x(u ^ t) - x'(u ^ t')| + |t - t'|.
/// Both frozen paths are piecewise linear, so the supremum is attained on the
/// union of their knots and stop times.
inline double d_infty(const StoppedPath& a, const StoppedPath& b) {
    std::vector<double> knots(a.path->times());
    knots.insert(knots.end(), b.path->times().begin(), b.path->times().end());
    knots.push_back(a.time);
    knots.push_back(b.time);
    std::sort(knots.begin(), knots.end());
    double sup = 0.0;
    for (double u : knots) sup = std::max(sup, norm2(sub(a.value_at(u), b.value_at(u))));
    return sup + std::abs(a.time - b.time);
}

// ---------------------------------------------------------------------------
// Non-anticipative functionals
// ---------------------------------------------------------------------------

/// Declared regularity constants; NaN means "not declared".  Reports compare
/// empirical estimates against these.
struct LipschitzMeta {
    double value_lip = std::numeric_limits<double>::quiet_NaN();
    double sup_bound = std::numeric_limits<double>::quiet_NaN();
    double horizontal_lip = std::numeric_limits<double>::quiet_NaN();
    double vertical_lip = std::numeric_limits<double>::quiet_NaN();
    double vertical2_lip = std::numeric_limits<double>::quiet_NaN();
};

/// A non-anticipative functional F(t, x) with optional analytic derivatives.
/// evaluate returns out_dim values; vertical returns out_dim x path_dim
/// entries [a * path_dim + i] = dF_a / dx_i; vertical2 returns
/// out_dim x path_dim x path_dim.  All callables must be pure and re-entrant:
/// the harness evaluates one functional from many threads.
struct PathFunctional {
    std::string id = "functional";
    std::size_t out_dim = 1;
    std::size_t path_dim = 1;
    std::function<Vec(const StoppedPath&)> evaluate;
    std::function<Vec(const StoppedPath&)> vertical;
    std::function<Vec(const StoppedPath&)> vertical2;
    std::function<Vec(const StoppedPath&)> horizontal;
    LipschitzMeta meta;

    bool has_vertical() const { return static_cast<bool>(vertical); }
    bool has_vertical2() const { return static_cast<bool>(vertical2); }
    bool has_horizontal() const { return static_cast<bool>(horizontal); }
};

/// Default finite-difference bump: 1e-5 * (1 + ||x||_inf).
inline double default_fd_bump(const StoppedPath& sp) {
    return 1e-5 * (1.0 + sp.path->sup_norm());
}

struct VerticalDerivative {
    Vec value;          // out_dim x path_dim
    bool analytic = false;
    bool stable = true; // forward and backward differences agree
};

/// Vertical (Dupire) derivative: analytic when available, otherwise central
/// finite differences of bumped stopped paths.  One-sided differences are
/// compared to flag kinks.
inline VerticalDerivative vertical_derivative(const PathFunctional& f, const StoppedPath& sp,
                                              double h = 0.0,
                                              double instability_tol = 1e-3) {
    if (f.vertical) return {f.vertical(sp), true, true};
    if (h <= 0.0) h = default_fd_bump(sp);
    Vec base = f.evaluate(sp);
    VerticalDerivative out;
    out.value.assign(f.out_dim * f.path_dim, 0.0);
    for (std::size_t i = 0; i < f.path_dim; ++i) {
        Vec e(f.path_dim, 0.0);
        e[i] = h;
        Vec up = f.evaluate(vertical_bump(sp, e));
        e[i] = -h;
        Vec dn = f.evaluate(vertical_bump(sp, e));
        for (std::size_t a = 0; a < f.out_dim; ++a) {
            out.value[a * f.path_dim + i] = (up[a] - dn[a]) / (2.0 * h);
            double fwd = (up[a] - base[a]) / h;
            double bwd = (base[a] - dn[a]) / h;
            if (std::abs(fwd - bwd) > instability_tol * (1.0 + std::abs(fwd) + std::abs(bwd)))
                out.stable = false;
        }
    }
    return out;
}

/// Horizontal derivative: advance time with the path frozen at t.  The limit
/// is one-sided by definition, so the fallback is a forward difference.
inline Vec horizontal_derivative(const PathFunctional& f, const StoppedPath& sp, double h = 1e-5) {
    double T = sp.horizon();
    double tol = kGridTimeTol * std::max(1.0, std::abs(T));
    if (sp.time >= T - tol) throw HorizonError("horizontal_derivative: stop time at horizon");
    if (f.horizontal) return f.horizontal(sp);
    if (sp.time + h > T) h = T - sp.time;
    auto frozen = std::make_shared<const DiscretePath>(materialize(sp));
    Vec ahead = f.evaluate(StoppedPath{sp.time + h, frozen});
    Vec here = f.evaluate(StoppedPath{sp.time, frozen});
    Vec out(f.out_dim);
    for (std::size_t a = 0; a < f.out_dim; ++a) out[a] = (ahead[a] - here[a]) / h;
    return out;
}

// ---------------------------------------------------------------------------
// Shipped functional families
// ---------------------------------------------------------------------------

/// Raw running maximum m(t, z) of a scalar path.  Horizontally differentiable
/// with derivative zero; vertical differentiability fails at the argmax, which
/// is why no analytic vertical is attached.
inline PathFunctional running_max() {
    PathFunctional f;
    f.id = "runmax";
    f.out_dim = 1;
    f.path_dim = 1;
    f.evaluate = [](const StoppedPath& sp) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sp.path->size(); ++i) {
            if (sp.path->time(i) > sp.time) break;
            m = std::max(m, sp.path->value(i)[0]);
        }
        m = std::max(m, sp.current()[0]);
        return Vec{m};
    };
    f.horizontal = [](const StoppedPath&) { return Vec{0.0}; };
    f.meta.value_lip = 1.0;
    f.meta.horizontal_lip = 0.0;
    return f;
}

enum class SmoothingKind { Quadratic, Quintic };

/// Coefficients (a3, a4, a5) of the blending polynomial h(u) = a3 u^3 +
/// a4 u^4 + a5 u^5 satisfying h(2e)=e, h'(2e)=1, h''(2e)=0 (the conditions at
/// 0 are met because there is no constant, linear or quadratic term).
/// Solved numerically as a 3x3 linear system.
inline std::array<double, 3> quintic_blend_coefficients(double eps) {
    double w = 2.0 * eps;
    double m[3][4] = {
        {w * w * w, w * w * w * w, w * w * w * w * w, eps},
        {3 * w * w, 4 * w * w * w, 5 * w * w * w * w, 1.0},
        {6 * w, 12 * w * w, 20 * w * w * w, 0.0},
    };
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        std::swap(m[col], m[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            double factor = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= factor * m[col][c];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

/// Smoothed running maximum M_{eps,h}: equal to the running max shifted down
/// by eps while the path sits well below its maximum, blended by h on the
/// band of width 2*eps, and equal to the current value at the maximum.
/// The quadratic blend h(u) = u^2 / (4 eps) gives two vertical derivatives;
/// the quintic blend additionally has a Lipschitz second derivative, which is
/// what solver coefficients need.
inline PathFunctional smoothed_running_max(double eps, SmoothingKind kind = SmoothingKind::Quintic) {
    if (eps <= 0.0) throw DomainError("smoothed_running_max requires eps > 0");
    std::function<double(double)> hf, hd1, hd2;
    if (kind == SmoothingKind::Quadratic) {
        hf = [eps](double u) { return u * u / (4.0 * eps); };
        hd1 = [eps](double u) { return u / (2.0 * eps); };
        hd2 = [eps](double) { return 1.0 / (2.0 * eps); };
    } else {
        auto [a3, a4, a5] = quintic_blend_coefficients(eps);
        hf = [=](double u) { return ((a5 * u + a4) * u + a3) * u * u * u; };
        hd1 = [=](double u) { return ((5 * a5 * u + 4 * a4) * u + 3 * a3) * u * u; };
        hd2 = [=](double u) { return ((20 * a5 * u + 12 * a4) * u + 6 * a3) * u; };
    }

    auto state = [](const StoppedPath& sp) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sp.path->size(); ++i) {
            if (sp.path->time(i) > sp.time) break;
            m = std::max(m, sp.path->value(i)[0]);
        }
        double z = sp.current()[0];
        m = std::max(m, z);
        return std::pair<double, double>{m, z};
    };

    PathFunctional f;
    f.id = (kind == SmoothingKind::Quadratic ? "smax:quadratic:eps=" : "smax:quintic:eps=") +
           std::to_string(eps);
    f.out_dim = 1;
    f.path_dim = 1;
    f.evaluate = [state, hf, eps](const StoppedPath& sp) {
        auto [m, z] = state(sp);
        if (z <= m - 2.0 * eps) return Vec{m - eps};
        if (z <= m) return Vec{m - eps + hf(z - (m - 2.0 * eps))};
        return Vec{z};
    };
    f.vertical = [state, hd1, eps](const StoppedPath& sp) {
        auto [m, z] = state(sp);
        if (z <= m - 2.0 * eps) return Vec{0.0};
        if (z < m) return Vec{hd1(z - (m - 2.0 * eps))};
        return Vec{1.0};
    };
    f.vertical2 = [state, hd2, eps](const StoppedPath& sp) {
        auto [m, z] = state(sp);
        if (z <= m - 2.0 * eps) return Vec{0.0};
        if (z < m) return Vec{hd2(z - (m - 2.0 * eps))};
        return Vec{0.0};
    };
    f.horizontal = [](const StoppedPath&) { return Vec{0.0}; };
    f.meta.value_lip = 1.0;
    f.meta.horizontal_lip = 0.0;
    if (kind == SmoothingKind::Quadratic) {
        f.meta.vertical_lip = 1.0 / eps;  // 2 * sup|h''|
    } else {
        f.meta.vertical_lip = 1.5 / eps;
        f.meta.vertical2_lip = 3.0 / (eps * eps);
    }
    return f;
}

/// Discrete time dependence: F(t, x) = phi(t, x(t ^ t_1), ..., x(t ^ t_m)).
/// grad_phi(t, pinned, i) is the out_dim x path_dim derivative in pin i;
/// hess_phi(t, pinned, i, j) the out_dim x path_dim x path_dim block.
/// Vertical derivatives sum the pins at or after the current time.
inline PathFunctional discrete_time_functional(
    std::vector<double> time_points, std::size_t out_dim, std::size_t path_dim,
    std::function<Vec(double, const std::vector<Vec>&)> phi,
    std::function<Vec(double, const std::vector<Vec>&, std::size_t)> grad_phi = {},
    std::function<Vec(double, const std::vector<Vec>&, std::size_t, std::size_t)> hess_phi = {},
    std::function<Vec(double, const std::vector<Vec>&)> dphi_dt = {}) {
    if (time_points.empty()) throw DomainError("discrete_time_functional: no time points");
    if (!std::is_sorted(time_points.begin(), time_points.end()))
        throw DomainError("discrete_time_functional: time points must be increasing");
    auto pins = std::make_shared<const std::vector<double>>(std::move(time_points));
    auto pinned_values = [pins](const StoppedPath& sp) {
        std::vector<Vec> vals;
        vals.reserve(pins->size());
        for (double ti : *pins) vals.push_back(sp.value_at(ti));
        return vals;
    };

    PathFunctional f;
    f.id = "discrete";
    f.out_dim = out_dim;
    f.path_dim = path_dim;
    f.evaluate = [pinned_values, phi](const StoppedPath& sp) {
        return phi(sp.time, pinned_values(sp));
    };
    if (grad_phi) {
        f.vertical = [pins, pinned_values, grad_phi, out_dim, path_dim](const StoppedPath& sp) {
            Vec out(out_dim * path_dim, 0.0);
            auto vals = pinned_values(sp);
            for (std::size_t i = 0; i < pins->size(); ++i) {
                if ((*pins)[i] < sp.time) continue;
                Vec g = grad_phi(sp.time, vals, i);
                for (std::size_t a = 0; a < out.size(); ++a) out[a] += g[a];
            }
            return out;
        };
    }
    if (hess_phi) {
        f.vertical2 = [pins, pinned_values, hess_phi, out_dim, path_dim](const StoppedPath& sp) {
            Vec out(out_dim * path_dim * path_dim, 0.0);
            auto vals = pinned_values(sp);
            for (std::size_t i = 0; i < pins->size(); ++i) {
                if ((*pins)[i] < sp.time) continue;
                for (std::size_t j = 0; j < pins->size(); ++j) {
                    if ((*pins)[j] < sp.time) continue;
                    Vec h = hess_phi(sp.time, vals, i, j);
                    for (std::size_t a = 0; a < out.size(); ++a) out[a] += h[a];
                }
            }
            return out;
        };
    }
    if (dphi_dt) {
        f.horizontal = [pinned_values, dphi_dt](const StoppedPath& sp) {
            return dphi_dt(sp.time, pinned_values(sp));
        };
    }
    return f;
}

/// Integral dependence: F(t, x) = int_0^t psi(s, x_s, x(t)) ds with
/// trapezoidal quadrature on the grid (plus the partial cell when t is
/// off-grid).  The analytic vertical derivative integrates the derivative of
/// psi in its terminal argument only; the horizontal derivative is
/// psi(t, x_t, x(t)).
inline PathFunctional integral_functional(
    std::size_t out_dim, std::size_t path_dim,
    std::function<Vec(double, const StoppedPath&, std::span<const double>)> psi,
    std::function<Vec(double, const StoppedPath&, std::span<const double>)> grad_y = {},
    std::function<Vec(double, const StoppedPath&, std::span<const double>)> hess_y = {}) {
    auto quadrature = [](const StoppedPath& sp, std::size_t n_out, const auto& integrand) {
        Vec acc(n_out, 0.0);
        double t = sp.time;
        Vec terminal = sp.current();
        std::vector<double> nodes;
        for (double u : sp.path->times()) {
            if (u >= t) break;
            nodes.push_back(u);
        }
        nodes.push_back(t);
        if (nodes.size() < 2) return acc;
        Vec prev = integrand(nodes[0], StoppedPath{nodes[0], sp.path}, terminal);
        for (std::size_t k = 1; k < nodes.size(); ++k) {
            Vec cur = integrand(nodes[k], StoppedPath{nodes[k], sp.path}, terminal);
            double w = 0.5 * (nodes[k] - nodes[k - 1]);
            for (std::size_t a = 0; a < n_out; ++a) acc[a] += w * (prev[a] + cur[a]);
            prev = std::move(cur);
        }
        return acc;
    };

    PathFunctional f;
    f.id = "integral";
    f.out_dim = out_dim;
    f.path_dim = path_dim;
    f.evaluate = [quadrature, psi, out_dim](const StoppedPath& sp) {
        return quadrature(sp, out_dim, psi);
    };
    if (grad_y) {
        f.vertical = [quadrature, grad_y, out_dim, path_dim](const StoppedPath& sp) {
            return quadrature(sp, out_dim * path_dim, grad_y);
        };
    }
    if (hess_y) {
        f.vertical2 = [quadrature, hess_y, out_dim, path_dim](const StoppedPath& sp) {
            return quadrature(sp, out_dim * path_dim * path_dim, hess_y);
        };
    }
    f.horizontal = [psi](const StoppedPath& sp) {
        return psi(sp.time, sp, sp.current());
    };
    return f;
}

// ---------------------------------------------------------------------------
// Functional remainder and sampling helpers
// ---------------------------------------------------------------------------

/// First-order functional expansion error along a path:
/// RF_{t,s}(X) = F(s, X_s) - F(t, X_t) - gradF(t, X_t) (X(s) - X(t)).
inline Vec functional_remainder(const PathFunctional& f, const DiscretePath& path, std::size_t i,
                                std::size_t j) {
    if (!f.vertical)
        throw CapabilityError("functional_remainder: analytic vertical derivative required");
    auto base = std::make_shared<const DiscretePath>(path);
    Vec fs = f.evaluate(StoppedPath{path.time(j), base});
    Vec ft = f.evaluate(StoppedPath{path.time(i), base});
    Vec g = f.vertical(StoppedPath{path.time(i), base});
    Vec dx = path.increment(i, j);
    Vec out(f.out_dim);
    for (std::size_t a = 0; a < f.out_dim; ++a) {
        double corr = 0.0;
        for (std::size_t c = 0; c < f.path_dim; ++c) corr += g[a * f.path_dim + c] * dx[c];
        out[a] = fs[a] - ft[a] - corr;
    }
    return out;
}

inline Vec functional_remainder(const PathFunctional& f, const DiscretePath& path, double t,
                                double s) {
    return functional_remainder(f, path, path.index_at(t), path.index_at(s));
}

/// Grid samples of F(., X) and gradF(., X) along a path; the lifted
/// controlled-path data used by rough integration and composition.
struct FunctionalSamples {
    DiscretePath values;     // out_dim
    DiscretePath gradients;  // out_dim x path_dim
};

inline FunctionalSamples sample_functional(const PathFunctional& f, const DiscretePath& path) {
    if (!f.vertical) throw CapabilityError("sample_functional: vertical derivative required");
    if (f.path_dim != path.dimension())
        throw DomainError("sample_functional: path dimension mismatch");
    auto base = std::make_shared<const DiscretePath>(path);
    std::vector<double> vals, grads;
    vals.reserve(path.size() * f.out_dim);
    grads.reserve(path.size() * f.out_dim * f.path_dim);
    for (std::size_t i = 0; i < path.size(); ++i) {
        StoppedPath sp{path.time(i), base};
        Vec v = f.evaluate(sp);
        Vec g = f.vertical(sp);
        vals.insert(vals.end(), v.begin(), v.end());
        grads.insert(grads.end(), g.begin(), g.end());
    }
    return {DiscretePath(std::vector<double>(path.times()), std::move(vals), f.out_dim),
            DiscretePath(std::vector<double>(path.times()), std::move(grads),
                         f.out_dim * f.path_dim)};
}

// ---------------------------------------------------------------------------
// Regularity report
// ---------------------------------------------------------------------------

/// Empirical regularity estimates over a probe ensemble.  Estimates are max
/// ratios over probe pairs; they are diagnostics, not global constants.
struct RegularityReport {
    std::string functional_id;
    std::size_t probe_count = 0;
    double f_lipschitz = 0.0;
    double horizontal_lipschitz = 0.0;
    double vertical_lipschitz = 0.0;
    double vertical2_lipschitz = 0.0;
    double remainder_slope = 0.0;  // empirical q-variation scaling of RF
    bool vertical_stable = true;
    bool lipschitz_ok = true;
    bool vertical_ok = true;
    bool has_remainder_slope = false;
};

inline RegularityReport regularity_report(const PathFunctional& f,
                                          const std::vector<DiscretePath>& probes,
                                          double p = 2.1) {
    if (probes.empty()) throw DomainError("regularity_report: empty probe set");
    RegularityReport rep;
    rep.functional_id = f.id;
    rep.probe_count = probes.size();

    std::vector<StoppedPath> points;
    std::vector<std::shared_ptr<const DiscretePath>> shared;
    shared.reserve(probes.size());
    for (const auto& pr : probes) {
        auto sp = std::make_shared<const DiscretePath>(pr);
        shared.push_back(sp);
        std::size_t n = pr.size();
        for (std::size_t frac = 1; frac <= 4; ++frac)
            points.push_back(StoppedPath{pr.time((n - 1) * frac / 4), sp});
    }

    auto ratio_max = [&](const std::function<Vec(const StoppedPath&)>& g) {
        double worst = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j) {
                double dist = d_infty(points[i], points[j]);
                if (dist < 1e-12) continue;
                double diff = norm2(sub(g(points[i]), g(points[j])));
                worst = std::max(worst, diff / dist);
            }
        return worst;
    };

    rep.f_lipschitz = ratio_max(f.evaluate);
    if (f.horizontal) {
        double worst = 0.0;
        for (const auto& pt : points)
            worst = std::max(worst, max_abs(f.horizontal(pt)));
        rep.horizontal_lipschitz = worst;  // |DF| bound doubles as t-Lipschitz estimate
    }
    if (f.vertical) rep.vertical_lipschitz = ratio_max(f.vertical);
    if (f.vertical2) rep.vertical2_lipschitz = ratio_max(f.vertical2);

    // FD stability of the vertical derivative at every probe point
    for (const auto& pt : points) {
        PathFunctional fd_only = f;
        fd_only.vertical = nullptr;
        VerticalDerivative vd = vertical_derivative(fd_only, pt);
        if (!vd.stable) rep.vertical_stable = false;
    }

    // remainder scaling: log |RF_{t,s}| against log(|s-t| + V_p) over dyadic
    // window levels; level averages avoid the extreme-value bias a max over
    // many fine windows would introduce
    if (f.vertical) {
        std::vector<double> lx, ly;
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            const DiscretePath& path = probes[pi];
            std::size_t n1 = path.size() - 1;
            for (std::size_t span = std::max<std::size_t>(1, n1 / 64); span <= n1; span *= 2) {
                double sum_r = 0.0, sum_w = 0.0;
                std::size_t count = 0;
                for (std::size_t i = 0; i + span <= n1; i += span) {
                    sum_r += norm2(functional_remainder(f, path, i, i + span));
                    sum_w += (path.time(i + span) - path.time(i)) +
                             p_variation_sum(path, p, i, i + span);
                    ++count;
                }
                if (count > 0 && sum_r / count > 1e-14 && sum_w > 0.0) {
                    lx.push_back(std::log(sum_w / count));
                    ly.push_back(std::log(sum_r / count));
                }
            }
        }
        if (lx.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) { mx += lx[i]; my += ly[i]; }
            mx /= lx.size();
            my /= lx.size();
            double num = 0, den = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                num += (lx[i] - mx) * (ly[i] - my);
                den += (lx[i] - mx) * (lx[i] - mx);
            }
            if (den > 0) {
                rep.remainder_slope = num / den;
                rep.has_remainder_slope = true;
            }
        }
    }

    auto ok = [](double declared, double empirical) {
        return std::isnan(declared) || empirical <= declared * 1.05 + 1e-9;
    };
    rep.lipschitz_ok = ok(f.meta.value_lip, rep.f_lipschitz);
    rep.vertical_ok = ok(f.meta.vertical_lip, rep.vertical_lipschitz) &&
                      ok(f.meta.vertical2_lip, rep.vertical2_lipschitz) && rep.vertical_stable;
    return rep;
}

}  // namespace roughpath
