#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "roughpath/errors.hpp"
#include "roughpath/rough_path.hpp"
#include "roughpath/variation.hpp"

namespace roughpath {

/// A path Y together with its Gubinelli derivative Y' relative to a reference
/// rough path X.  Y has m components (m may itself be a flattened k x d
/// matrix shape when Y is an integrand); Y' stores m x d entries laid out as
/// y_prime[a * d + i] = dY_a / dX_i.  The defining property is that the
/// remainder R^Y_{t,s} = Y_{t,s} - Y'_t X_{t,s} has finite q-variation with
/// q < p.  Immutable; operations are pure.
struct ControlledPath {
    DiscretePath y;
    DiscretePath y_prime;
    std::shared_ptr<const RoughPath> reference;
    double p = 2.0;
    double q = 4.0 / 3.0;

    ControlledPath(DiscretePath y_, DiscretePath y_prime_,
                   std::shared_ptr<const RoughPath> ref, double p_, double q_ = 0.0)
        : y(std::move(y_)), y_prime(std::move(y_prime_)), reference(std::move(ref)), p(p_),
          q(q_ > 0.0 ? q_ : q_exponent(p_)) {
        if (!reference) throw ReferenceError("ControlledPath: missing reference rough path");
        std::size_t d = reference->dimension();
        if (y.times() != reference->base().times() || y_prime.times() != y.times())
            throw DomainError("ControlledPath: y, y' and reference must share one grid");
        if (y_prime.dimension() != y.dimension() * d)
            throw DomainError("ControlledPath: y' must have dimension m x d");
    }

    std::size_t value_dim() const { return y.dimension(); }
    std::size_t driver_dim() const { return reference->dimension(); }
    std::size_t size() const { return y.size(); }
};

/// R^Y_{t_i, t_j} = Y_{t_i,t_j} - Y'_{t_i} X_{t_i,t_j}.
inline Vec remainder(const ControlledPath& cp, std::size_t i, std::size_t j) {
    std::size_t m = cp.value_dim(), d = cp.driver_dim();
    Vec r = cp.y.increment(i, j);
    Vec dx = cp.reference->base().increment(i, j);
    auto yp = cp.y_prime.value(i);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t c = 0; c < d; ++c) r[a] -= yp[a * d + c] * dx[c];
    return r;
}

inline Vec remainder(const ControlledPath& cp, double t, double s) {
    return remainder(cp, cp.y.index_at(t), cp.y.index_at(s));
}

/// ||R^Y||_{q,[t_i0,t_i1]} via the two-parameter partition DP.
inline double remainder_variation(const ControlledPath& cp, double q, std::size_t i0,
                                  std::size_t i1) {
    return variation_norm_two_param(
        [&](std::size_t i, std::size_t j) { return norm2(remainder(cp, i, j)); }, q, i0, i1);
}

/// Components of the controlled-path Banach norm
/// |Y_0| + |Y'_0| + ||Y'||_p + ||R^Y||_q.
struct ControlledNorm {
    double initial = 0.0;
    double gubinelli_var = 0.0;
    double remainder_var = 0.0;
    double total = 0.0;
};

inline ControlledNorm controlled_norm(const ControlledPath& cp) {
    ControlledNorm n;
    n.initial = norm2(cp.y.value(0)) + norm2(cp.y_prime.value(0));
    n.gubinelli_var = p_variation_exact(cp.y_prime, cp.p);
    n.remainder_var = remainder_variation(cp, cp.q, 0, cp.size() - 1);
    n.total = n.initial + n.gubinelli_var + n.remainder_var;
    return n;
}

/// The control rho_X([t,s]) = |s-t| + ||X||^p_{p,[t,s]} + ||XX||^{p/2}_{p/2,[t,s]}
/// used to size solver windows; superadditive on grid triples.
inline IntervalControl rho_control(const std::shared_ptr<const RoughPath>& rp) {
    if (!rp) throw ReferenceError("rho_control: null rough path");
    double p = rp->p_exponent();
    auto eval = [rp, p](std::size_t i, std::size_t j) {
        const DiscretePath& x = rp->base();
        double time_part = x.time(j) - x.time(i);
        double x_part = p_variation_sum(x, p, i, j);
        double xx_part = variation_sum_two_param(
            [&](std::size_t a, std::size_t b) { return rp->block(a, b).frobenius(); }, p / 2.0, i,
            j);
        return time_part + x_part + xx_part;
    };
    return IntervalControl(rp->base().times(), eval);
}

/// rho_X([t_{i0}, t_k]) for every k in [i0, i1], one DP pass per norm.
inline std::vector<double> rho_row(const RoughPath& rp, std::size_t i0, std::size_t i1) {
    const DiscretePath& x = rp.base();
    double p = rp.p_exponent();
    auto wx = [&](std::size_t i, std::size_t j) {
        return std::pow(norm2(x.increment(i, j)), p);
    };
    auto wxx = [&](std::size_t i, std::size_t j) {
        return std::pow(rp.block(i, j).frobenius(), p / 2.0);
    };
    auto rx = detail::partition_sup_row(wx, i0, i1);
    auto rxx = detail::partition_sup_row(wxx, i0, i1);
    std::vector<double> row(i1 - i0 + 1);
    for (std::size_t k = i0; k <= i1; ++k)
        row[k - i0] = (x.time(k) - x.time(i0)) + rx[k - i0] + rxx[k - i0];
    return row;
}

/// All-pairs table for rho_X (same layout as p_variation_sum_table).
inline std::vector<std::vector<double>> rho_table(const RoughPath& rp) {
    std::size_t n = rp.size();
    std::vector<std::vector<double>> table(n);
    for (std::size_t i = 0; i < n; ++i) table[i] = rho_row(rp, i, n - 1);
    return table;
}

/// Table-backed rho control on the grid range [i0, i1]; queries are O(1)
/// after an O(W^3) tabulation.  Indices stay relative to the full grid.
inline IntervalControl rho_control_table(const std::shared_ptr<const RoughPath>& rp,
                                         std::size_t i0, std::size_t i1) {
    auto table = std::make_shared<std::vector<std::vector<double>>>();
    table->resize(i1 - i0 + 1);
    for (std::size_t i = i0; i <= i1; ++i) (*table)[i - i0] = rho_row(*rp, i, i1);
    return IntervalControl(rp->base().times(), [table, i0, i1](std::size_t i, std::size_t j) {
        if (i < i0 || j > i1) throw DomainError("rho_control_table: outside tabulated range");
        return (*table)[i - i0][j - i];
    });
}

/// sup over grid pairs of |W_{t,s}| / rho([t,s])^gamma for a two-parameter
/// function given by its magnitude.  Intervals with rho = 0 contribute 0 when
/// the increment vanishes and +infinity otherwise (suprema semantics, not an
/// error).
inline double holder_sup(const std::function<double(std::size_t, std::size_t)>& magnitude,
                         const IntervalControl& control, double gamma, std::size_t i0,
                         std::size_t i1) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("holder_sup: gamma must be in (0, 1]");
    double sup = 0.0;
    for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = i + 1; j <= i1; ++j) {
            double w = magnitude(i, j);
            double r = control(i, j);
            if (r <= 0.0) {
                if (w > 0.0) return std::numeric_limits<double>::infinity();
                continue;
            }
            sup = std::max(sup, w / std::pow(r, gamma));
        }
    return sup;
}

/// The seminorm ||(Y, Y')||_{kappa,beta,rho} = ||Y'||_{kappa,rho} + ||R^Y||_{beta,rho}
/// over grid pairs of [t_i0, t_i1].
inline double holder_seminorm(const ControlledPath& cp, const IntervalControl& control,
                              double kappa, double beta, std::size_t i0, std::size_t i1) {
    double yp = holder_sup(
        [&](std::size_t i, std::size_t j) { return norm2(cp.y_prime.increment(i, j)); }, control,
        kappa, i0, i1);
    double rm = holder_sup(
        [&](std::size_t i, std::size_t j) { return norm2(remainder(cp, i, j)); }, control, beta,
        i0, i1);
    return yp + rm;
}

inline double holder_seminorm(const ControlledPath& cp, const IntervalControl& control,
                              double kappa, double beta) {
    return holder_seminorm(cp, control, kappa, beta, 0, cp.size() - 1);
}

/// Distance in the controlled norm between two controlled paths on the same
/// grid, |dY_0| + |dY'_0| + ||dY'||_p + ||R^{dY}||_q restricted to [i0, i1].
inline double controlled_distance(const ControlledPath& a, const ControlledPath& b,
                                  std::size_t i0, std::size_t i1) {
    if (a.value_dim() != b.value_dim() || a.size() != b.size())
        throw DomainError("controlled_distance: mismatched shapes");
    std::size_t m = a.value_dim(), d = a.driver_dim();
    const DiscretePath& x = a.reference->base();
    auto dy = [&](std::size_t i, std::size_t j) {
        Vec r = sub(a.y.value(j), b.y.value(j));
        Vec l = sub(a.y.value(i), b.y.value(i));
        return sub(r, l);
    };
    auto dyp = [&](std::size_t i, std::size_t j) {
        Vec r = sub(a.y_prime.value(j), b.y_prime.value(j));
        Vec l = sub(a.y_prime.value(i), b.y_prime.value(i));
        return norm2(sub(r, l));
    };
    auto drem = [&](std::size_t i, std::size_t j) {
        Vec r = dy(i, j);
        Vec dx = x.increment(i, j);
        auto pa = a.y_prime.value(i);
        auto pb = b.y_prime.value(i);
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t e = 0; e < d; ++e) r[c] -= (pa[c * d + e] - pb[c * d + e]) * dx[e];
        return norm2(r);
    };
    double init = norm2(sub(a.y.value(i0), b.y.value(i0))) +
                  norm2(sub(a.y_prime.value(i0), b.y_prime.value(i0)));
    double gub = variation_norm_two_param(dyp, a.p, i0, i1);
    double rem = variation_norm_two_param(drem, a.q, i0, i1);
    return init + gub + rem;
}

}  // namespace roughpath
