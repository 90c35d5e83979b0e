#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "roughpath/errors.hpp"
#include "roughpath/path.hpp"

namespace roughpath {

namespace detail {

/// Dynamic program shared by every variation norm in the library.
///
/// weight(i, j) must return |W_{t_i, t_j}|^p for i < j.  The supremum of
/// partition sums between indices [i0, i1] is computed by tracking, for each
/// k, the best sum over partitions of [i0, k] that end at k.  Any partition
/// not containing the endpoints is dominated by its extension, so restricting
/// to endpoint-anchored partitions loses nothing.
template <typename WeightFn>
double partition_sup(const WeightFn& weight, std::size_t i0, std::size_t i1) {
    if (i1 <= i0) return 0.0;
    std::vector<double> best(i1 - i0 + 1, 0.0);
    for (std::size_t k = i0 + 1; k <= i1; ++k) {
        double b = -std::numeric_limits<double>::infinity();
        for (std::size_t j = i0; j < k; ++j)
            b = std::max(b, best[j - i0] + weight(j, k));
        best[k - i0] = b;
    }
    return best[i1 - i0];
}

/// Same recursion, but fills sums for every end index k in [i0, i1]
/// (start fixed at i0).  Used to tabulate controls in O(n^2) per start.
template <typename WeightFn>
std::vector<double> partition_sup_row(const WeightFn& weight, std::size_t i0, std::size_t i1) {
    std::vector<double> best(i1 - i0 + 1, 0.0);
    for (std::size_t k = i0 + 1; k <= i1; ++k) {
        double b = -std::numeric_limits<double>::infinity();
        for (std::size_t j = i0; j < k; ++j)
            b = std::max(b, best[j - i0] + weight(j, k));
        best[k - i0] = b;
    }
    return best;
}

}  // namespace detail

/// p-variation sums of a two-parameter function given by `magnitude(i, j)`
/// (the norm |R_{t_i,t_j}|), without the final root.
inline double variation_sum_two_param(const std::function<double(std::size_t, std::size_t)>& magnitude,
                                      double p, std::size_t i0, std::size_t i1) {
    if (p < 1.0) throw DomainError("variation exponent must be >= 1");
    return detail::partition_sup(
        [&](std::size_t i, std::size_t j) { return std::pow(magnitude(i, j), p); }, i0, i1);
}

/// ||R||_{p,[t_{i0},t_{i1}]} for a two-parameter function.
inline double variation_norm_two_param(const std::function<double(std::size_t, std::size_t)>& magnitude,
                                       double p, std::size_t i0, std::size_t i1) {
    double s = variation_sum_two_param(magnitude, p, i0, i1);
    return s <= 0.0 ? 0.0 : std::pow(s, 1.0 / p);
}

/// Exact p-variation sum sup_pi sum |X_{t_k,t_{k+1}}|^p over grid partitions
/// of [t_{i0}, t_{i1}] (no root).  O(n^2) in the number of interior points.
inline double p_variation_sum(const DiscretePath& path, double p, std::size_t i0, std::size_t i1) {
    if (p < 1.0) throw DomainError("p-variation requires p >= 1");
    if (i1 > path.size() - 1 || i0 > i1) throw DomainError("p_variation: bad index range");
    return detail::partition_sup(
        [&](std::size_t i, std::size_t j) { return std::pow(norm2(path.increment(i, j)), p); },
        i0, i1);
}

/// ||X||_{p,[t,s]} computed exactly by dynamic programming, [t, s] grid-aligned.
inline double p_variation_exact(const DiscretePath& path, double p, double t, double s) {
    std::size_t i0 = path.index_at(t), i1 = path.index_at(s);
    if (i0 > i1) throw DomainError("p_variation: interval reversed");
    double sum = p_variation_sum(path, p, i0, i1);
    return sum <= 0.0 ? 0.0 : std::pow(sum, 1.0 / p);
}

inline double p_variation_exact(const DiscretePath& path, double p) {
    return p_variation_exact(path, p, path.start_time(), path.horizon());
}

/// Fast lower bound for ||X||_{p,[t,s]}: evaluates the partition made of the
/// endpoints and the points where the path direction reverses (negative inner
/// product of consecutive increments).  Always <= the exact value; documented
/// as an approximation and used by the CLI for very long grids.
inline double p_variation_greedy(const DiscretePath& path, double p, double t, double s) {
    if (p < 1.0) throw DomainError("p-variation requires p >= 1");
    std::size_t i0 = path.index_at(t), i1 = path.index_at(s);
    if (i1 <= i0) return 0.0;
    std::vector<std::size_t> pts{i0};
    for (std::size_t k = i0 + 1; k < i1; ++k) {
        Vec a = path.increment(pts.back(), k);
        Vec b = path.increment(k, k + 1);
        if (dot(a, b) < 0.0) pts.push_back(k);
    }
    pts.push_back(i1);
    double sum = 0.0;
    for (std::size_t m = 0; m + 1 < pts.size(); ++m)
        sum += std::pow(norm2(path.increment(pts[m], pts[m + 1])), p);
    // the coarsest partition is another admissible candidate
    sum = std::max(sum, std::pow(norm2(path.increment(i0, i1)), p));
    return sum <= 0.0 ? 0.0 : std::pow(sum, 1.0 / p);
}

inline double p_variation_greedy(const DiscretePath& path, double p) {
    return p_variation_greedy(path, p, path.start_time(), path.horizon());
}

/// A nonnegative superadditive function on grid-aligned subintervals:
/// omega([t,u]) + omega([u,s]) <= omega([t,s]).  Evaluated by grid index
/// pair; `at_times` resolves grid-aligned times first.
class IntervalControl {
public:
    using EvalFn = std::function<double(std::size_t, std::size_t)>;

    IntervalControl(std::vector<double> grid_times, EvalFn eval)
        : times_(std::make_shared<std::vector<double>>(std::move(grid_times))),
          eval_(std::move(eval)) {}

    double operator()(std::size_t i, std::size_t j) const {
        if (j < i) throw DomainError("IntervalControl: reversed interval");
        if (j == i) return 0.0;
        return eval_(i, j);
    }

    double at_times(double t, double s) const {
        return (*this)(index_at(t), index_at(s));
    }

    std::size_t index_at(double t) const {
        const auto& ts = *times_;
        double tol = kGridTimeTol * std::max(1.0, std::abs(ts.back()));
        auto it = std::lower_bound(ts.begin(), ts.end(), t - tol);
        if (it == ts.end() || std::abs(*it - t) > tol)
            throw GridAlignmentError("IntervalControl: time not on grid");
        return static_cast<std::size_t>(it - ts.begin());
    }

    const std::vector<double>& grid_times() const { return *times_; }
    std::size_t grid_size() const { return times_->size(); }

    /// Worst violation of superadditivity over all grid triples
    /// (positive value = violation).  Exposed so tests can assert it.
    double superadditivity_defect() const {
        std::size_t n = grid_size();
        double worst = -std::numeric_limits<double>::infinity();
        // cache omega(i, j) for all pairs
        std::vector<std::vector<double>> w(n);
        for (std::size_t i = 0; i < n; ++i) {
            w[i].resize(n - i);
            for (std::size_t j = i; j < n; ++j) w[i][j - i] = (*this)(i, j);
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t u = i; u < n; ++u)
                for (std::size_t j = u; j < n; ++j)
                    worst = std::max(worst, w[i][u - i] + w[u][j - u] - w[i][j - i]);
        return worst;
    }

private:
    std::shared_ptr<const std::vector<double>> times_;
    EvalFn eval_;
};

/// omega([t,s]) = ||X||^p_{p,[t,s]}; superadditive by partition concatenation,
/// and |X(s) - X(t)|^p <= omega([t,s]).
inline IntervalControl vp_control(const DiscretePath& path, double p) {
    if (p < 1.0) throw DomainError("vp_control requires p >= 1");
    auto owned = std::make_shared<DiscretePath>(path);
    return IntervalControl(path.times(), [owned, p](std::size_t i, std::size_t j) {
        return p_variation_sum(*owned, p, i, j);
    });
}

/// All-pairs table of p-variation sums: table[i][j - i] = V_p(X; t_i, t_j).
/// O(n^3) once, O(1) per lookup afterwards.
inline std::vector<std::vector<double>> p_variation_sum_table(const DiscretePath& path, double p) {
    std::size_t n = path.size();
    std::vector<std::vector<double>> table(n);
    auto weight = [&](std::size_t i, std::size_t j) {
        return std::pow(norm2(path.increment(i, j)), p);
    };
    for (std::size_t i = 0; i < n; ++i) table[i] = detail::partition_sup_row(weight, i, n - 1);
    return table;
}

// ---------------------------------------------------------------------------
// Piecewise-linear approximation
// ---------------------------------------------------------------------------

/// Measured quality of a piecewise-linear approximation; ratios against the
/// p-variation of the original path on the interval are what refinement
/// tests look at.
struct PiecewiseLinearReport {
    double sup_error = 0.0;       // ||X - X^N||_inf over the union grid
    double sup_norm_ratio = 0.0;  // ||X^N||_inf / ||X||_inf
    double pvar_interval = 0.0;   // ||X^N||_{p,[t,s]}
    double one_variation = 0.0;   // V_1(X^N; t, s)
    std::size_t knots = 0;
};

/// Replaces X on the grid-aligned interval [t, s] by a piecewise-linear path
/// through N+1 knots chosen at equal quantiles of the control
/// omega = ||X||^p_p (equal-time knots when the control is degenerate).
/// The path is unchanged outside [t, s].  Knots interpolate X, so the
/// approximation never increases the sup norm or the p-variation.
inline DiscretePath piecewise_linear_approx(const DiscretePath& path, std::size_t N, double p,
                                            double t, double s) {
    if (N <= 1) throw DomainError("piecewise_linear_approx requires N > 1");
    if (p < 1.0) throw DomainError("piecewise_linear_approx requires p >= 1");
    std::size_t i0 = path.index_at(t), i1 = path.index_at(s);
    if (i1 <= i0) throw DomainError("piecewise_linear_approx: empty interval");
    if (N >= i1 - i0) return path;  // grid paths are already piecewise linear

    // omega([t, u]) for every grid u in [t, s], one DP pass
    auto weight = [&](std::size_t a, std::size_t b) {
        return std::pow(norm2(path.increment(a, b)), p);
    };
    std::vector<double> omega = detail::partition_sup_row(weight, i0, i1);
    double total = omega.back();

    std::vector<std::size_t> knots{i0};
    if (total > 0.0) {
        for (std::size_t k = 1; k < N; ++k) {
            double target = total * static_cast<double>(k) / static_cast<double>(N);
            std::size_t idx = knots.back() + 1;
            while (idx < i1 && omega[idx - i0] < target) ++idx;
            if (idx >= i1) break;
            knots.push_back(idx);
        }
    } else {
        // constant path on [t, s]: equal-time spacing among grid points
        for (std::size_t k = 1; k < N; ++k) {
            double target = path.time(i0) + (path.time(i1) - path.time(i0)) *
                                                static_cast<double>(k) / static_cast<double>(N);
            std::size_t idx = knots.back() + 1;
            while (idx < i1 && path.time(idx) < target) ++idx;
            if (idx >= i1) break;
            knots.push_back(idx);
        }
    }
    knots.push_back(i1);

    std::vector<double> nt;
    std::vector<double> nv;
    std::size_t d = path.dimension();
    auto push = [&](std::size_t idx) {
        nt.push_back(path.time(idx));
        auto v = path.value(idx);
        nv.insert(nv.end(), v.begin(), v.end());
    };
    for (std::size_t i = 0; i < i0; ++i) push(i);
    for (std::size_t k : knots) push(k);
    for (std::size_t i = i1 + 1; i < path.size(); ++i) push(i);
    return DiscretePath(std::move(nt), std::move(nv), d);
}

/// Measures the Lemma-style bounds of an approximation against its original.
inline PiecewiseLinearReport piecewise_linear_report(const DiscretePath& original,
                                                     const DiscretePath& approx, double p,
                                                     double t, double s) {
    PiecewiseLinearReport r;
    double err = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        Vec a = approx.value_at(original.time(i));
        err = std::max(err, norm2(sub(a, original.value(i))));
    }
    for (std::size_t i = 0; i < approx.size(); ++i) {
        Vec o = original.value_at(approx.time(i));
        err = std::max(err, norm2(sub(o, approx.value(i))));
    }
    r.sup_error = err;
    double orig_sup = original.sup_norm();
    r.sup_norm_ratio = orig_sup > 0.0 ? approx.sup_norm() / orig_sup : 1.0;
    r.pvar_interval = p_variation_exact(approx, p, t, s);
    std::size_t a0 = approx.index_at(t), a1 = approx.index_at(s);
    double v1 = 0.0;
    for (std::size_t i = a0; i < a1; ++i) v1 += norm2(approx.increment(i, i + 1));
    r.one_variation = v1;
    r.knots = a1 - a0;
    return r;
}

/// Remainder variation exponent q_p = p^2 / (p + 1) certified for functional
/// lifts of p-variation paths.
inline double q_exponent(double p) { return p * p / (p + 1.0); }

/// Upper bound of the admissible p-window for functional integrands:
/// 1/p + 1/q_p > 1 exactly when p < 1 + sqrt(2).
inline double p_upper_limit() { return 1.0 + std::sqrt(2.0); }

}  // namespace roughpath
