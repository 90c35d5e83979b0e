#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "roughpath/errors.hpp"
#include "roughpath/linalg.hpp"
#include "roughpath/path.hpp"
#include "roughpath/random.hpp"
#include "roughpath/variation.hpp"

namespace roughpath {

/// Defect level above which second-level data is reported as corrupted by
/// consistency checks (clean constructions sit eleven orders below).
inline constexpr double kSecondLevelDefectThreshold = 0.1;

/// A level-2 rough path: the base path X together with one d x d block
/// XX_{t_k, t_{k+1}} per consecutive grid interval.  Blocks over wider
/// intervals are reconstructed by Chen chaining
///   XX_{t,s} = XX_{t,u} + XX_{u,s} + X_{t,u} (x) X_{u,s},
/// so per-interval storage keeps memory linear and multi-interval values
/// Chen-consistent by construction.  Immutable after construction.
class RoughPath {
public:
    RoughPath(DiscretePath base, std::vector<Matrix> per_interval_blocks, double p_exponent,
              bool geometric = true)
        : base_(std::move(base)),
          blocks_(std::move(per_interval_blocks)),
          p_(p_exponent),
          geometric_(geometric) {
        std::size_t d = base_.dimension();
        if (blocks_.size() != base_.segments())
            throw DomainError("RoughPath: need one second-level block per grid interval");
        for (const auto& m : blocks_)
            if (m.rows() != d || m.cols() != d)
                throw DomainError("RoughPath: block shape must be d x d");
        build_prefix();
    }

    const DiscretePath& base() const { return base_; }
    std::size_t dimension() const { return base_.dimension(); }
    std::size_t size() const { return base_.size(); }
    double p_exponent() const { return p_; }
    bool geometric() const { return geometric_; }
    const std::vector<Matrix>& blocks() const { return blocks_; }

    /// XX_{t_i, t_j} by Chen chaining (prefix differences; withdrawal of the
    /// anchored blocks is algebraically identical to chaining left-to-right).
    Matrix block(std::size_t i, std::size_t j) const {
        std::size_t d = dimension();
        if (j < i) throw DomainError("RoughPath::block: reversed interval");
        if (j == i) return Matrix(d, d);
        if (j == i + 1) return blocks_[i];
        Matrix out = prefix_[j] - prefix_[i];
        Vec head = base_.increment(0, i);
        out -= Matrix::outer(head, base_.increment(i, j));
        return out;
    }

    /// XX over grid-aligned times [t, s]; XX_{t,t} = 0.
    Matrix chen_extend(double t, double s) const {
        return block(base_.index_at(t), base_.index_at(s));
    }

    /// Deviation of the stored block from the lift of the linear interpolant:
    /// B_k = XX_k - X_k (x) X_k / 2.  For geometric lifts this is the
    /// antisymmetric (area) part; it is the data the refinement of the
    /// canonical interpolated model must preserve.
    Matrix excess(std::size_t k) const {
        Vec dx = base_.increment(k, k + 1);
        return blocks_[k] - 0.5 * Matrix::outer(dx, dx);
    }

    /// Restriction to grid indices [i0, i1] (blocks are shared per interval).
    RoughPath restrict(std::size_t i0, std::size_t i1) const {
        std::vector<Matrix> b(blocks_.begin() + i0, blocks_.begin() + i1);
        return RoughPath(base_.restrict(i0, i1), std::move(b), p_, geometric_);
    }

private:
    void build_prefix() {
        std::size_t d = dimension();
        prefix_.assign(base_.size(), Matrix(d, d));
        for (std::size_t k = 0; k + 1 < base_.size(); ++k) {
            Matrix next = prefix_[k] + blocks_[k];
            next += Matrix::outer(base_.increment(0, k), base_.increment(k, k + 1));
            prefix_[k + 1] = std::move(next);
        }
    }

    DiscretePath base_;
    std::vector<Matrix> blocks_;
    std::vector<Matrix> prefix_;  // XX_{t_0, t_k}
    double p_;
    bool geometric_;
};

/// Worst consistency defect of the second level, maximised over two checks:
///  - the Chen identity on a strided sample of grid triples,
///  - for geometric lifts, the symmetric-part identity
///    Sym(XX_k) = X_k (x) X_k / 2 on every consecutive interval.
/// Chen chaining of per-interval storage telescopes identically, so a
/// corrupted block can only surface through the symmetric-part residual;
/// both are reported as one number (max-abs entry).
inline double chen_defect(const RoughPath& rp, std::size_t max_stride_points = 24) {
    std::size_t n = rp.size();
    double worst = 0.0;
    std::size_t stride = std::max<std::size_t>(1, (n - 1) / max_stride_points);
    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < n; i += stride) pts.push_back(i);
    if (pts.back() != n - 1) pts.push_back(n - 1);
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a; b < pts.size(); ++b)
            for (std::size_t c = b; c < pts.size(); ++c) {
                std::size_t i = pts[a], u = pts[b], j = pts[c];
                Matrix res = rp.block(i, u) + rp.block(u, j) - rp.block(i, j);
                res += Matrix::outer(rp.base().increment(i, u), rp.base().increment(u, j));
                worst = std::max(worst, res.max_abs_entry());
            }
    if (rp.geometric()) {
        for (std::size_t k = 0; k + 1 < n; ++k) {
            Vec dx = rp.base().increment(k, k + 1);
            Matrix res = rp.blocks()[k].symmetric_part() - 0.5 * Matrix::outer(dx, dx);
            worst = std::max(worst, res.max_abs_entry());
        }
    }
    return worst;
}

/// Canonical geometric lift of a grid path: per interval,
/// XX_k = integral of X_{t_k, r} (x) dX over the linear interpolant,
/// which is X_k (x) X_k / 2 in closed form.
inline RoughPath smooth_lift(const DiscretePath& path, double p) {
    if (!(p >= 2.0 && p < 3.0)) throw DomainError("smooth_lift requires p in [2, 3)");
    std::vector<Matrix> blocks;
    blocks.reserve(path.segments());
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        Vec dx = path.increment(k, k + 1);
        blocks.push_back(0.5 * Matrix::outer(dx, dx));
    }
    return RoughPath(path, std::move(blocks), p, /*geometric=*/true);
}

/// d-dimensional Brownian sample on a uniform grid with n intervals over
/// [0, T], lifted with the piecewise-linear (Stratonovich-consistent) area
/// computed on an internal refinement of factor `refine` and restricted to
/// the coarse grid by Chen chaining.  Deterministic given all arguments:
/// randomness comes only from the counter generator, Gaussians from the
/// inverse CDF.
inline RoughPath brownian_lift(std::uint64_t seed, std::size_t n, double T, std::size_t d,
                               double p, std::size_t refine = 16) {
    if (n < 2) throw DomainError("brownian_lift requires n >= 2");
    if (!(p > 2.0 && p < 3.0)) throw DomainError("brownian_lift requires p in (2, 3)");
    if (refine < 1) throw DomainError("brownian_lift: refinement factor must be >= 1");
    CounterRng rng(seed);
    std::size_t m = n * refine;
    double dt_fine = T / static_cast<double>(m);
    double sd = std::sqrt(dt_fine);

    std::vector<double> fine((m + 1) * d, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t a = 0; a < d; ++a)
            fine[(j + 1) * d + a] =
                fine[j * d + a] + sd * rng.gaussian(static_cast<std::uint64_t>(j) * d + a);

    std::vector<double> times(n + 1), values((n + 1) * d);
    for (std::size_t k = 0; k <= n; ++k) {
        times[k] = T * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t a = 0; a < d; ++a) values[k * d + a] = fine[k * refine * d + a];
    }
    DiscretePath base(std::move(times), std::move(values), d);

    std::vector<Matrix> blocks;
    blocks.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Matrix xx(d, d);
        std::span<const double> anchor{fine.data() + k * refine * d, d};
        for (std::size_t j = k * refine; j < (k + 1) * refine; ++j) {
            std::span<const double> wj{fine.data() + j * d, d};
            Vec head = sub(wj, anchor);
            Vec dx = sub({fine.data() + (j + 1) * d, d}, wj);
            xx += 0.5 * Matrix::outer(dx, dx);
            xx += Matrix::outer(head, dx);
        }
        blocks.push_back(std::move(xx));
    }
    return RoughPath(std::move(base), std::move(blocks), p, /*geometric=*/true);
}

/// Refines every grid interval into `factor` equal time steps: the base path
/// is interpolated linearly and each sub-block carries the piecewise-linear
/// lift plus an equal share of the interval's excess, so Chen chaining over a
/// coarse interval reproduces the stored block exactly.
inline RoughPath chen_refine(const RoughPath& rp, std::size_t factor) {
    if (factor < 1) throw DomainError("chen_refine: factor must be >= 1");
    if (factor == 1) return rp;
    const DiscretePath& x = rp.base();
    std::size_t d = x.dimension();
    std::size_t n = x.segments();
    std::vector<double> times;
    std::vector<double> values;
    times.reserve(n * factor + 1);
    values.reserve((n * factor + 1) * d);
    std::vector<Matrix> blocks;
    blocks.reserve(n * factor);
    for (std::size_t k = 0; k < n; ++k) {
        double t0 = x.time(k), t1 = x.time(k + 1);
        Vec dx = x.increment(k, k + 1);
        Vec step = scaled(dx, 1.0 / static_cast<double>(factor));
        Matrix sub_block = 0.5 * Matrix::outer(step, step);
        Matrix share = rp.excess(k);
        share *= 1.0 / static_cast<double>(factor);
        sub_block += share;
        for (std::size_t j = 0; j < factor; ++j) {
            double w = static_cast<double>(j) / static_cast<double>(factor);
            times.push_back(t0 + w * (t1 - t0));
            auto v0 = x.value(k);
            for (std::size_t c = 0; c < d; ++c) values.push_back(v0[c] + w * dx[c]);
            blocks.push_back(sub_block);
        }
    }
    times.push_back(x.horizon());
    auto vl = x.value(x.size() - 1);
    values.insert(values.end(), vl.begin(), vl.end());
    return RoughPath(DiscretePath(std::move(times), std::move(values), d), std::move(blocks),
                     rp.p_exponent(), rp.geometric());
}

/// Returns a copy with one stored block entry shifted; used by tests and the
/// corruption-detection diagnostic.
inline RoughPath with_corrupted_block(const RoughPath& rp, std::size_t interval, std::size_t row,
                                      std::size_t col, double delta) {
    std::vector<Matrix> blocks = rp.blocks();
    blocks.at(interval)(row, col) += delta;
    return RoughPath(rp.base(), std::move(blocks), rp.p_exponent(), rp.geometric());
}

}  // namespace roughpath
