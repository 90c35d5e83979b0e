#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "roughpath/errors.hpp"
#include "roughpath/linalg.hpp"

namespace roughpath {

/// Absolute tolerance used to match query times against grid times.
inline constexpr double kGridTimeTol = 1e-9;

/// A continuous path sampled on a finite strictly increasing time grid.
/// Between grid points the path is, by convention, the linear interpolant
/// of its samples; every norm in this library is computed on the grid.
/// Instances are immutable after construction.
class DiscretePath {
public:
    DiscretePath() = default;

    /// `values` is row-major: values[i * dimension + c] is coordinate c at times[i].
    DiscretePath(std::vector<double> times, std::vector<double> values, std::size_t dimension)
        : times_(std::move(times)), values_(std::move(values)), dim_(dimension) {
        if (dim_ == 0) throw DomainError("DiscretePath: dimension must be positive");
        if (times_.empty()) throw DomainError("DiscretePath: need at least one sample");
        if (values_.size() != times_.size() * dim_)
            throw DomainError("DiscretePath: values size does not match times x dimension");
        for (std::size_t i = 1; i < times_.size(); ++i)
            if (!(times_[i] > times_[i - 1]))
                throw DomainError("DiscretePath: times must be strictly increasing");
    }

    /// Scalar path from (times, values).
    static DiscretePath scalar(std::vector<double> times, std::vector<double> values) {
        return DiscretePath(std::move(times), std::move(values), 1);
    }

    /// Uniform grid with n_segments segments on [0, horizon], all values zero.
    static DiscretePath zeros(std::size_t n_segments, double horizon, std::size_t dimension) {
        std::vector<double> t(n_segments + 1);
        for (std::size_t i = 0; i <= n_segments; ++i)
            t[i] = horizon * static_cast<double>(i) / static_cast<double>(n_segments);
        std::vector<double> v((n_segments + 1) * dimension, 0.0);
        return DiscretePath(std::move(t), std::move(v), dimension);
    }

    std::size_t size() const { return times_.size(); }
    std::size_t segments() const { return times_.size() - 1; }
    std::size_t dimension() const { return dim_; }
    double time(std::size_t i) const { return times_[i]; }
    double start_time() const { return times_.front(); }
    double horizon() const { return times_.back(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& raw_values() const { return values_; }

    std::span<const double> value(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<double> mutable_value(std::size_t i) {
        return {values_.data() + i * dim_, dim_};
    }

    /// X(t_j) - X(t_i) as a vector.
    Vec increment(std::size_t i, std::size_t j) const { return sub(value(j), value(i)); }

    /// Linear interpolation; clamps outside [start, horizon].
    Vec value_at(double t) const {
        if (t <= times_.front()) return Vec(value(0).begin(), value(0).end());
        if (t >= times_.back()) return Vec(value(size() - 1).begin(), value(size() - 1).end());
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t j = static_cast<std::size_t>(it - times_.begin());
        std::size_t i = j - 1;
        double w = (t - times_[i]) / (times_[j] - times_[i]);
        Vec r(dim_);
        for (std::size_t c = 0; c < dim_; ++c)
            r[c] = (1.0 - w) * values_[i * dim_ + c] + w * values_[j * dim_ + c];
        return r;
    }

    /// Index of the grid time equal to t (within kGridTimeTol), or throws.
    std::size_t index_at(double t) const {
        auto it = std::lower_bound(times_.begin(), times_.end(), t);
        std::size_t best = static_cast<std::size_t>(it - times_.begin());
        double d_best = best < size() ? std::abs(times_[best] - t) : 1e300;
        if (best > 0 && std::abs(times_[best - 1] - t) < d_best) {
            --best;
            d_best = std::abs(times_[best] - t);
        }
        double tol = kGridTimeTol * std::max(1.0, std::abs(times_.back()));
        if (best >= size() || d_best > tol)
            throw GridAlignmentError("time " + std::to_string(t) + " is not a grid time");
        return best;
    }

    bool is_grid_time(double t) const {
        try {
            (void)index_at(t);
            return true;
        } catch (const GridAlignmentError&) {
            return false;
        }
    }

    /// sup_t |X(t)| (Euclidean norm per sample; attained at a grid point).
    double sup_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, norm2(value(i)));
        return m;
    }

    /// Subpath on grid indices [i0, i1].
    DiscretePath restrict(std::size_t i0, std::size_t i1) const {
        std::vector<double> t(times_.begin() + i0, times_.begin() + i1 + 1);
        std::vector<double> v(values_.begin() + i0 * dim_, values_.begin() + (i1 + 1) * dim_);
        return DiscretePath(std::move(t), std::move(v), dim_);
    }

    /// Copy with an extra knot at time t (value interpolated); no-op when t
    /// is already a grid time.
    DiscretePath with_knot(double t) const {
        if (is_grid_time(t)) return *this;
        if (t < times_.front() || t > times_.back())
            throw DomainError("with_knot: time outside path domain");
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t j = static_cast<std::size_t>(it - times_.begin());
        Vec v = value_at(t);
        std::vector<double> nt(times_);
        nt.insert(nt.begin() + j, t);
        std::vector<double> nv(values_);
        nv.insert(nv.begin() + j * dim_, v.begin(), v.end());
        return DiscretePath(std::move(nt), std::move(nv), dim_);
    }

    bool operator==(const DiscretePath& o) const {
        return dim_ == o.dim_ && times_ == o.times_ && values_ == o.values_;
    }

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::size_t dim_ = 0;
};

/// Builds a path from per-sample vectors.
inline DiscretePath make_path(const std::vector<double>& times,
                              const std::vector<Vec>& samples) {
    if (samples.empty()) throw DomainError("make_path: empty sample list");
    std::size_t dim = samples.front().size();
    std::vector<double> flat;
    flat.reserve(times.size() * dim);
    for (const auto& s : samples) {
        if (s.size() != dim) throw DomainError("make_path: inconsistent sample dimension");
        flat.insert(flat.end(), s.begin(), s.end());
    }
    return DiscretePath(std::vector<double>(times), std::move(flat), dim);
}

/// Samples a function t -> Vec on a uniform grid with n segments over [0, T].
template <typename F>
DiscretePath sample_path(F&& f, std::size_t n_segments, double T, std::size_t dimension) {
    std::vector<double> t(n_segments + 1), v((n_segments + 1) * dimension);
    for (std::size_t i = 0; i <= n_segments; ++i) {
        t[i] = T * static_cast<double>(i) / static_cast<double>(n_segments);
        Vec x = f(t[i]);
        std::copy(x.begin(), x.end(), v.begin() + i * dimension);
    }
    return DiscretePath(std::move(t), std::move(v), dimension);
}

}  // namespace roughpath
