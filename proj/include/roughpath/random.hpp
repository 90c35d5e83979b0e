#pragma once

#include <cmath>
#include <cstdint>

#include "roughpath/errors.hpp"

namespace roughpath {

/// Counter-based 64-bit generator (SplitMix64 in counter mode).  The value at
/// stream position i is mix(seed + (i+1) * kGamma), so any element of the
/// stream is computable independently and the stream is reproducible
/// bit-for-bit across platforms and languages.
class CounterRng {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kMix1 = 0xBF58476D1CE4E5B9ULL;
    static constexpr std::uint64_t kMix2 = 0x94D049BB133111EBULL;

    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t index) const {
        std::uint64_t z = seed_ + (index + 1) * kGamma;
        z ^= z >> 30;
        z *= kMix1;
        z ^= z >> 27;
        z *= kMix2;
        z ^= z >> 31;
        return z;
    }

    /// Uniform in the open interval (0, 1): 53 high bits plus a half-ulp
    /// offset, so 0 and 1 are never produced.
    double uniform(std::uint64_t index) const {
        return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard Gaussian via the inverse CDF (deterministic, no rejection).
    double gaussian(std::uint64_t index) const { return normal_inv_cdf(uniform(index)); }

    /// Inverse of the standard normal CDF, Wichura's PPND16 rational
    /// approximations (absolute error below 1e-15 over (0, 1)).
    static double normal_inv_cdf(double u) {
        if (!(u > 0.0 && u < 1.0)) throw DomainError("normal_inv_cdf: argument must be in (0,1)");
        const double q = u - 0.5;
        if (std::abs(q) <= 0.425) {
            const double r = 0.180625 - q * q;
            static constexpr double a[8] = {
                3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
                1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
                3.3430575583588128105e4, 2.5090809287301226727e3};
            static constexpr double b[8] = {
                1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
                5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
                2.8729085735721942674e4, 5.2264952788528545610e3};
            return q * horner(a, r) / horner(b, r);
        }
        double r = q < 0.0 ? u : 1.0 - u;
        r = std::sqrt(-std::log(r));
        double v;
        if (r <= 5.0) {
            r -= 1.6;
            static constexpr double c[8] = {
                1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                2.27238449892691845833e-2, 7.74545014278341407640e-4};
            static constexpr double d[8] = {
                1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
                5.47593808499534494600e-4, 1.05075007164441684324e-9};
            v = horner(c, r) / horner(d, r);
        } else {
            r -= 5.0;
            static constexpr double e[8] = {
                6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                2.71155556874348757815e-5, 2.01033439929228813265e-7};
            static constexpr double f[8] = {
                1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
                1.42151175831644588870e-7, 2.04426310338993978564e-15};
            v = horner(e, r) / horner(f, r);
        }
        return q < 0.0 ? -v : v;
    }

private:
    static double horner(const double (&coef)[8], double x) {
        double s = coef[7];
        for (int i = 6; i >= 0; --i) s = s * x + coef[i];
        return s;
    }

    std::uint64_t seed_;
};

}  // namespace roughpath
