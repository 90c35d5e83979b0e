#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "roughpath/errors.hpp"
#include "roughpath/functional.hpp"
#include "roughpath/io.hpp"
#include "roughpath/rough_path.hpp"

// String-addressable built-ins for the CLI and config files: functionals by
// id (e.g. "smax:eps=0.1:quintic") and drivers by spec (e.g.
// "brownian:42:256" or a path/rough-path file).

namespace roughpath {

namespace detail_reg {

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double num_arg(const std::string& field, const std::string& key) {
    if (field.rfind(key + "=", 0) == 0) return parse_double(field.substr(key.size() + 1));
    return parse_double(field);
}

}  // namespace detail_reg

/// Builds a functional from its id.  `path_dim` and `out_dim` come from the
/// calling context (state dimension and coefficient shape).
///
///   zero                         constant 0
///   const:v or const:v1,v2,...   constant vector
///   endpoint                     F(t,x) = x(t)            (out_dim == path_dim)
///   runmax                       running maximum           (scalar)
///   smax:eps=E:quintic|quadratic smoothed running maximum  (scalar)
///   intdep:y|y2|xs               integral family, psi = x(t), x(t)^2 or x(s)
///   discrete:t=a;b;...:sum|prod  discrete pins, phi = sum or product of pins
inline PathFunctional make_functional(const std::string& id, std::size_t path_dim,
                                      std::size_t out_dim) {
    auto fields = detail_reg::split(id, ':');
    const std::string& kind = fields[0];

    if (kind == "zero" || kind == "const") {
        Vec v(out_dim, 0.0);
        if (kind == "const") {
            if (fields.size() != 2) throw ParseError("const functional: expected const:v1,v2,...");
            auto parts = detail_reg::split(fields[1], ',');
            if (parts.size() == 1) {
                v.assign(out_dim, parse_double(parts[0]));
            } else {
                if (parts.size() != out_dim)
                    throw ParseError("const functional: wrong number of components");
                for (std::size_t i = 0; i < out_dim; ++i) v[i] = parse_double(parts[i]);
            }
        }
        PathFunctional f;
        f.id = id;
        f.out_dim = out_dim;
        f.path_dim = path_dim;
        f.evaluate = [v](const StoppedPath&) { return v; };
        f.vertical = [n = out_dim * path_dim](const StoppedPath&) { return Vec(n, 0.0); };
        f.vertical2 = [n = out_dim * path_dim * path_dim](const StoppedPath&) {
            return Vec(n, 0.0);
        };
        f.horizontal = [n = out_dim](const StoppedPath&) { return Vec(n, 0.0); };
        f.meta.value_lip = 0.0;
        f.meta.horizontal_lip = 0.0;
        f.meta.vertical_lip = 0.0;
        return f;
    }
    if (kind == "endpoint") {
        if (out_dim != path_dim)
            throw ParseError("endpoint functional requires out_dim == path_dim");
        PathFunctional f;
        f.id = id;
        f.out_dim = out_dim;
        f.path_dim = path_dim;
        f.evaluate = [](const StoppedPath& sp) { return sp.current(); };
        f.vertical = [n = path_dim](const StoppedPath&) {
            Vec g(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) g[i * n + i] = 1.0;
            return g;
        };
        f.vertical2 = [n = path_dim](const StoppedPath&) { return Vec(n * n * n, 0.0); };
        f.horizontal = [n = out_dim](const StoppedPath&) { return Vec(n, 0.0); };
        f.meta.value_lip = 1.0;
        f.meta.horizontal_lip = 0.0;
        f.meta.vertical_lip = 0.0;
        return f;
    }
    if (kind == "runmax") {
        if (path_dim != 1 || out_dim != 1) throw ParseError("runmax is scalar");
        return running_max();
    }
    if (kind == "smax") {
        if (path_dim != 1 || out_dim != 1) throw ParseError("smax is scalar");
        if (fields.size() != 3) throw ParseError("smax: expected smax:eps=E:quintic|quadratic");
        double eps = detail_reg::num_arg(fields[1], "eps");
        SmoothingKind sk;
        if (fields[2] == "quintic") sk = SmoothingKind::Quintic;
        else if (fields[2] == "quadratic") sk = SmoothingKind::Quadratic;
        else throw ParseError("smax: blend must be quintic or quadratic");
        return smoothed_running_max(eps, sk);
    }
    if (kind == "intdep") {
        if (path_dim != 1 || out_dim != 1) throw ParseError("intdep is scalar");
        if (fields.size() != 2) throw ParseError("intdep: expected intdep:y|y2|xs");
        const std::string& which = fields[1];
        if (which == "y") {
            return integral_functional(
                1, 1,
                [](double, const StoppedPath&, std::span<const double> y) { return Vec{y[0]}; },
                [](double, const StoppedPath&, std::span<const double>) { return Vec{1.0}; },
                [](double, const StoppedPath&, std::span<const double>) { return Vec{0.0}; });
        }
        if (which == "y2") {
            return integral_functional(
                1, 1,
                [](double, const StoppedPath&, std::span<const double> y) {
                    return Vec{y[0] * y[0]};
                },
                [](double, const StoppedPath&, std::span<const double> y) {
                    return Vec{2.0 * y[0]};
                },
                [](double, const StoppedPath&, std::span<const double>) { return Vec{2.0}; });
        }
        if (which == "xs") {
            return integral_functional(
                1, 1,
                [](double s, const StoppedPath& xs, std::span<const double>) {
                    return Vec{xs.value_at(s)[0]};
                },
                [](double, const StoppedPath&, std::span<const double>) { return Vec{0.0}; },
                [](double, const StoppedPath&, std::span<const double>) { return Vec{0.0}; });
        }
        throw ParseError("intdep: unknown integrand '" + which + "'");
    }
    if (kind == "discrete") {
        if (path_dim != 1 || out_dim != 1) throw ParseError("discrete is scalar");
        if (fields.size() != 3) throw ParseError("discrete: expected discrete:t=a;b;...:sum|prod");
        std::string tlist = fields[1];
        if (tlist.rfind("t=", 0) == 0) tlist = tlist.substr(2);
        std::vector<double> pins;
        for (const auto& p : detail_reg::split(tlist, ';')) pins.push_back(parse_double(p));
        bool prod = fields[2] == "prod";
        if (!prod && fields[2] != "sum") throw ParseError("discrete: phi must be sum or prod");
        auto phi = [prod](double, const std::vector<Vec>& xs) {
            double acc = prod ? 1.0 : 0.0;
            for (const auto& x : xs) acc = prod ? acc * x[0] : acc + x[0];
            return Vec{acc};
        };
        auto grad = [prod](double, const std::vector<Vec>& xs, std::size_t i) {
            if (!prod) return Vec{1.0};
            double acc = 1.0;
            for (std::size_t j = 0; j < xs.size(); ++j)
                if (j != i) acc *= xs[j][0];
            return Vec{acc};
        };
        auto hess = [prod](double, const std::vector<Vec>& xs, std::size_t i, std::size_t j) {
            if (!prod || i == j) return Vec{0.0};
            double acc = 1.0;
            for (std::size_t l = 0; l < xs.size(); ++l)
                if (l != i && l != j) acc *= xs[l][0];
            return Vec{acc};
        };
        auto ddt = [](double, const std::vector<Vec>&) { return Vec{0.0}; };
        return discrete_time_functional(std::move(pins), 1, 1, phi, grad, hess, ddt);
    }
    throw ParseError("unknown functional id '" + id + "'");
}

/// Builds a driver rough path from a spec string:
///   brownian:seed:n[:T[:d[:refine]]]   Brownian lift on n intervals
///   line:n[:T]                         X(t) = t, smooth lift
///   <file>.json                        rough-path JSON
///   <file>.csv                         path CSV, smooth-lifted at p
inline std::shared_ptr<const RoughPath> make_driver(const std::string& spec, double p) {
    auto fields = detail_reg::split(spec, ':');
    if (fields[0] == "brownian") {
        if (fields.size() < 3) throw ParseError("brownian driver: brownian:seed:n[:T[:d[:refine]]]");
        std::uint64_t seed = static_cast<std::uint64_t>(parse_double(fields[1]));
        std::size_t n = static_cast<std::size_t>(parse_double(fields[2]));
        double T = fields.size() > 3 ? parse_double(fields[3]) : 1.0;
        std::size_t d = fields.size() > 4 ? static_cast<std::size_t>(parse_double(fields[4])) : 1;
        std::size_t refine = fields.size() > 5 ? static_cast<std::size_t>(parse_double(fields[5])) : 16;
        return std::make_shared<const RoughPath>(brownian_lift(seed, n, T, d, p, refine));
    }
    if (fields[0] == "line") {
        if (fields.size() < 2) throw ParseError("line driver: line:n[:T]");
        std::size_t n = static_cast<std::size_t>(parse_double(fields[1]));
        double T = fields.size() > 2 ? parse_double(fields[2]) : 1.0;
        DiscretePath x = sample_path([](double t) { return Vec{t}; }, n, T, 1);
        return std::make_shared<const RoughPath>(smooth_lift(x, p));
    }
    if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
        return std::make_shared<const RoughPath>(rough_from_json(json::parse(read_file(spec))));
    }
    if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv") {
        return std::make_shared<const RoughPath>(smooth_lift(path_from_csv(read_file(spec)), p));
    }
    throw ParseError("unknown driver spec '" + spec + "'");
}

/// Initial history segment: "const:v[,v2,...]" (single sample at the driver's
/// start time) or a path CSV file.
inline DiscretePath make_initial(const std::string& spec, const RoughPath& driver,
                                 std::size_t k) {
    if (spec.rfind("const:", 0) == 0) {
        auto parts = detail_reg::split(spec.substr(6), ',');
        Vec v;
        if (parts.size() == 1) {
            v.assign(k, parse_double(parts[0]));
        } else {
            if (parts.size() != k) throw ParseError("initial const: wrong component count");
            for (const auto& s : parts) v.push_back(parse_double(s));
        }
        return DiscretePath({driver.base().start_time()}, std::move(v), k);
    }
    return path_from_csv(read_file(spec));
}

}  // namespace roughpath
