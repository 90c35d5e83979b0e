#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roughpath/controlled.hpp"
#include "roughpath/errors.hpp"
#include "roughpath/functional.hpp"
#include "roughpath/path.hpp"
#include "roughpath/rough_path.hpp"

namespace roughpath {

using json = nlohmann::json;

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// CSV with mandatory header t,x_1,...,x_d; '.' decimal separator.
inline std::string path_to_csv(const DiscretePath& path) {
    std::ostringstream out;
    out << "t";
    for (std::size_t c = 1; c <= path.dimension(); ++c) out << ",x_" << c;
    out << "\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << format_double(path.time(i));
        for (double v : path.value(i)) out << "," << format_double(v);
        out << "\n";
    }
    return out.str();
}

namespace detail_io {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace detail_io

inline DiscretePath path_from_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        std::string_view line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty() && line[0] != '#') lines.push_back(line);
        start = pos + 1;
    }
    if (lines.size() < 2) throw ParseError("path CSV: need a header and at least one row");
    auto header = detail_io::split(lines[0], ',');
    if (header.empty() || header[0] != "t")
        throw ParseError("path CSV: header must start with 't'");
    std::size_t dim = header.size() - 1;
    if (dim == 0) throw ParseError("path CSV: no value columns");
    std::vector<double> times, values;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto cells = detail_io::split(lines[r], ',');
        if (cells.size() != dim + 1)
            throw ParseError("path CSV: row " + std::to_string(r) + " has wrong column count");
        times.push_back(parse_double(cells[0]));
        for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_double(cells[c]));
    }
    return DiscretePath(std::move(times), std::move(values), dim);
}

inline json path_to_json(const DiscretePath& path) {
    json j;
    j["dimension"] = path.dimension();
    j["times"] = path.times();
    std::vector<std::vector<double>> vals(path.size());
    for (std::size_t i = 0; i < path.size(); ++i)
        vals[i].assign(path.value(i).begin(), path.value(i).end());
    j["values"] = vals;
    return j;
}

inline DiscretePath path_from_json(const json& j) {
    try {
        std::size_t dim = j.at("dimension").get<std::size_t>();
        std::vector<double> times = j.at("times").get<std::vector<double>>();
        auto rows = j.at("values").get<std::vector<std::vector<double>>>();
        std::vector<double> flat;
        flat.reserve(rows.size() * dim);
        for (const auto& r : rows) {
            if (r.size() != dim) throw ParseError("path JSON: ragged values");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return DiscretePath(std::move(times), std::move(flat), dim);
    } catch (const json::exception& e) {
        throw ParseError(std::string("path JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Rough paths
// ---------------------------------------------------------------------------

inline json rough_to_json(const RoughPath& rp) {
    json j;
    j["base"] = path_to_json(rp.base());
    std::vector<std::vector<double>> blocks(rp.blocks().size());
    for (std::size_t k = 0; k < rp.blocks().size(); ++k) blocks[k] = rp.blocks()[k].data();
    j["second_level"] = blocks;  // row-major per consecutive interval
    j["p_exponent"] = rp.p_exponent();
    return j;
}

inline RoughPath rough_from_json(const json& j) {
    try {
        DiscretePath base = path_from_json(j.at("base"));
        auto raw = j.at("second_level").get<std::vector<std::vector<double>>>();
        std::size_t d = base.dimension();
        std::vector<Matrix> blocks;
        blocks.reserve(raw.size());
        for (auto& r : raw) blocks.emplace_back(d, d, std::move(r));
        double p = j.at("p_exponent").get<double>();
        return RoughPath(std::move(base), std::move(blocks), p);
    } catch (const json::exception& e) {
        throw ParseError(std::string("rough path JSON: ") + e.what());
    }
}

inline std::string rough_path_id(const RoughPath& rp) {
    return hex64(fnv1a64(rough_to_json(rp).dump()));
}

// ---------------------------------------------------------------------------
// Controlled paths
// ---------------------------------------------------------------------------

inline json controlled_to_json(const ControlledPath& cp) {
    json j;
    j["y"] = path_to_json(cp.y);
    j["y_prime"] = path_to_json(cp.y_prime);
    j["p"] = cp.p;
    j["q"] = cp.q;
    j["reference_id"] = rough_path_id(*cp.reference);
    return j;
}

inline ControlledPath controlled_from_json(const json& j,
                                           const std::shared_ptr<const RoughPath>& reference) {
    try {
        std::string id = j.at("reference_id").get<std::string>();
        if (id != rough_path_id(*reference))
            throw ReferenceError("controlled path JSON references a different rough path");
        return ControlledPath(path_from_json(j.at("y")), path_from_json(j.at("y_prime")),
                              reference, j.at("p").get<double>(), j.at("q").get<double>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("controlled path JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reports and diagnostics
// ---------------------------------------------------------------------------

inline json regularity_report_to_json(const RegularityReport& rep) {
    json j;
    j["functional_id"] = rep.functional_id;
    j["constants"] = {{"F", rep.f_lipschitz},
                      {"DF", rep.horizontal_lipschitz},
                      {"gradF", rep.vertical_lipschitz},
                      {"hess", rep.vertical2_lipschitz}};
    j["flags"] = {{"lipschitz_ok", rep.lipschitz_ok},
                  {"vertical_ok", rep.vertical_ok},
                  {"vertical_stable", rep.vertical_stable}};
    if (rep.has_remainder_slope) j["remainder_slope"] = rep.remainder_slope;
    j["probe_count"] = rep.probe_count;
    return j;
}

/// Per-interval norm diagnostics: one CSV row per consecutive grid interval.
inline std::string controlled_diagnostics_csv(const ControlledPath& cp) {
    std::ostringstream out;
    out << "t,s,y_increment,yprime_increment,remainder\n";
    for (std::size_t i = 0; i + 1 < cp.size(); ++i) {
        out << format_double(cp.y.time(i)) << "," << format_double(cp.y.time(i + 1)) << ","
            << format_double(norm2(cp.y.increment(i, i + 1))) << ","
            << format_double(norm2(cp.y_prime.increment(i, i + 1))) << ","
            << format_double(norm2(remainder(cp, i, i + 1))) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << content;
}

}  // namespace roughpath
