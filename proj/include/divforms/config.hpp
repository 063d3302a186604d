#pragma once

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arith.hpp"
#include "divisor_sums.hpp"
#include "errors.hpp"
#include "forms.hpp"
#include "rational.hpp"
#include "region.hpp"

namespace divforms {

using Json = nlohmann::ordered_json;

// strictly increasing scales
struct GridSpec {
    std::vector<long double> values;

    static GridSpec geometric(long double start, long double stop, long double factor) {
        if (!(start > 0) || !(stop >= start)) throw ConfigError("grid: need 0 < start <= stop");
        if (!(factor > 1)) throw ConfigError("grid: factor must exceed 1");
        GridSpec g;
        for (long double v = start; v <= stop * (1 + 1e-12L); v *= factor) g.values.push_back(v);
        return g;
    }

    // "start:stop:factor"
    static GridSpec parse(const std::string& s) {
        std::vector<long double> parts;
        std::stringstream in(s);
        std::string item;
        while (std::getline(in, item, ':')) {
            try {
                std::size_t used = 0;
                parts.push_back(std::stold(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("grid: cannot read '" + item + "' in '" + s + "'");
            }
        }
        if (parts.size() != 3) throw ConfigError("grid: expected start:stop:factor, got '" + s + "'");
        return geometric(parts[0], parts[1], parts[2]);
    }

    void check(std::size_t min_len = 1) const {
        if (values.size() < min_len)
            throw ConfigError("grid: need at least " + std::to_string(min_len) + " points, got " + std::to_string(values.size()));
        for (std::size_t i = 1; i < values.size(); ++i)
            if (!(values[i] > values[i - 1])) throw ConfigError("grid: values must be strictly increasing");
    }

    std::vector<i64> integers() const {
        std::vector<i64> out;
        for (long double v : values) {
            long double r = std::round(v);
            if (std::fabs(v - r) > 1e-9L * std::max(1.0L, r)) throw ConfigError("grid: expected integer scales");
            out.push_back(i64(r));
        }
        return out;
    }
};

namespace config {

inline Json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

// an integer, or a string "p/q"
inline Rational rational(const Json& j, const char* what) {
    try {
        if (j.is_number_integer()) return Rational(j.get<i64>());
        if (j.is_string()) return Rational::parse(j.get<std::string>());
    } catch (const Error& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
    throw ConfigError(std::string(what) + ": expected an integer or a \"p/q\" string");
}

inline i64 integer(const Json& j, const char* what) {
    if (!j.is_number_integer()) throw ConfigError(std::string(what) + ": expected an integer");
    return j.get<i64>();
}

inline long double real(const Json& j, const char* what) {
    if (!j.is_number()) throw ConfigError(std::string(what) + ": expected a number");
    return j.get<long double>();
}

inline Triple triple(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + ": expected 3 integers");
    return {integer(j[0], what), integer(j[1], what), integer(j[2], what)};
}

inline FormTriple forms(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("forms: expected [[a,b],[a,b],[a,b]]");
    std::array<LinearForm, 3> f;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_array() || j[i].size() != 2) throw ConfigError("forms: each form is a pair [a,b]");
        f[i] = {integer(j[i][0], "forms"), integer(j[i][1], "forms")};
    }
    try {
        return FormTriple(f);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("forms: ") + e.what());
    }
}

inline std::vector<QPoint> vertices(const Json& j) {
    if (!j.is_array()) throw ConfigError("region: vertices must be a list of [x,y]");
    std::vector<QPoint> v;
    for (auto& p : j) {
        if (!p.is_array() || p.size() != 2) throw ConfigError("region: each vertex is [x,y]");
        v.push_back({rational(p[0], "vertex"), rational(p[1], "vertex")});
    }
    return v;
}

inline std::vector<bool> open_edges(const Json& j, std::size_t n) {
    std::vector<bool> o(n, false);
    if (j.is_null()) return o;
    if (!j.is_array()) throw ConfigError("region: open must be a list");
    for (auto& e : j) {
        i64 k = integer(e, "open edge");
        if (k < 0 || std::size_t(k) >= n) throw ConfigError("region: open edge index out of range");
        o[std::size_t(k)] = true;
    }
    return o;
}

// {"kind":"rect","x":[x0,x1],"y":[y0,y1],"open":["left",...]}
// {"kind":"triangle"|"polygon","vertices":[[x,y],...],"open":[edge indices]}
// {"kind":"union","pieces":[region,...]}
// {"kind":"unit"}: (0,1]^2
inline Region region(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("region: expected an object with a kind");
    std::string kind = j["kind"].get<std::string>();
    try {
        if (kind == "unit") return Region::positive_unit_square();
        if (kind == "rect") {
            if (!j.contains("x") || !j.contains("y") || j["x"].size() != 2 || j["y"].size() != 2)
                throw ConfigError("region: rect needs x:[x0,x1] and y:[y0,y1]");
            std::vector<std::string> open;
            if (j.contains("open"))
                for (auto& s : j["open"]) open.push_back(s.get<std::string>());
            return Region::rect(rational(j["x"][0], "x0"), rational(j["x"][1], "x1"), rational(j["y"][0], "y0"),
                                rational(j["y"][1], "y1"), open);
        }
        if (kind == "triangle" || kind == "polygon") {
            auto v = vertices(j.value("vertices", Json::array()));
            auto o = open_edges(j.contains("open") ? j["open"] : Json(), v.size());
            if (kind == "triangle") {
                if (v.size() != 3) throw ConfigError("region: a triangle has 3 vertices");
                return Region::triangle(v[0], v[1], v[2], o);
            }
            return Region::polygon(v, o);
        }
        if (kind == "union") {
            std::vector<Region> parts;
            for (auto& p : j.value("pieces", Json::array())) parts.push_back(region(p));
            return Region::union_of(parts);
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("region: ") + e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("region: ") + e.what());
    }
    throw ConfigError("region: unknown kind '" + kind + "'");
}

// a "start:stop:factor" string, {"start":..,"stop":..,"factor":..}, or a list
inline GridSpec grid(const Json& j) {
    if (j.is_string()) return GridSpec::parse(j.get<std::string>());
    GridSpec g;
    if (j.is_array()) {
        for (auto& v : j) g.values.push_back(real(v, "grid"));
    } else if (j.is_object()) {
        g = GridSpec::geometric(real(j.at("start"), "grid.start"), real(j.at("stop"), "grid.stop"),
                                real(j.at("factor"), "grid.factor"));
    } else {
        throw ConfigError("grid: expected a string, list, or object");
    }
    g.check();
    return g;
}

inline ValuePolicy policy(const Json& j) {
    ValuePolicy p;
    if (j.is_null()) return p;
    p.skip_zeros = j.value("skip_zeros", false);
    p.absolute_values = j.value("absolute_values", false);
    return p;
}

}  // namespace config
}  // namespace divforms
