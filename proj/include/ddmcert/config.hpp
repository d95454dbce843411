#pragma once

// Run configuration: flat key=value files with '#' comments, overridden by
// command-line values.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "ddmcert/core.hpp"
#include "ddmcert/mesh.hpp"
#include "ddmcert/pipeline.hpp"
#include "ddmcert/schwarz.hpp"

namespace ddmcert {

enum class Preset { lshape, rect };

struct RunConfig {
    Preset preset = Preset::lshape;
    double h = 0.25;
    double coarse_h = 0.25;
    int sweeps = 16;
    SchwarzMode mode = SchwarzMode::multiplicative;
    EpsPolicy eps = EpsPolicy::fixed;
    std::string out = "out";
    bool emit_fields = false;
    int m = 2;  ///< rect preset cells in x
    int n = 2;  ///< rect preset cells in y
};

/// Values that may come from a file or from flags; unset entries keep the
/// lower-priority source.
struct ConfigValues {
    std::optional<std::string> preset, h, coarse_h, sweeps, mode, eps, out, emit_fields, m, n;

    void merge_from(const ConfigValues& o) {
        auto take = [](std::optional<std::string>& a, const std::optional<std::string>& b) {
            if (b) a = b;
        };
        take(preset, o.preset);
        take(h, o.h);
        take(coarse_h, o.coarse_h);
        take(sweeps, o.sweeps);
        take(mode, o.mode);
        take(eps, o.eps);
        take(out, o.out);
        take(emit_fields, o.emit_fields);
        take(m, o.m);
        take(n, o.n);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Accepts decimals and fractions such as "1/16".
inline double parse_length(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (const auto slash = v.find('/'); slash != std::string::npos) {
            const double num = std::stod(v.substr(0, slash), &used);
            if (used != slash) throw std::invalid_argument(v);
            const std::string rest = v.substr(slash + 1);
            const double den = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument(v);
            return num / den;
        }
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid value for " + key + ": '" + v + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

inline Index divisions_or_throw(double x, const char* key) {
    try {
        return grid_divisions(x, key);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace detail

inline ConfigValues parse_config_text(std::istream& in, const std::string& source = "config") {
    ConfigValues c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key == "preset") c.preset = val;
        else if (key == "h") c.h = val;
        else if (key == "H") c.coarse_h = val;
        else if (key == "sweeps") c.sweeps = val;
        else if (key == "mode") c.mode = val;
        else if (key == "eps") c.eps = val;
        else if (key == "out") c.out = val;
        else if (key == "emit_fields") c.emit_fields = val;
        else if (key == "m") c.m = val;
        else if (key == "n") c.n = val;
        else throw ConfigError(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return c;
}

inline ConfigValues parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config_text(in, path);
}

/// Validated configuration; H defaults to h.
inline RunConfig resolve_config(const ConfigValues& v) {
    RunConfig c;
    if (v.preset) {
        if (*v.preset == "lshape") c.preset = Preset::lshape;
        else if (*v.preset == "rect") c.preset = Preset::rect;
        else throw ConfigError("unknown preset '" + *v.preset + "'");
    }
    if (v.h) c.h = detail::parse_length("h", *v.h);
    c.coarse_h = v.coarse_h ? detail::parse_length("H", *v.coarse_h) : c.h;
    if (v.sweeps) c.sweeps = detail::parse_int("sweeps", *v.sweeps);
    if (v.mode) {
        if (*v.mode == "multiplicative") c.mode = SchwarzMode::multiplicative;
        else if (*v.mode == "additive") c.mode = SchwarzMode::additive;
        else throw ConfigError("unknown mode '" + *v.mode + "'");
    }
    if (v.eps) {
        if (*v.eps == "fixed") c.eps = EpsPolicy::fixed;
        else if (*v.eps == "opt" || *v.eps == "optimized") c.eps = EpsPolicy::optimized;
        else throw ConfigError("unknown eps policy '" + *v.eps + "'");
    }
    if (v.out) c.out = *v.out;
    if (v.emit_fields) c.emit_fields = detail::parse_bool("emit_fields", *v.emit_fields);
    if (v.m) c.m = detail::parse_int("m", *v.m);
    if (v.n) c.n = detail::parse_int("n", *v.n);

    const Index nh = detail::divisions_or_throw(c.h, "h");
    const Index nH = detail::divisions_or_throw(c.coarse_h, "H");
    if (nH > nh) throw ConfigError("H must be >= h");
    if (nh % nH != 0) throw ConfigError("H must be an integer multiple of h");
    if (c.sweeps < 1) throw ConfigError("sweeps must be >= 1");
    if (c.m < 1 || c.n < 1) throw ConfigError("m and n must be >= 1");
    return c;
}

}  // namespace ddmcert
