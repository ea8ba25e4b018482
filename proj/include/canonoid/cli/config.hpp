#pragma once

// Experiment configuration: JSON with "schema": 1.  Every validation failure
// is a ConfigError carrying the dotted path of the offending field.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "canonoid/dynamics.hpp"
#include "canonoid/errors.hpp"
#include "canonoid/expr.hpp"
#include "canonoid/geometry.hpp"
#include "canonoid/transform.hpp"

namespace canonoid::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline const std::array<std::string, 7> kAllChecks = {"canonical", "canonoid",   "traces",        "torsion",
                                                      "lenard",    "involution", "lie_derivative"};

struct Tolerances {
    double canonical = 1e-8;
    double canonoid = 1e-8;
    double drift = 1e-7;
    double torsion = 1e-10;
    double lenard = 1e-8;
    double involution = 1e-8;
    double lie_derivative = 1e-8;

    void set_all(double v) { canonical = canonoid = drift = torsion = lenard = involution = lie_derivative = v; }
};

struct TrajectorySpec {
    std::vector<double> x0;  // chart order
    std::pair<double, double> t_span;
    std::size_t steps = 0;
    Method method = Method::Rk4;
};

struct ExperimentConfig {
    std::string name;
    GeometryKind geometry;
    std::string hamiltonian_text;
    std::map<std::string, std::string> transform_text;
    std::vector<std::pair<double, double>> sample_box;  // chart order
    std::size_t sample_count = 200;
    std::uint64_t seed = 0;
    std::vector<std::string> checks;  // in canonical execution order
    std::size_t kmax = 4;
    std::optional<std::vector<double>> base_point;
    std::optional<TrajectorySpec> trajectory;
    Tolerances tolerances;
    json source;  // the validated document, used for hashing

    Expression hamiltonian() const { return parse(hamiltonian_text, geometry.names()); }
    TransformMap transform() const { return TransformMap::parse(geometry, transform_text); }
    bool wants(const std::string& check) const {
        return std::find(checks.begin(), checks.end(), check) != checks.end();
    }
    std::vector<double> base() const {
        if (base_point) return *base_point;
        std::vector<double> c;
        for (const auto& [lo, hi] : sample_box) c.push_back(0.5 * (lo + hi));
        return c;
    }
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key), "required field is missing");
    return obj.at(key);
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

inline std::uint64_t unsigned_int(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::string string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

inline const json& object(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path, "expected an object");
    return v;
}

inline std::pair<double, double> interval(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected [lo, hi]");
    const double lo = number(v[0], path + "[0]");
    const double hi = number(v[1], path + "[1]");
    if (!(lo <= hi)) throw ConfigError(path, "lower bound exceeds upper bound");
    return {lo, hi};
}

/// Per-coordinate values keyed by chart name.  With `fill`, missing names take
/// fill(name) when it returns a value.
template <class Value, class Read>
std::vector<Value> by_chart_name(const json& obj, const std::string& path, const std::vector<std::string>& names,
                                 Read read, const std::map<std::string, Value>& defaults = {}) {
    object(obj, path);
    for (const auto& [key, _] : obj.items())
        if (std::find(names.begin(), names.end(), key) == names.end())
            throw ConfigError(join(path, key), "not a coordinate of this chart");
    std::vector<Value> out;
    for (const auto& nm : names) {
        if (obj.contains(nm)) {
            out.push_back(read(obj.at(nm), join(path, nm)));
        } else if (auto it = defaults.find(nm); it != defaults.end()) {
            out.push_back(it->second);
        } else {
            throw ConfigError(join(path, nm), "coordinate is missing");
        }
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& doc) {
    using namespace detail;
    ExperimentConfig c;
    object(doc, "<root>");

    static const std::array<const char*, 13> known = {"schema",      "name",     "geometry", "hamiltonian", "transform",
                                                      "sample_box",  "sample_count", "seed", "checks",      "kmax",
                                                      "base_point",  "trajectory",   "tolerances"};
    for (const auto& [key, _] : doc.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown field");

    const auto schema = unsigned_int(require(doc, "", "schema"), "schema");
    if (schema != kSchemaVersion)
        throw ConfigError("schema", "unsupported schema version " + std::to_string(schema));

    if (doc.contains("name")) c.name = string(doc.at("name"), "name");

    const auto& geo = object(require(doc, "", "geometry"), "geometry");
    const auto kind_text = string(require(geo, "geometry", "kind"), "geometry.kind");
    const auto kind = kind_from_name(kind_text);
    if (!kind) throw ConfigError("geometry.kind", "unknown geometry '" + kind_text + "'");
    const auto n = unsigned_int(require(geo, "geometry", "n"), "geometry.n");
    if (n < 1 || n > 8) throw ConfigError("geometry.n", "degrees of freedom must be between 1 and 8");
    c.geometry = GeometryKind{*kind, static_cast<std::size_t>(n)};
    const auto names = c.geometry.names();

    c.hamiltonian_text = string(require(doc, "", "hamiltonian"), "hamiltonian");
    try {
        (void)c.hamiltonian();
    } catch (const Error& e) {
        throw ConfigError("hamiltonian", e.what());
    }

    const auto comps = by_chart_name<std::string>(require(doc, "", "transform"), "transform", names,
                                                  [](const json& v, const std::string& p) { return string(v, p); });
    for (std::size_t i = 0; i < names.size(); ++i) {
        c.transform_text[names[i]] = comps[i];
        try {
            (void)parse(comps[i], names);
        } catch (const Error& e) {
            throw ConfigError("transform." + names[i], e.what());
        }
    }
    try {
        (void)c.transform();
    } catch (const Error& e) {
        throw ConfigError("transform", e.what());
    }

    c.sample_box = by_chart_name<std::pair<double, double>>(require(doc, "", "sample_box"), "sample_box", names,
                                                            interval);

    if (doc.contains("sample_count")) {
        c.sample_count = unsigned_int(doc.at("sample_count"), "sample_count");
        if (c.sample_count < 1) throw ConfigError("sample_count", "must be at least 1");
    }
    c.seed = unsigned_int(require(doc, "", "seed"), "seed");

    if (doc.contains("checks")) {
        const auto& arr = doc.at("checks");
        if (!arr.is_array()) throw ConfigError("checks", "expected an array of check names");
        std::vector<std::string> asked;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto p = "checks[" + std::to_string(i) + "]";
            const auto s = string(arr[i], p);
            if (std::find(kAllChecks.begin(), kAllChecks.end(), s) == kAllChecks.end())
                throw ConfigError(p, "unknown check '" + s + "'");
            if (std::find(asked.begin(), asked.end(), s) != asked.end()) throw ConfigError(p, "duplicate check '" + s + "'");
            asked.push_back(s);
        }
        for (const auto& s : kAllChecks)
            if (std::find(asked.begin(), asked.end(), s) != asked.end()) c.checks.push_back(s);
    } else {
        c.checks.assign(kAllChecks.begin(), kAllChecks.end());
    }

    if (doc.contains("kmax")) {
        c.kmax = unsigned_int(doc.at("kmax"), "kmax");
        if (c.kmax < 1 || c.kmax > kMaxPower) throw ConfigError("kmax", "must be between 1 and 10");
    }

    if (doc.contains("base_point"))
        c.base_point = by_chart_name<double>(doc.at("base_point"), "base_point", names, number);

    if (doc.contains("trajectory")) {
        const auto& tj = object(doc.at("trajectory"), "trajectory");
        TrajectorySpec t;
        t.t_span = interval(require(tj, "trajectory", "t_span"), "trajectory.t_span");
        if (!(t.t_span.second > t.t_span.first)) throw ConfigError("trajectory.t_span", "span must be increasing");
        std::map<std::string, double> defaults;
        if (c.geometry.has_time()) defaults["t"] = t.t_span.first;
        t.x0 = by_chart_name<double>(require(tj, "trajectory", "x0"), "trajectory.x0", names, number, defaults);
        if (c.geometry.has_time() && t.x0[c.geometry.t()] != t.t_span.first)
            throw ConfigError("trajectory.x0.t", "must equal the start of t_span");
        t.steps = unsigned_int(require(tj, "trajectory", "steps"), "trajectory.steps");
        if (t.steps < 1) throw ConfigError("trajectory.steps", "must be at least 1");
        if (tj.contains("method")) {
            const auto m = string(tj.at("method"), "trajectory.method");
            if (m == "rk4") t.method = Method::Rk4;
            else if (m == "rk45") t.method = Method::Rk45;
            else throw ConfigError("trajectory.method", "expected \"rk4\" or \"rk45\"");
        }
        for (const auto& [key, _] : tj.items())
            if (key != "x0" && key != "t_span" && key != "steps" && key != "method")
                throw ConfigError("trajectory." + key, "unknown field");
        c.trajectory = std::move(t);
    }
    if (c.wants("traces") && !c.trajectory)
        throw ConfigError("trajectory", "the traces check needs a trajectory");

    if (doc.contains("tolerances")) {
        const auto& tol = object(doc.at("tolerances"), "tolerances");
        const std::map<std::string, double*> slots = {
            {"canonical", &c.tolerances.canonical}, {"canonoid", &c.tolerances.canonoid},
            {"drift", &c.tolerances.drift},         {"torsion", &c.tolerances.torsion},
            {"lenard", &c.tolerances.lenard},       {"involution", &c.tolerances.involution},
            {"lie_derivative", &c.tolerances.lie_derivative}};
        for (const auto& [key, v] : tol.items()) {
            auto it = slots.find(key);
            if (it == slots.end()) throw ConfigError("tolerances." + key, "unknown tolerance");
            const double x = number(v, "tolerances." + key);
            if (!(x > 0.0)) throw ConfigError("tolerances." + key, "must be positive");
            *it->second = x;
        }
    }

    c.source = doc;
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

struct Overrides {
    std::optional<std::size_t> kmax;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
};

/// Command-line flags win over the file; the hashed document reflects them.
inline void apply_overrides(ExperimentConfig& c, const Overrides& o) {
    if (o.kmax) {
        if (*o.kmax < 1 || *o.kmax > kMaxPower) throw ConfigError("kmax", "must be between 1 and 10");
        c.kmax = *o.kmax;
        c.source["kmax"] = c.kmax;
    }
    if (o.tol) {
        if (!(*o.tol > 0.0)) throw ConfigError("tolerances", "--tol must be positive");
        c.tolerances.set_all(*o.tol);
        c.source["tolerances"] = json{{"canonical", *o.tol}, {"canonoid", *o.tol},   {"drift", *o.tol},
                                      {"torsion", *o.tol},   {"lenard", *o.tol},     {"involution", *o.tol},
                                      {"lie_derivative", *o.tol}};
    }
    if (o.seed) {
        c.seed = *o.seed;
        c.source["seed"] = c.seed;
    }
}

/// FNV-1a 64 over the compact dump (keys sorted by nlohmann's ordered map).
inline std::string config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : c.source.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace canonoid::cli
