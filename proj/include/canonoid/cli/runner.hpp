#pragma once

// Executes the checks of an ExperimentConfig and shapes the results as JSON
// sections and CSV tables.  Everything here is deterministic given the
// config; wall-clock data lives in the CLI's run_meta.json only.

#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "canonoid/canonoid.hpp"
#include "canonoid/cli/config.hpp"

namespace canonoid::cli {

inline constexpr const char* kToolName = "canonoid";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr std::size_t kReportedKSamples = 5;

inline json header(const ExperimentConfig& c) {
    return json{{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
                {"config", {{"name", c.name}, {"hash", config_hash(c)}}},
                {"geometry", {{"kind", kind_name(c.geometry.kind)}, {"n", c.geometry.n}}},
                {"samples", {{"count", c.sample_count}, {"seed", c.seed}}}};
}

inline json verdict(bool pass, double residual, double tol) {
    return json{{"verdict", pass ? "pass" : "fail"}, {"residual", residual}, {"tolerance", tol}};
}

inline json not_applicable(const std::string& reason, std::optional<double> residual = std::nullopt) {
    json j{{"verdict", "not-applicable"}, {"reason", reason}, {"residual", nullptr}};
    if (residual) j["residual"] = *residual;
    return j;
}

struct CheckContext {
    const ExperimentConfig& cfg;
    TransformMap f;
    Expression h;
    std::vector<std::vector<double>> samples;
    std::optional<double> torsion_max;
};

inline json check_canonical_json(CheckContext& ctx) {
    const auto v = check_canonical(ctx.f, ctx.samples, ctx.cfg.tolerances.canonical);
    return verdict(v.canonical, v.max_residual, ctx.cfg.tolerances.canonical);
}

inline json check_canonoid_json(CheckContext& ctx) {
    const auto& g = ctx.cfg.geometry;
    const double tol = ctx.cfg.tolerances.canonoid;
    const auto base = ctx.cfg.base();
    const auto v = check_canonoid(ctx.f, ctx.h, ctx.samples, tol, base);
    json j = verdict(v.canonoid, std::max(v.max_residual, v.max_eta_residual), tol);
    j["closedness_or_two_form_residual"] = v.max_residual;
    if (g.has_time()) j["eta_residual"] = v.max_eta_residual;
    if (!g.is_poisson()) j["max_reeb_condition"] = v.max_reeb_condition;
    j["scope"] = "sampled region";
    if (g.is_poisson()) {
        j["k_gauge"] = g.has_time() ? "K = 0 on the x-block slice of base_point at each t; chart taken star-shaped"
                                    : "K(base_point) = 0; chart taken star-shaped around base_point";
        j["base_point"] = base;
    }
    json ks = json::array();
    for (std::size_t i = 0; i < std::min(kReportedKSamples, v.k_probe.size()); ++i)
        ks.push_back({{"x", ctx.samples[i]}, {"K", v.k_probe[i]}, {"H", eval<double>(ctx.h, ctx.samples[i])}});
    j["k_samples"] = ks;
    return j;
}

inline double torsion_max(CheckContext& ctx) {
    if (!ctx.torsion_max) {
        double m = 0.0;
        for (const auto& x : ctx.samples) m = std::max(m, nijenhuis_torsion(ctx.f, x).max_abs());
        ctx.torsion_max = m;
    }
    return *ctx.torsion_max;
}

inline json check_torsion_json(CheckContext& ctx) {
    const double m = torsion_max(ctx);
    json j = verdict(m <= ctx.cfg.tolerances.torsion, m, ctx.cfg.tolerances.torsion);
    j["indices"] = "x-block";
    return j;
}

inline json check_lenard_json(CheckContext& ctx) {
    const std::size_t kmax = std::min<std::size_t>(ctx.cfg.kmax, kMaxPower - 1);
    json per_k = json::array();
    double worst = 0.0;
    for (std::size_t k = 1; k <= kmax; ++k) {
        double m = 0.0;
        for (const auto& x : ctx.samples) m = std::max(m, lenard_identity_residual(ctx.f, x, k));
        per_k.push_back(m);
        worst = std::max(worst, m);
    }
    json j = verdict(worst <= ctx.cfg.tolerances.lenard, worst, ctx.cfg.tolerances.lenard);
    j["per_k"] = per_k;
    j["indices"] = "x-block";
    return j;
}

inline json matrix_json(const Matrix<double>& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(r);
    }
    return rows;
}

inline json check_involution_json(CheckContext& ctx) {
    const auto& g = ctx.cfg.geometry;
    if (!g.is_poisson()) return not_applicable("involution of traces is stated for Poisson kinds only");
    const auto r = involution_matrix(ctx.f, ctx.samples, ctx.cfg.kmax);
    const bool any_barred = r.skipped < ctx.samples.size();
    const double worst = std::max(max_abs(r.unbarred), any_barred ? max_abs(r.barred) : 0.0);
    const double tmax = torsion_max(ctx);
    const double tol = ctx.cfg.tolerances.involution;
    json j;
    if (tmax <= ctx.cfg.tolerances.torsion || worst <= tol) {
        j = verdict(worst <= tol, worst, tol);
    } else {
        j = not_applicable("torsion does not vanish on the samples, involution is not implied", worst);
        j["tolerance"] = tol;
    }
    j["unbarred"] = matrix_json(r.unbarred);
    if (any_barred) j["barred"] = matrix_json(r.barred);
    j["skipped_points"] = r.skipped;
    j["max_condition"] = r.max_condition;
    j["trace_gradient_rank"] = r.max_trace_rank;
    j["max_torsion"] = tmax;
    return j;
}

inline json check_lie_json(CheckContext& ctx) {
    const auto& g = ctx.cfg.geometry;
    double worst = 0.0;
    for (const auto& x : ctx.samples) {
        auto l = lie_derivative_S(ctx.f, ctx.h, x);
        if (g.kind == Kind::Cosymplectic) {
            const auto col = cosymplectic_lie_column(ctx.f, ctx.h, x);
            for (std::size_t a = 0; a < g.dimension(); ++a) l(a, g.t()) -= col[a];
        }
        worst = std::max(worst, max_abs(l));
    }
    json j = verdict(worst <= ctx.cfg.tolerances.lie_derivative, worst, ctx.cfg.tolerances.lie_derivative);
    j["expected"] = g.kind == Kind::Cosymplectic ? "only the dt column, equal to eps^{va} d_t dK/dx^v" : "zero";
    return j;
}

/// Runs `name`, prefixing any library error with the check's name.
template <class Fn>
json run_named(const std::string& name, Fn fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw Error("check '" + name + "' failed to run: " + e.what());
    }
}

/// The structural checks (everything requested except traces).
inline json run_checks(const ExperimentConfig& cfg) {
    CheckContext ctx{cfg, cfg.transform(), cfg.hamiltonian(), sample_box(cfg.sample_box, cfg.sample_count, cfg.seed), {}};
    json checks = json::object();
    for (const auto& name : cfg.checks) {
        if (name == "canonical") checks[name] = run_named(name, [&] { return check_canonical_json(ctx); });
        else if (name == "canonoid") checks[name] = run_named(name, [&] { return check_canonoid_json(ctx); });
        else if (name == "torsion") checks[name] = run_named(name, [&] { return check_torsion_json(ctx); });
        else if (name == "lenard") checks[name] = run_named(name, [&] { return check_lenard_json(ctx); });
        else if (name == "involution") checks[name] = run_named(name, [&] { return check_involution_json(ctx); });
        else if (name == "lie_derivative") checks[name] = run_named(name, [&] { return check_lie_json(ctx); });
    }
    json out = header(cfg);
    out["checks"] = checks;
    out["notes"] = json::array({"verdicts hold on the sampled region only"});
    return out;
}

// ------------------------------------------------------------------ tables

struct Table {
    std::vector<std::string> columns;  // first is "time"
    std::vector<std::vector<double>> rows;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += format_double(r[i]);
        }
        out += '\n';
    }
    return out;
}

inline Trajectory run_trajectory(const ExperimentConfig& cfg) {
    if (!cfg.trajectory) throw ConfigError("trajectory", "required for integration");
    const auto& t = *cfg.trajectory;
    try {
        return integrate(cfg.geometry, cfg.hamiltonian(), t.x0, t.t_span, t.steps, t.method);
    } catch (const Error& e) {
        throw Error(std::string("integration failed: ") + e.what());
    }
}

inline json drift_json(const ObservableDrift& d) {
    return json{{"initial", d.initial},
                {"max_abs_drift", d.max_abs_drift},
                {"max_rel_drift", d.max_rel_drift},
                {"slope", d.slope}};
}

inline json trajectory_json(const ExperimentConfig& cfg) {
    const auto& t = *cfg.trajectory;
    return json{{"method", method_name(t.method)}, {"steps", t.steps}, {"t_span", {t.t_span.first, t.t_span.second}},
                {"x0", t.x0}};
}

struct IntegrateResult {
    json section;
    Table table;
};

/// Trajectory in chart coordinates plus H, and the drift of H.
inline IntegrateResult run_integrate(const ExperimentConfig& cfg) {
    const auto tr = run_trajectory(cfg);
    const auto h = cfg.hamiltonian();
    const auto rep = drift_report(tr, {{"H", expression_observable(h)}});
    IntegrateResult r;
    r.table.columns.push_back("time");
    for (const auto& nm : cfg.geometry.names()) r.table.columns.push_back(nm);
    r.table.columns.push_back("H");
    const auto& hv = rep.at("H").values;
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        std::vector<double> row{tr.times[i]};
        row.insert(row.end(), tr.states[i].begin(), tr.states[i].end());
        row.push_back(hv[i]);
        r.table.rows.push_back(std::move(row));
    }
    r.section = header(cfg);
    r.section["trajectory"] = trajectory_json(cfg);
    r.section["hamiltonian_drift"] = drift_json(rep.at("H"));
    return r;
}

/// Drift of tr(S^k), k = 1..kmax, along the configured trajectory.
inline IntegrateResult run_invariants(const ExperimentConfig& cfg) {
    const auto tr = run_trajectory(cfg);
    const auto f = cfg.transform();
    std::vector<std::pair<std::string, Observable>> obs;
    for (std::size_t k = 1; k <= cfg.kmax; ++k) obs.emplace_back("trS" + std::to_string(k), trace_observable(f, k));
    DriftReport rep;
    try {
        rep = drift_report(tr, obs);
    } catch (const Error& e) {
        throw Error(std::string("check 'traces' failed to run: ") + e.what());
    }

    IntegrateResult r;
    r.table.columns.push_back("time");
    for (const auto& o : rep.observables) r.table.columns.push_back(o.name);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::vector<double> row{tr.times[i]};
        for (const auto& o : rep.observables) row.push_back(o.values[i]);
        r.table.rows.push_back(std::move(row));
    }

    double worst = 0.0;
    json table = json::object();
    for (const auto& o : rep.observables) {
        worst = std::max(worst, o.max_rel_drift);
        table[o.name] = drift_json(o);
    }
    json traces = verdict(worst <= cfg.tolerances.drift, worst, cfg.tolerances.drift);
    traces["residual_kind"] = "max relative drift";
    traces["drift"] = table;
    r.section = header(cfg);
    r.section["trajectory"] = trajectory_json(cfg);
    r.section["checks"] = json{{"traces", traces}};
    return r;
}

// ------------------------------------------------------------------ report

/// True when no check in the section has verdict "fail".
inline bool all_pass(const json& section) {
    if (!section.contains("checks")) return true;
    for (const auto& [_, c] : section.at("checks").items())
        if (c.at("verdict") == "fail") return false;
    return true;
}

/// Merges check / integrate / invariants sections (any subset, same config).
inline json merge_sections(const std::vector<json>& parts) {
    if (parts.empty()) throw Error("report: nothing to merge, run check, integrate or invariants first");
    json out = json::object();
    json checks = json::object();
    for (const auto& p : parts) {
        if (!out.empty() && out.at("config") != p.at("config"))
            throw Error("report: sections come from different configurations");
        for (const auto& key : {"tool", "config", "geometry", "samples"}) out[key] = p.at(key);
        if (p.contains("checks"))
            for (const auto& [name, c] : p.at("checks").items()) checks[name] = c;
        for (const auto& key : {"trajectory", "hamiltonian_drift", "notes"})
            if (p.contains(key)) out[key] = p.at(key);
    }
    out["checks"] = checks;
    out["overall"] = all_pass(out) ? "pass" : "fail";
    return out;
}

}  // namespace canonoid::cli
