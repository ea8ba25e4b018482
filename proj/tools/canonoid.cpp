// canonoid: batch front end.
//
//   canonoid check      --config cfg.json [--out dir]   structural checks -> check.json
//   canonoid integrate  --config cfg.json               trajectory.csv, integrate.json
//   canonoid invariants --config cfg.json --kmax 4      invariants.csv, invariants.json
//   canonoid report     --out dir                       merge the above -> report.json
//   canonoid run        --config cfg.json               all of the above
//
// Exit status: 0 all checks pass, 1 some check failed, 2 error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "canonoid/cli/config.hpp"
#include "canonoid/cli/runner.hpp"

namespace fs = std::filesystem;
using canonoid::cli::json;

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw canonoid::Error("cannot write '" + p.string() + "'");
    out << text;
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::size_t> kmax;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
};

canonoid::cli::ExperimentConfig load(const Options& o) {
    auto cfg = canonoid::cli::load_config(o.config);
    canonoid::cli::apply_overrides(cfg, {o.kmax, o.tol, o.seed});
    return cfg;
}

int do_check(const Options& o) {
    const auto section = canonoid::cli::run_checks(load(o));
    write_json(fs::path(o.out) / "check.json", section);
    for (const auto& [name, c] : section.at("checks").items())
        std::cout << name << ": " << c.at("verdict").get<std::string>() << "\n";
    return canonoid::cli::all_pass(section) ? 0 : 1;
}

int do_integrate(const Options& o) {
    const auto r = canonoid::cli::run_integrate(load(o));
    write_file(fs::path(o.out) / "trajectory.csv", canonoid::cli::to_csv(r.table));
    write_json(fs::path(o.out) / "integrate.json", r.section);
    std::cout << "trajectory: " << r.table.rows.size() << " states\n";
    return 0;
}

int do_invariants(const Options& o) {
    const auto r = canonoid::cli::run_invariants(load(o));
    write_file(fs::path(o.out) / "invariants.csv", canonoid::cli::to_csv(r.table));
    write_json(fs::path(o.out) / "invariants.json", r.section);
    std::cout << "traces: " << r.section.at("checks").at("traces").at("verdict").get<std::string>() << "\n";
    return canonoid::cli::all_pass(r.section) ? 0 : 1;
}

int do_report(const Options& o) {
    std::vector<json> parts;
    for (const char* name : {"check.json", "integrate.json", "invariants.json"}) {
        const auto p = fs::path(o.out) / name;
        if (fs::exists(p)) parts.push_back(read_json(p));
    }
    const auto merged = canonoid::cli::merge_sections(parts);
    write_json(fs::path(o.out) / "report.json", merged);
    std::cout << "overall: " << merged.at("overall").get<std::string>() << "\n";
    return merged.at("overall") == "pass" ? 0 : 1;
}

int do_run(const Options& o) {
    const auto cfg = load(o);
    for (const char* stale : {"check.json", "integrate.json", "invariants.json", "report.json"})
        fs::remove(fs::path(o.out) / stale);
    int worst = do_check(o);
    if (cfg.trajectory) {
        do_integrate(o);
        if (cfg.wants("traces")) worst = std::max(worst, do_invariants(o));
    }
    return std::max(worst, do_report(o));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks of canonical and canonoid transformations"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", o.config, "experiment configuration (JSON)");
        if (needs_config) c->required();
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--kmax", o.kmax, "highest power of S to trace (1..10)");
        sub->add_option("--tol", o.tol, "override every tolerance");
        sub->add_option("--seed", o.seed, "override the sampling seed");
    };
    auto* check = app.add_subcommand("check", "structural checks on sampled points");
    auto* integ = app.add_subcommand("integrate", "integrate the trajectory and write it as CSV");
    auto* inv = app.add_subcommand("invariants", "integrate and measure drift of tr(S^k)");
    auto* rep = app.add_subcommand("report", "merge earlier outputs into report.json");
    auto* run = app.add_subcommand("run", "check, integrate, invariants and report in one go");
    add_common(check, true);
    add_common(integ, true);
    add_common(inv, true);
    add_common(rep, false);
    add_common(run, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string started = utc_now();
    int status = 2;
    std::string error;
    try {
        fs::create_directories(o.out);
        if (*check) status = do_check(o);
        else if (*integ) status = do_integrate(o);
        else if (*inv) status = do_invariants(o);
        else if (*rep) status = do_report(o);
        else if (*run) status = do_run(o);
    } catch (const std::exception& e) {
        error = e.what();
        std::cerr << "error: " << e.what() << "\n";
        status = 2;
    }

    try {
        json meta{{"started", started}, {"finished", utc_now()}, {"subcommand", app.get_subcommands().front()->get_name()},
                  {"exit_code", status}};
        if (!error.empty()) meta["error"] = error;
        write_json(fs::path(o.out) / "run_meta.json", meta);
    } catch (const std::exception&) {
        // the output directory may be the thing that failed
    }
    return status;
}
