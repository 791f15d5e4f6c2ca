#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lambdacoal/runner.hpp"
#include "lambdacoal/version.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    return out;
}

std::string read_config_file(const std::string& path) {
    if (path.empty()) return "{}";
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open config file " << path << "\n";
        std::exit(lambdacoal::runner::kUsage);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Flags shared by the run-producing subcommands.
struct CommonFlags {
    std::string config_file;
    std::string out;
    std::string format;
    unsigned jobs = 0;

    void attach(CLI::App* app, bool with_format, bool with_jobs) {
        app->add_option("--config", config_file, "JSON config file (flags override it)");
        app->add_option("--out", out, "output directory (created if missing)");
        if (with_format)
            app->add_option("--format", format)
                ->description("output format: text | json")
                ->check(CLI::IsMember({"text", "json"}));
        if (with_jobs) app->add_option("--jobs", jobs, "worker threads");
    }

    void apply(json& overrides) const {
        if (!out.empty()) overrides["out"] = out;
        if (!format.empty()) overrides["format"] = format;
        if (jobs > 0) overrides["jobs"] = jobs;
    }
};

int execute(const std::string& command, const std::string& config_file, json overrides) {
    using namespace lambdacoal::runner;
    std::string resolved;
    try {
        resolved = resolve_config(command, read_config_file(config_file), overrides.dump());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
    return run_command(command, resolved, std::cout, std::cerr);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lambdacoal: Lambda-coalescent simulation, classification, and "
                 "compactness diagnostics"};
    app.set_version_flag("--version", lambdacoal::kVersion);
    app.require_subcommand(1);

    // classify
    auto* classify = app.add_subcommand("classify", "analytic classification of a measure");
    std::string cl_measure;
    long cl_bmax = 0;
    CommonFlags cl_common;
    classify->add_option("--measure", cl_measure, "measure spec, e.g. kingman, beta:0.5,1.5");
    classify->add_option("--bmax", cl_bmax, "series-test block-count cutoff");
    cl_common.attach(classify, true, true);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "simulate coalescent histories");
    std::string si_measure, si_scheme;
    int si_n = 0, si_replicates = 0;
    double si_horizon = -1.0, si_xmin = -1.0;
    std::uint64_t si_seed = 0;
    bool si_seed_set = false;
    CommonFlags si_common;
    simulate->add_option("--measure", si_measure, "measure spec");
    simulate->add_option("--n", si_n, "initial number of lines");
    simulate->add_option("--horizon", si_horizon, "stop time (default: run to absorption)");
    simulate->add_option("--replicates", si_replicates, "number of histories");
    simulate->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { si_seed = v; si_seed_set = true; }, "master seed");
    simulate->add_option("--scheme", si_scheme, "gillespie | poisson | auto")
        ->check(CLI::IsMember({"gillespie", "poisson", "auto"}));
    simulate->add_option("--x-min", si_xmin, "poisson cutoff in (0,1)");
    si_common.attach(simulate, false, true);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "geometric functionals of a history file");
    std::string an_history, an_eps, an_delta;
    int an_sample_m = -1;
    std::uint64_t an_seed = 0;
    bool an_seed_set = false, an_allow_censored = false;
    CommonFlags an_common;
    analyze->add_option("--history", an_history, "history JSON file from `simulate`");
    analyze->add_option("--eps-grid", an_eps, "comma-separated eps grid");
    analyze->add_option("--delta-grid", an_delta, "comma-separated delta grid");
    analyze->add_option("--sample-m", an_sample_m, "also export an m-point distance matrix");
    analyze->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { an_seed = v; an_seed_set = true; }, "sampling seed");
    analyze->add_flag("--allow-censored", an_allow_censored,
                      "accept censored trees (lower-bound semantics)");
    an_common.attach(analyze, false, false);

    // report
    auto* report = app.add_subcommand("report", "full compactness diagnostics for a measure");
    std::string re_measure, re_scheme, re_ngrid, re_eps, re_delta, re_eta, re_thin;
    int re_replicates = 0;
    long re_bmax = 0;
    std::uint64_t re_seed = 0;
    bool re_seed_set = false;
    CommonFlags re_common;
    report->add_option("--measure", re_measure, "measure spec");
    report->add_option("--n-grid", re_ngrid, "comma-separated n grid, increasing");
    report->add_option("--eps-grid", re_eps, "comma-separated eps grid");
    report->add_option("--delta-grid", re_delta, "comma-separated delta grid (local probe)");
    report->add_option("--eta-grid", re_eta, "comma-separated eta grid (local probe)");
    report->add_option("--thin-delta-grid", re_thin, "comma-separated thin-point delta grid");
    report->add_option("--replicates", re_replicates, "replicates per grid cell");
    report->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { re_seed = v; re_seed_set = true; }, "master seed");
    report->add_option("--scheme", re_scheme, "gillespie | poisson | auto")
        ->check(CLI::IsMember({"gillespie", "poisson", "auto"}));
    report->add_option("--bmax", re_bmax, "series-test block-count cutoff");
    re_common.attach(report, true, true);

    // reproduce
    auto* reproduce = app.add_subcommand("reproduce", "re-run a manifest and verify digests");
    std::string rp_manifest;
    reproduce->add_option("manifest", rp_manifest, "path to manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : lambdacoal::runner::kUsage;
    }

    if (classify->parsed()) {
        json o = json::object();
        if (!cl_measure.empty()) o["measure"] = cl_measure;
        if (cl_bmax > 0) o["series_bmax"] = cl_bmax;
        cl_common.apply(o);
        return execute("classify", cl_common.config_file, std::move(o));
    }
    if (simulate->parsed()) {
        json o = json::object();
        if (!si_measure.empty()) o["measure"] = si_measure;
        if (si_n > 0) o["n"] = si_n;
        if (si_horizon >= 0.0) o["horizon"] = si_horizon;
        if (si_replicates > 0) o["replicates"] = si_replicates;
        if (si_seed_set) o["seed"] = si_seed;
        if (!si_scheme.empty()) o["scheme"] = si_scheme;
        if (si_xmin >= 0.0) o["x_min"] = si_xmin;
        si_common.apply(o);
        return execute("simulate", si_common.config_file, std::move(o));
    }
    if (analyze->parsed()) {
        json o = json::object();
        if (!an_history.empty()) o["history"] = an_history;
        if (!an_eps.empty()) o["eps_grid"] = parse_grid(an_eps);
        if (!an_delta.empty()) o["delta_grid"] = parse_grid(an_delta);
        if (an_sample_m >= 0) o["sample_m"] = an_sample_m;
        if (an_seed_set) o["seed"] = an_seed;
        if (an_allow_censored) o["allow_censored"] = true;
        an_common.apply(o);
        return execute("analyze", an_common.config_file, std::move(o));
    }
    if (report->parsed()) {
        json o = json::object();
        if (!re_measure.empty()) o["measure"] = re_measure;
        if (!re_ngrid.empty()) o["n_grid"] = parse_int_grid(re_ngrid);
        if (!re_eps.empty()) o["eps_grid"] = parse_grid(re_eps);
        if (!re_delta.empty()) o["delta_grid"] = parse_grid(re_delta);
        if (!re_eta.empty()) o["eta_grid"] = parse_grid(re_eta);
        if (!re_thin.empty()) o["thin_delta_grid"] = parse_grid(re_thin);
        if (re_replicates > 0) o["replicates"] = re_replicates;
        if (re_seed_set) o["seed"] = re_seed;
        if (!re_scheme.empty()) o["scheme"] = re_scheme;
        if (re_bmax > 0) o["series_bmax"] = re_bmax;
        re_common.apply(o);
        return execute("report", re_common.config_file, std::move(o));
    }
    if (reproduce->parsed())
        return lambdacoal::runner::run_reproduce(rp_manifest, std::cout, std::cerr);

    std::cerr << app.help();
    return lambdacoal::runner::kUsage;
}
