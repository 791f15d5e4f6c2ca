#include "lambdacoal/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lambdacoal/classification.hpp"
#include "lambdacoal/coalescent.hpp"
#include "lambdacoal/diagnostics.hpp"
#include "lambdacoal/errors.hpp"
#include "lambdacoal/manifest.hpp"
#include "lambdacoal/measure.hpp"
#include "lambdacoal/mmspace.hpp"
#include "lambdacoal/rng.hpp"
#include "lambdacoal/serialize.hpp"
#include "lambdacoal/ultrametric.hpp"
#include "lambdacoal/util.hpp"
#include "lambdacoal/version.hpp"

namespace lambdacoal::runner {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json defaults_for(const std::string& command) {
    if (command == "classify")
        return json{{"measure", ""},
                    {"format", "text"},
                    {"out", ""},
                    {"series_bmax", 1000000},
                    {"psi_qmax", 1e8},
                    {"dust_eps_min", 1e-10},
                    {"jobs", 1}};
    if (command == "simulate")
        return json{{"measure", ""},
                    {"n", 100},
                    {"horizon", nullptr},
                    {"seed", 1},
                    {"scheme", "auto"},
                    {"x_min", nullptr},
                    {"replicates", 1},
                    {"jobs", 1},
                    {"out", ""}};
    if (command == "analyze")
        return json{{"history", ""},
                    {"eps_grid", json::array({0.05, 0.1, 0.2, 0.4})},
                    {"delta_grid", json::array({0.01, 0.05, 0.1, 0.2})},
                    {"sample_m", 0},
                    {"seed", 1},
                    {"allow_censored", false},
                    {"out", ""}};
    if (command == "report")
        return json{{"measure", ""},
                    {"n_grid", json::array({100, 400, 1600})},
                    {"eps_grid", json::array({0.1})},
                    {"delta_grid", json::array({0.2, 0.4})},
                    {"eta_grid", json::array({0.05, 0.1})},
                    {"thin_delta_grid", json::array({0.001, 0.01, 0.05})},
                    {"replicates", 200},
                    {"seed", 1},
                    {"scheme", "auto"},
                    {"series_bmax", 1000000},
                    {"jobs", 1},
                    {"format", "text"},
                    {"out", ""}};
    throw ValidationError("unknown command '" + command + "'");
}

json parse_object(const std::string& text, const char* what) {
    json j;
    try {
        j = json::parse(text.empty() ? "{}" : text);
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
    return j;
}

void merge_into(json& base, const json& layer, const char* what) {
    for (const auto& [key, value] : layer.items()) {
        if (!base.contains(key))
            throw ValidationError(std::string(what) + ": unknown config key '" + key + "'");
        base[key] = value;
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Collects outputs and writes them (plus a manifest) under the out dir.
class OutputSink {
public:
    OutputSink(const std::string& command, const json& config) : command_(command) {
        config_json_ = config.dump();
        const std::string out = config.value("out", std::string{});
        if (!out.empty()) {
            dir_ = out;
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec) throw ValidationError("cannot create output directory " + dir_.string() +
                                          ": " + ec.message());
        }
    }

    bool enabled() const { return !dir_.empty(); }
    const fs::path& dir() const { return dir_; }

    void add(const std::string& name, const std::string& contents) {
        if (!enabled()) return;
        write_file_atomic(dir_ / name, contents);
        outputs_.push_back({name, sha256_hex(contents)});
    }

    void finalize() {
        if (!enabled()) return;
        RunManifest m;
        m.artifact_version = kVersion;
        m.command = command_;
        m.config_json = config_json_;
        m.created_utc = utc_now();
        m.outputs = outputs_;
        write_file_atomic(dir_ / "manifest.json", to_json(m));
    }

private:
    std::string command_;
    std::string config_json_;
    fs::path dir_;
    std::vector<ManifestOutput> outputs_;
};

ClassificationConfig classification_config(const json& cfg) {
    ClassificationConfig c;
    if (cfg.contains("series_bmax")) c.series_b_max = cfg.at("series_bmax").get<int>();
    if (cfg.contains("psi_qmax")) c.psi_q_max = cfg.at("psi_qmax").get<double>();
    if (cfg.contains("dust_eps_min")) c.dust_eps_min = cfg.at("dust_eps_min").get<double>();
    if (cfg.contains("jobs")) c.jobs = cfg.at("jobs").get<unsigned>();
    return c;
}

int run_classify(const json& cfg, std::ostream& out) {
    const LambdaMeasure measure = parse_measure(cfg.at("measure").get<std::string>());
    const ClassificationReport report = classify(measure, classification_config(cfg));

    const std::string text = classification_report_text(report);
    const std::string jtext = to_json(report);
    out << (cfg.value("format", std::string{"text"}) == "json" ? jtext : text);

    OutputSink sink("classify", cfg);
    sink.add("classification.txt", text);
    sink.add("classification.json", jtext);
    sink.finalize();

    return report.combined == CoalescentClass::Inconsistent ? kInconsistent : kOk;
}

SimConfig sim_config_from(const json& cfg) {
    SimConfig sim;
    sim.n = cfg.at("n").get<int>();
    if (cfg.contains("horizon") && !cfg.at("horizon").is_null())
        sim.horizon = cfg.at("horizon").get<double>();
    sim.seed = cfg.at("seed").get<std::uint64_t>();
    sim.scheme = scheme_from_string(cfg.at("scheme").get<std::string>());
    if (cfg.contains("x_min") && !cfg.at("x_min").is_null())
        sim.x_min = cfg.at("x_min").get<double>();
    return sim;
}

int run_simulate(const json& cfg, std::ostream& out) {
    const LambdaMeasure measure = parse_measure(cfg.at("measure").get<std::string>());
    const SimConfig base = sim_config_from(cfg);
    const int replicates = cfg.at("replicates").get<int>();
    if (replicates < 1) throw ValidationError("replicates must be >= 1");
    const unsigned jobs = cfg.value("jobs", 1u);

    std::vector<CoalescentHistory> histories(static_cast<std::size_t>(replicates));
    parallel_for(0, static_cast<std::size_t>(replicates), jobs, [&](std::size_t r) {
        SimConfig sim = base;
        if (replicates > 1) sim.seed = split_seed(base.seed, 0x73696d, r);
        histories[r] = simulate(measure, sim);
    });

    OutputSink sink("simulate", cfg);
    for (int r = 0; r < replicates; ++r) {
        const CoalescentHistory& history = histories[static_cast<std::size_t>(r)];
        const std::string jtext = to_json(history);
        char name[48];
        std::snprintf(name, sizeof(name), "history_%04d.json", r);
        if (sink.enabled()) {
            sink.add(name, jtext);
            out << name << ": events=" << history.events.size()
                << " scheme=" << history.scheme
                << " missed_bound=" << history.missed_merger_bound << "\n";
        } else {
            out << jtext;
        }
    }
    sink.finalize();
    return kOk;
}

int run_analyze(const json& cfg, std::ostream& out) {
    const std::string history_path = cfg.at("history").get<std::string>();
    if (history_path.empty()) throw ValidationError("analyze needs a history file");
    std::ifstream in(history_path);
    if (!in) throw ValidationError("cannot open history file " + history_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const CoalescentHistory history = history_from_json(buf.str());
    const UltrametricSpace tree = tree_from_history(history);

    const bool allow_censored = cfg.value("allow_censored", false);
    const TreeAnalysis analysis =
        analyze_tree(tree, cfg.at("eps_grid").get<std::vector<double>>(),
                     cfg.at("delta_grid").get<std::vector<double>>(), allow_censored);

    const std::string jtext = to_json(analysis);
    out << jtext;

    OutputSink sink("analyze", cfg);
    sink.add("analysis.json", jtext);
    sink.add("distance_distribution.csv", distance_distribution_csv(analysis.distances));
    sink.add("xi.csv", xi_grid_csv(analysis.xi));
    sink.add("moduli.csv", moduli_csv(analysis.moduli));
    const int sample_m = cfg.value("sample_m", 0);
    if (sample_m > 0) {
        const DistanceMatrixSample sample = sample_distance_matrix(
            tree, sample_m, cfg.at("seed").get<std::uint64_t>());
        sink.add("sample_matrix.csv", matrix_csv(sample));
    }
    sink.finalize();
    return kOk;
}

StudyConfig study_config_from(const json& cfg) {
    StudyConfig sc;
    sc.n_grid = cfg.at("n_grid").get<std::vector<int>>();
    sc.eps_grid = cfg.at("eps_grid").get<std::vector<double>>();
    sc.delta_grid = cfg.at("delta_grid").get<std::vector<double>>();
    sc.eta_grid = cfg.at("eta_grid").get<std::vector<double>>();
    sc.thin_delta_grid = cfg.at("thin_delta_grid").get<std::vector<double>>();
    sc.replicates = cfg.at("replicates").get<int>();
    sc.seed = cfg.at("seed").get<std::uint64_t>();
    sc.scheme = scheme_from_string(cfg.at("scheme").get<std::string>());
    sc.jobs = cfg.at("jobs").get<unsigned>();
    return sc;
}

int run_report(const json& cfg, std::ostream& out) {
    const LambdaMeasure measure = parse_measure(cfg.at("measure").get<std::string>());
    const StudyConfig study = study_config_from(cfg);
    const CompactnessReport report = dichotomy_report(measure, study, classification_config(cfg));

    const std::string text = compactness_report_text(report);
    const std::string jtext = to_json(report);
    out << (cfg.value("format", std::string{"text"}) == "json" ? jtext : text);

    OutputSink sink("report", cfg);
    sink.add("report.json", jtext);
    sink.add("report.txt", text);
    sink.add("xi_scaling.csv", xi_scaling_csv(report.xi));
    sink.add("thin_points.csv", thin_csv(report.thin));
    sink.add("local_compactness.csv", local_csv(report.local));
    sink.finalize();

    return report.classification.combined == CoalescentClass::Inconsistent ? kInconsistent
                                                                            : kOk;
}

} // namespace

std::string resolve_config(const std::string& command, const std::string& config_file_json,
                           const std::string& overrides_json) {
    json resolved = defaults_for(command);
    merge_into(resolved, parse_object(config_file_json, "config file"), "config file");
    merge_into(resolved, parse_object(overrides_json, "command line"), "command line");
    return resolved.dump();
}

int run_command(const std::string& command, const std::string& config_json,
                std::ostream& out, std::ostream& err) {
    try {
        const json cfg = parse_object(config_json, "config");
        if (command == "classify") return run_classify(cfg, out);
        if (command == "simulate") return run_simulate(cfg, out);
        if (command == "analyze") return run_analyze(cfg, out);
        if (command == "report") return run_report(cfg, out);
        err << "error: unknown command '" << command << "'\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    }
}

int run_reproduce(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
    try {
        const RunManifest manifest = load_manifest(manifest_path);
        if (manifest.artifact_version != kVersion)
            out << "note: manifest was written by version " << manifest.artifact_version
                << ", this is " << kVersion << "\n";

        json cfg = json::parse(manifest.config_json);
        const fs::path scratch =
            fs::path(manifest_path).parent_path() / ".reproduce.tmp";
        fs::remove_all(scratch);
        cfg["out"] = scratch.string();

        std::ostringstream sink;
        const int code = run_command(manifest.command, cfg.dump(), sink, err);
        if (code != kOk && code != kInconsistent) return code;

        bool all_match = true;
        for (const ManifestOutput& o : manifest.outputs) {
            const fs::path fresh = scratch / o.path;
            std::string digest;
            if (fs::exists(fresh)) digest = sha256_file(fresh);
            const bool match = digest == o.sha256;
            all_match = all_match && match;
            out << (match ? "MATCH   " : "MISMATCH") << "  " << o.path << "\n";
        }
        fs::remove_all(scratch);
        out << (all_match ? "reproduction OK: outputs are byte-identical\n"
                          : "reproduction FAILED\n");
        return all_match ? kOk : kNumeric;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    }
}

} // namespace lambdacoal::runner
