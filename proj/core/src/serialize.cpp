#include "lambdacoal/serialize.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "lambdacoal/errors.hpp"

namespace lambdacoal {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json verdict_json(const ConvergenceVerdict& v) {
    json evidence = json::array();
    for (const EvidencePoint& p : v.evidence) evidence.push_back({p.cutoff, p.partial});
    return json{{"verdict", to_string(v.verdict)},
                {"fitted_slope", v.fitted_slope},
                {"fit_residual", v.fit_residual},
                {"note", v.note},
                {"evidence", evidence}};
}

void verdict_text(std::ostringstream& out, const std::string& name,
                  const ConvergenceVerdict& v) {
    out << name << ".verdict: " << to_string(v.verdict) << "\n";
    out << name << ".fitted_slope: " << fmt(v.fitted_slope) << "\n";
    out << name << ".fit_residual: " << fmt(v.fit_residual) << "\n";
    if (!v.note.empty()) out << name << ".note: " << v.note << "\n";
    out << name << ".evidence:";
    for (const EvidencePoint& p : v.evidence)
        out << " (" << fmt(p.cutoff) << ", " << fmt(p.partial) << ")";
    out << "\n";
}

json study_config_json(const StudyConfig& cfg) {
    return json{{"n_grid", cfg.n_grid},
                {"eps_grid", cfg.eps_grid},
                {"delta_grid", cfg.delta_grid},
                {"eta_grid", cfg.eta_grid},
                {"thin_delta_grid", cfg.thin_delta_grid},
                {"replicates", cfg.replicates},
                {"seed", cfg.seed},
                {"scheme", to_string(cfg.scheme)},
                {"probe_sample_size", cfg.probe_sample_size},
                {"stabilization_ratio_max", cfg.stabilization_ratio_max},
                {"growth_fraction_min", cfg.growth_fraction_min},
                {"local_ratio_max", cfg.local_ratio_max},
                {"pairing", "nested-restriction"}};
}

} // namespace

std::string to_json(const ClassificationReport& report) {
    json j{{"measure", report.measure_spec},
           {"cdi_series", verdict_json(report.cdi_series)},
           {"cdi_psi", verdict_json(report.cdi_psi)},
           {"dust_integral", verdict_json(report.dust)},
           {"class", to_string(report.combined)},
           {"note", report.note}};
    return j.dump(2) + "\n";
}

std::string classification_report_text(const ClassificationReport& report) {
    std::ostringstream out;
    out << "measure: " << report.measure_spec << "\n";
    out << "class: " << to_string(report.combined) << "\n";
    if (!report.note.empty()) out << "note: " << report.note << "\n";
    verdict_text(out, "cdi_series", report.cdi_series);
    verdict_text(out, "cdi_psi", report.cdi_psi);
    verdict_text(out, "dust_integral", report.dust);
    out << "legend: dust_integral diverges => dust-free; converges => has dust\n";
    return out.str();
}

std::string to_json(const CoalescentHistory& history) {
    json events = json::array();
    for (const MergeEvent& e : history.events)
        events.push_back({{"t", e.time}, {"blocks", e.blocks}, {"new_block", e.new_block}});
    json j{{"format", "lambdacoal-history-v1"},
           {"n", history.n},
           {"seed", history.seed},
           {"scheme", history.scheme},
           {"measure", history.measure_spec},
           {"events", events},
           {"metadata",
            {{"poisson_x_min", history.poisson_x_min},
             {"missed_merger_bound", history.missed_merger_bound},
             {"kingman_component_mass", history.kingman_component_mass},
             {"had_time_ties", history.had_time_ties},
             {"absorbed", history.absorbed()}}}};
    if (history.horizon)
        j["horizon"] = *history.horizon;
    else
        j["horizon"] = nullptr;
    return j.dump(2) + "\n";
}

CoalescentHistory history_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("history is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != "lambdacoal-history-v1")
            throw ParseError("unsupported history format");
        CoalescentHistory h;
        h.n = j.at("n").get<int>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.scheme = j.at("scheme").get<std::string>();
        h.measure_spec = j.value("measure", std::string{});
        if (j.contains("horizon") && !j.at("horizon").is_null())
            h.horizon = j.at("horizon").get<double>();
        for (const json& ev : j.at("events")) {
            MergeEvent e;
            e.time = ev.at("t").get<double>();
            e.blocks = ev.at("blocks").get<std::vector<int>>();
            e.new_block = ev.at("new_block").get<int>();
            h.events.push_back(std::move(e));
        }
        if (j.contains("metadata")) {
            const json& m = j.at("metadata");
            h.poisson_x_min = m.value("poisson_x_min", 0.0);
            h.missed_merger_bound = m.value("missed_merger_bound", 0.0);
            h.kingman_component_mass = m.value("kingman_component_mass", 0.0);
            h.had_time_ties = m.value("had_time_ties", false);
        }
        return h;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed history: ") + e.what());
    }
}

namespace {

json xi_cells_json(const XiScalingResult& r) {
    json cells = json::array();
    for (const XiCell& c : r.cells)
        cells.push_back({{"n", c.n},
                         {"eps", c.eps},
                         {"median", c.median},
                         {"q1", c.q1},
                         {"q3", c.q3},
                         {"max", c.max_value},
                         {"domination_violations", c.domination_violations}});
    json ratios = json::array();
    for (const GrowthRatio& g : r.ratios)
        ratios.push_back({{"eps", g.eps},
                          {"n_from", g.n_from},
                          {"n_to", g.n_to},
                          {"median_ratio", g.median_ratio},
                          {"increase_fraction", g.increase_fraction}});
    return json{{"cells", cells},
                {"ratios", ratios},
                {"total_domination_violations", r.total_domination_violations}};
}

} // namespace

std::string to_json(const CompactnessReport& report) {
    json thin = json::array();
    for (const ThinCell& c : report.thin)
        thin.push_back({{"n", c.n},
                        {"eps", c.eps},
                        {"delta", c.delta},
                        {"mean_fraction", c.mean_fraction},
                        {"median_fraction", c.median_fraction}});
    json local_cells = json::array();
    for (const LocalCell& c : report.local.cells)
        local_cells.push_back({{"n", c.n},
                               {"delta", c.delta},
                               {"eta", c.eta},
                               {"median", c.median},
                               {"q1", c.q1},
                               {"q3", c.q3},
                               {"empty_restrictions", c.empty_restrictions}});
    json local_ratios = json::array();
    for (const GrowthRatio& g : report.local.ratios)
        local_ratios.push_back({{"delta", g.delta},
                                {"eta", g.eta},
                                {"n_from", g.n_from},
                                {"n_to", g.n_to},
                                {"median_ratio", g.median_ratio},
                                {"increase_fraction", g.increase_fraction}});

    json j{{"measure", report.measure_spec},
           {"classification", json::parse(to_json(report.classification))},
           {"config", study_config_json(report.config)},
           {"xi_scaling", xi_cells_json(report.xi)},
           {"thin_points", thin},
           {"local_compactness", {{"cells", local_cells}, {"ratios", local_ratios}}},
           {"empirical_xi", report.empirical_xi},
           {"empirical_local", report.empirical_local},
           {"verdict", report.verdict},
           {"warnings", report.warnings}};
    return j.dump(2) + "\n";
}

std::string compactness_report_text(const CompactnessReport& report) {
    std::ostringstream out;
    out << "measure: " << report.measure_spec << "\n";
    out << "analytic class: " << to_string(report.classification.combined) << "\n";
    out << "empirical xi trend: " << report.empirical_xi << "\n";
    out << "empirical local-compactness trend: " << report.empirical_local << "\n";
    out << "verdict: " << report.verdict << "\n";
    for (const std::string& w : report.warnings) out << "warning: " << w << "\n";
    out << "xi medians:";
    for (const XiCell& c : report.xi.cells)
        out << " (n=" << c.n << ", eps=" << fmt(c.eps) << ": " << fmt(c.median) << ")";
    out << "\n";
    return out.str();
}

std::string xi_scaling_csv(const XiScalingResult& result) {
    std::ostringstream out;
    out << "n,eps,median_xi,q1,q3,max_xi,domination_violations\n";
    for (const XiCell& c : result.cells)
        out << c.n << "," << fmt(c.eps) << "," << fmt(c.median) << "," << fmt(c.q1) << ","
            << fmt(c.q3) << "," << c.max_value << "," << c.domination_violations << "\n";
    return out.str();
}

std::string thin_csv(const std::vector<ThinCell>& cells) {
    std::ostringstream out;
    out << "n,eps,delta,mean_fraction,median_fraction\n";
    for (const ThinCell& c : cells)
        out << c.n << "," << fmt(c.eps) << "," << fmt(c.delta) << "," << fmt(c.mean_fraction)
            << "," << fmt(c.median_fraction) << "\n";
    return out.str();
}

std::string local_csv(const LocalProbeResult& result) {
    std::ostringstream out;
    out << "n,delta,eta,median_xi,q1,q3,empty_restrictions\n";
    for (const LocalCell& c : result.cells)
        out << c.n << "," << fmt(c.delta) << "," << fmt(c.eta) << "," << fmt(c.median) << ","
            << fmt(c.q1) << "," << fmt(c.q3) << "," << c.empty_restrictions << "\n";
    return out.str();
}

TreeAnalysis analyze_tree(const UltrametricSpace& tree, const std::vector<double>& eps_grid,
                          const std::vector<double>& delta_grid, bool allow_censored) {
    TreeAnalysis a;
    a.n = tree.leaf_count();
    a.censored = tree.censored();
    a.tree_height = tree.total_height();
    a.distances = distance_distribution(tree, allow_censored);
    for (double eps : eps_grid)
        a.xi.emplace_back(eps, xi_epsilon(tree, eps, allow_censored));
    for (double delta : delta_grid) {
        const Moduli m = moduli_of_mass(tree, delta, allow_censored);
        a.moduli.emplace_back(delta, m.v, m.v_tilde);
    }
    return a;
}

std::string to_json(const TreeAnalysis& analysis) {
    json dd = json::array();
    for (const auto& [d, w] : analysis.distances.atoms) dd.push_back({d, w});
    json xi = json::array();
    for (const auto& [eps, value] : analysis.xi) xi.push_back({{"eps", eps}, {"xi", value}});
    json moduli = json::array();
    for (const auto& [delta, v, vt] : analysis.moduli)
        moduli.push_back({{"delta", delta}, {"v", v}, {"v_tilde", vt}});
    json j{{"n", analysis.n},
           {"censored", analysis.censored},
           {"tree_height", analysis.tree_height},
           {"distance_distribution", dd},
           {"xi", xi},
           {"moduli", moduli}};
    return j.dump(2) + "\n";
}

std::string distance_distribution_csv(const DiscreteDistribution& d) {
    std::ostringstream out;
    out << "distance,mass\n";
    for (const auto& [v, w] : d.atoms) out << fmt(v) << "," << fmt(w) << "\n";
    return out.str();
}

std::string xi_grid_csv(const std::vector<std::pair<double, int>>& xi) {
    std::ostringstream out;
    out << "eps,xi\n";
    for (const auto& [eps, value] : xi) out << fmt(eps) << "," << value << "\n";
    return out.str();
}

std::string moduli_csv(const std::vector<std::tuple<double, double, double>>& moduli) {
    std::ostringstream out;
    out << "delta,v,v_tilde\n";
    for (const auto& [delta, v, vt] : moduli)
        out << fmt(delta) << "," << fmt(v) << "," << fmt(vt) << "\n";
    return out.str();
}

std::string matrix_csv(const DistanceMatrixSample& sample) {
    std::ostringstream out;
    out << "# source: " << sample.source << ", seed: " << sample.seed << "\n";
    for (int i = 0; i < sample.m; ++i) {
        for (int j = 0; j < sample.m; ++j) {
            if (j) out << ",";
            out << fmt(sample.distance(i, j));
        }
        out << "\n";
    }
    return out.str();
}

} // namespace lambdacoal
