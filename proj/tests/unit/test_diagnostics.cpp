#include <doctest.h>

#include "lambdacoal/diagnostics.hpp"
#include "lambdacoal/errors.hpp"
#include "lambdacoal/serialize.hpp"

using namespace lambdacoal;

namespace {

StudyConfig small_config() {
    StudyConfig cfg;
    cfg.n_grid = {16, 32, 64};
    cfg.eps_grid = {0.05, 0.2, 0.8};
    cfg.thin_delta_grid = {0.01, 0.1};
    cfg.replicates = 24;
    cfg.seed = 12;
    cfg.jobs = 2;
    return cfg;
}

} // namespace

TEST_CASE("xi scaling: domination never violated, xi monotone in eps") {
    for (const char* spec : {"kingman", "bolthausen-sznitman", "power:1"}) {
        const XiScalingResult r = xi_scaling_study(parse_measure(spec), small_config());
        CHECK(r.total_domination_violations == 0);
        // medians non-increasing along the eps grid for each n
        for (std::size_t i = 0; i + 1 < r.cells.size(); ++i)
            if (r.cells[i].n == r.cells[i + 1].n)
                CHECK(r.cells[i + 1].median <= r.cells[i].median);
    }
}

TEST_CASE("thin fraction is zero below the leaf mass") {
    StudyConfig cfg = small_config();
    cfg.thin_delta_grid = {0.001}; // below 1/64 for every n in the grid
    const auto cells = thin_point_probe(parse_measure("bolthausen-sznitman"), cfg);
    for (const ThinCell& c : cells) {
        if (c.delta < 1.0 / c.n) {
            CHECK(c.mean_fraction == 0.0);
            CHECK(c.median_fraction == 0.0);
        }
    }
}

TEST_CASE("thin fraction is monotone in delta and non-increasing in eps") {
    StudyConfig cfg = small_config();
    cfg.eps_grid = {0.05, 0.2};
    cfg.thin_delta_grid = {0.02, 0.1, 0.3};
    const auto cells = thin_point_probe(parse_measure("bolthausen-sznitman"), cfg);
    auto fraction = [&](int n, double eps, double delta) {
        for (const ThinCell& c : cells)
            if (c.n == n && c.eps == eps && c.delta == delta) return c.mean_fraction;
        REQUIRE(false);
        return 0.0;
    };
    for (int n : cfg.n_grid) {
        for (double eps : cfg.eps_grid) {
            CHECK(fraction(n, eps, 0.02) <= fraction(n, eps, 0.1) + 1e-12);
            CHECK(fraction(n, eps, 0.1) <= fraction(n, eps, 0.3) + 1e-12);
        }
        for (double delta : cfg.thin_delta_grid)
            CHECK(fraction(n, 0.2, delta) <= fraction(n, 0.05, delta) + 1e-12);
    }
}

TEST_CASE("local probe handles degenerate deltas and empty restrictions") {
    StudyConfig cfg = small_config();
    cfg.n_grid = {8};
    cfg.replicates = 16;
    cfg.delta_grid = {1000.0}; // beyond any tree height: restriction is the identity
    cfg.eta_grid = {0.2};
    const LocalProbeResult r = local_compactness_probe(parse_measure("kingman"), cfg);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.cells[0].empty_restrictions == 0);
}

TEST_CASE("a delta beyond the height reduces the probe to xi of the whole space") {
    // deterministic tree; the full pipeline through public ops
    CoalescentHistory h;
    h.n = 4;
    h.events.push_back({0.2, {1, 2}, 5});
    h.events.push_back({0.6, {3, 4}, 6});
    h.events.push_back({0.9, {5, 6}, 7});
    const UltrametricSpace tree = tree_from_history(h);

    DistanceMatrixSample full;
    full.m = 4;
    full.source_points = {0, 1, 2, 3};
    full.entries.assign(16, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            full.entries[static_cast<std::size_t>(4 * i + j)] = tree.distance(i, j);

    const DistanceMatrixSample restricted = delta_restriction(full, 100.0);
    CHECK(restricted.m == 4); // identity
    for (double eta : {0.1, 0.3, 0.7}) {
        CHECK(xi_epsilon(restricted, eta).value() == xi_epsilon(tree, eta));
        CHECK(xi_epsilon_among(tree, restricted.source_points, eta) ==
              xi_epsilon(tree, eta));
    }
}

TEST_CASE("sampled-matrix probe agrees with the exact probe in distribution") {
    StudyConfig exact = small_config();
    exact.n_grid = {24};
    exact.replicates = 60;
    StudyConfig sampled = exact;
    sampled.probe_sample_size = 600; // large enough to hit every leaf a.s.
    const LocalProbeResult a = local_compactness_probe(parse_measure("kingman"), exact);
    const LocalProbeResult b = local_compactness_probe(parse_measure("kingman"), sampled);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        CHECK(std::abs(a.cells[i].median - b.cells[i].median) <= 1.0);
}

TEST_CASE("dichotomy report is deterministic to the byte") {
    StudyConfig cfg = small_config();
    cfg.replicates = 12;
    const LambdaMeasure m = parse_measure("bolthausen-sznitman");
    ClassificationConfig ccfg;
    ccfg.series_b_max = 10000; // keep the test quick
    const CompactnessReport a = dichotomy_report(m, cfg, ccfg);
    const CompactnessReport b = dichotomy_report(m, cfg, ccfg);
    CHECK(to_json(a) == to_json(b));

    StudyConfig other = cfg;
    other.jobs = 1; // thread count must not affect the bytes
    const CompactnessReport c = dichotomy_report(m, other, ccfg);
    // jobs is not part of the serialized config; everything else matches
    CHECK(to_json(c) == to_json(a));
}

TEST_CASE("grid validation") {
    StudyConfig cfg = small_config();
    cfg.n_grid = {32, 16};
    CHECK_THROWS_AS(xi_scaling_study(parse_measure("kingman"), cfg), ValidationError);
    cfg = small_config();
    cfg.eps_grid = {0.0};
    CHECK_THROWS_AS(xi_scaling_study(parse_measure("kingman"), cfg), ValidationError);
    cfg = small_config();
    cfg.delta_grid = {0.05};
    cfg.eta_grid = {0.1};
    CHECK_THROWS_AS(local_compactness_probe(parse_measure("kingman"), cfg), ValidationError);
}
