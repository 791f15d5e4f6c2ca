#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "../common/oracles.hpp"
#include "lambdacoal/errors.hpp"
#include "lambdacoal/manifest.hpp"
#include "lambdacoal/runner.hpp"
#include "lambdacoal/serialize.hpp"

using namespace lambdacoal;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lambdacoal_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("history JSON round-trips") {
    for (int r = 0; r < 10; ++r) {
        CoalescentHistory h = oracles::random_history(10, split_seed(3, 20, r));
        h.measure_spec = "beta:0.5,1.5";
        h.poisson_x_min = 0.01;
        h.missed_merger_bound = 1e-4;
        const CoalescentHistory back = history_from_json(to_json(h));
        CHECK(back.n == h.n);
        CHECK(back.seed == h.seed);
        CHECK(back.scheme == h.scheme);
        CHECK(back.measure_spec == h.measure_spec);
        CHECK(back.poisson_x_min == h.poisson_x_min);
        CHECK(back.missed_merger_bound == h.missed_merger_bound);
        REQUIRE(back.events.size() == h.events.size());
        for (std::size_t i = 0; i < h.events.size(); ++i) {
            CHECK(back.events[i].time == h.events[i].time);
            CHECK(back.events[i].blocks == h.events[i].blocks);
            CHECK(back.events[i].new_block == h.events[i].new_block);
        }
        CHECK(to_json(back) == to_json(h)); // canonical form is a fixed point
    }
}

TEST_CASE("malformed histories raise parse errors") {
    CHECK_THROWS_AS(history_from_json("not json"), ParseError);
    CHECK_THROWS_AS(history_from_json("{}"), ParseError);
    CHECK_THROWS_AS(history_from_json(R"({"format":"other","n":2})"), ParseError);
}

TEST_CASE("sha256 known answers") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config resolution: defaults, file, flags") {
    const std::string resolved = runner::resolve_config(
        "classify", R"({"measure":"kingman","jobs":4})", R"({"jobs":2})");
    CHECK(resolved.find("\"measure\":\"kingman\"") != std::string::npos);
    CHECK(resolved.find("\"jobs\":2") != std::string::npos);         // flag wins
    CHECK(resolved.find("\"format\":\"text\"") != std::string::npos); // default survives
    CHECK_THROWS_AS(runner::resolve_config("classify", R"({"measrue":"kingman"})", "{}"),
                    ValidationError);
    CHECK_THROWS_AS(runner::resolve_config("frobnicate", "{}", "{}"), ValidationError);
}

TEST_CASE("runner classify exit codes") {
    std::ostringstream out, err;
    const std::string good =
        runner::resolve_config("classify", "{}", R"({"measure":"kingman","jobs":2})");
    CHECK(runner::run_command("classify", good, out, err) == runner::kOk);
    CHECK(out.str().find("comes-down-from-infinity") != std::string::npos);

    out.str("");
    const std::string bad =
        runner::resolve_config("classify", "{}", R"({"measure":"atom:1.0,0.3"})");
    CHECK(runner::run_command("classify", bad, out, err) == runner::kValidation);
    CHECK(err.str().find("atom at location 1") != std::string::npos);
}

TEST_CASE("simulate writes reproducible files and manifests") {
    const fs::path dir = temp_dir("sim");
    std::ostringstream out, err;
    const std::string cfg = runner::resolve_config(
        "simulate", "{}",
        R"({"measure":"0.75*uniform:0.25,1","n":6,"seed":42,"replicates":2,"out":")" +
            dir.string() + "\"}");
    REQUIRE(runner::run_command("simulate", cfg, out, err) == runner::kOk);
    REQUIRE(fs::exists(dir / "history_0000.json"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    const std::string first = slurp(dir / "history_0000.json");
    const CoalescentHistory h = history_from_json(first);
    CHECK(h.n == 6);

    // byte-identical rerun
    const fs::path dir2 = temp_dir("sim2");
    const std::string cfg2 = runner::resolve_config(
        "simulate", "{}",
        R"({"measure":"0.75*uniform:0.25,1","n":6,"seed":42,"replicates":2,"out":")" +
            dir2.string() + "\"}");
    REQUIRE(runner::run_command("simulate", cfg2, out, err) == runner::kOk);
    CHECK(slurp(dir2 / "history_0000.json") == first);
    CHECK(slurp(dir2 / "history_0001.json") == slurp(dir / "history_0001.json"));

    // manifest digests match the files on disk
    const RunManifest manifest = load_manifest(dir / "manifest.json");
    CHECK(manifest.command == "simulate");
    for (const ManifestOutput& o : manifest.outputs)
        CHECK(sha256_file(dir / o.path) == o.sha256);

    // reproduce from the manifest
    std::ostringstream rep_out, rep_err;
    CHECK(runner::run_reproduce((dir / "manifest.json").string(), rep_out, rep_err) ==
          runner::kOk);
    CHECK(rep_out.str().find("reproduction OK") != std::string::npos);

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("analyze consumes simulate output") {
    const fs::path dir = temp_dir("an");
    std::ostringstream out, err;
    const std::string sim_cfg = runner::resolve_config(
        "simulate", "{}",
        R"({"measure":"kingman","n":12,"seed":3,"out":")" + dir.string() + "\"}");
    REQUIRE(runner::run_command("simulate", sim_cfg, out, err) == runner::kOk);

    const std::string an_cfg = runner::resolve_config(
        "analyze", "{}",
        R"({"history":")" + (dir / "history_0000.json").string() +
            R"(","eps_grid":[0.1,0.5],"delta_grid":[0.05,0.2],"sample_m":4,"out":")" +
            (dir / "fn").string() + "\"}");
    std::ostringstream an_out;
    REQUIRE(runner::run_command("analyze", an_cfg, an_out, err) == runner::kOk);
    CHECK(fs::exists(dir / "fn" / "analysis.json"));
    CHECK(fs::exists(dir / "fn" / "distance_distribution.csv"));
    CHECK(fs::exists(dir / "fn" / "xi.csv"));
    CHECK(fs::exists(dir / "fn" / "moduli.csv"));
    CHECK(fs::exists(dir / "fn" / "sample_matrix.csv"));

    const std::string csv = slurp(dir / "fn" / "xi.csv");
    CHECK(csv.rfind("eps,xi\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("report runs end to end on a small grid") {
    const fs::path dir = temp_dir("rep");
    std::ostringstream out, err;
    const std::string cfg = runner::resolve_config(
        "report", "{}",
        R"({"measure":"kingman","n_grid":[8,16],"eps_grid":[0.2],"replicates":8,)"
        R"("seed":5,"series_bmax":10000,"jobs":2,"out":")" +
            dir.string() + "\"}");
    REQUIRE(runner::run_command("report", cfg, out, err) == runner::kOk);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "xi_scaling.csv"));
    CHECK(fs::exists(dir / "thin_points.csv"));
    CHECK(fs::exists(dir / "local_compactness.csv"));

    std::ostringstream rep_out, rep_err;
    CHECK(runner::run_reproduce((dir / "manifest.json").string(), rep_out, rep_err) ==
          runner::kOk);
    fs::remove_all(dir);
}

TEST_CASE("unknown commands and bad configs") {
    std::ostringstream out, err;
    CHECK(runner::run_command("bogus", "{}", out, err) == runner::kUsage);
    CHECK(runner::run_command("classify", "[1,2]", out, err) == runner::kValidation);
}
