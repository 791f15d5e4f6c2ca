// Process-level checks of the installed command-line interface: exit codes,
// output files, and manifest-driven reproduction. The binary path comes from
// the LAMBDACOAL_CLI environment variable (set by CTest).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "[PASS] " << what << "\n";
    } else {
        std::cout << "[FAIL] " << what << "\n";
        ++failures;
    }
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& cmd) {
    RunResult r;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

int main() {
    const char* cli_env = std::getenv("LAMBDACOAL_CLI");
    if (!cli_env || !*cli_env) {
        std::cerr << "LAMBDACOAL_CLI is not set\n";
        return 1;
    }
    const std::string cli = cli_env;
    const fs::path work = fs::temp_directory_path() / "lambdacoal_cli_test";
    fs::remove_all(work);
    fs::create_directories(work);

    // exit code contract
    check(run(cli + " classify --measure kingman").exit_code == 0,
          "classify kingman exits 0");
    check(run(cli + " classify --measure kingman").output.find(
              "comes-down-from-infinity") != std::string::npos,
          "classify kingman prints the class");
    check(run(cli + " classify --measure \"atom:1.0,0.3\"").exit_code == 2,
          "atom at 1 is a validation error (exit 2)");
    check(run(cli + " classify --measure \"beta:nope\"").exit_code == 2,
          "malformed measure is rejected (exit 2)");
    check(run(cli + " nonsense").exit_code == 1, "unknown subcommand exits 1");
    check(run(cli + " classify --measure kingman --format json").output.find(
              "\"class\": \"comes-down-from-infinity\"") != std::string::npos,
          "json format is machine readable");

    // simulate determinism: same seed twice gives byte-identical files
    const fs::path sim1 = work / "sim1";
    const fs::path sim2 = work / "sim2";
    const std::string sim_flags =
        " simulate --measure \"0.75*uniform:0.25,1\" --n 6 --seed 11 --replicates 2 --out ";
    check(run(cli + sim_flags + sim1.string()).exit_code == 0, "simulate exits 0");
    check(run(cli + sim_flags + sim2.string()).exit_code == 0, "simulate rerun exits 0");
    check(slurp(sim1 / "history_0000.json") == slurp(sim2 / "history_0000.json") &&
              !slurp(sim1 / "history_0000.json").empty(),
          "fixed seed gives byte-identical history files");

    // poisson dispatch with an atom at zero engages the pairwise path
    const fs::path simk = work / "simk";
    check(run(cli + " simulate --measure kingman --n 5 --seed 2 --scheme poisson --out " +
              simk.string())
                  .exit_code == 0,
          "poisson scheme accepts an atom at zero");
    check(slurp(simk / "history_0000.json").find("\"scheme\": \"poisson\"") !=
              std::string::npos,
          "history records the scheme");

    // n = 1: valid file with no events
    const fs::path sim_one = work / "sim_one";
    check(run(cli + " simulate --measure kingman --n 1 --seed 1 --out " + sim_one.string())
                  .exit_code == 0,
          "n=1 simulate exits 0");
    check(slurp(sim_one / "history_0000.json").find("\"events\": []") != std::string::npos,
          "n=1 yields an empty event list");

    // analyze a history
    const fs::path an = work / "an";
    check(run(cli + " analyze --history " + (sim1 / "history_0000.json").string() +
              " --eps-grid 0.1,0.4 --delta-grid 0.1 --out " + an.string())
                  .exit_code == 0,
          "analyze exits 0");
    check(fs::exists(an / "xi.csv") && fs::exists(an / "moduli.csv"),
          "analyze writes the CSV exports");

    // reproduce: byte-identical outputs from the manifest
    check(run(cli + " reproduce " + (sim1 / "manifest.json").string()).exit_code == 0,
          "reproduce verifies the simulate manifest");
    check(run(cli + " reproduce " + (an / "manifest.json").string()).exit_code == 0,
          "reproduce verifies the analyze manifest");
    check(run(cli + " reproduce " + (work / "missing.json").string()).exit_code == 2,
          "missing manifest is a validation error");

    // small report round trip
    const fs::path rep = work / "rep";
    check(run(cli + " report --measure kingman --n-grid 8,16 --eps-grid 0.2 "
                    "--replicates 6 --bmax 10000 --seed 3 --jobs 2 --out " +
              rep.string())
                  .exit_code == 0,
          "report exits 0");
    check(fs::exists(rep / "report.json") && fs::exists(rep / "xi_scaling.csv"),
          "report writes json and csv outputs");
    check(run(cli + " reproduce " + (rep / "manifest.json").string()).exit_code == 0,
          "reproduce verifies the report manifest");

    fs::remove_all(work);
    std::cout << (failures == 0 ? "all CLI checks passed\n"
                                : std::to_string(failures) + " CLI checks failed\n");
    return failures == 0 ? 0 : 1;
}
