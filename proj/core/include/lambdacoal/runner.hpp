#pragma once

#include <iosfwd>
#include <string>

namespace lambdacoal::runner {

/// Exit codes shared by the runner and the CLI.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kNumeric = 3;
inline constexpr int kInconsistent = 4;

/// Merge defaults < config file < overrides for `command` and return the
/// fully resolved config as canonical JSON. Unknown keys are rejected.
/// Both inputs are JSON object texts ("{}" for none).
std::string resolve_config(const std::string& command, const std::string& config_file_json,
                           const std::string& overrides_json);

/// Execute one of classify | simulate | analyze | report with a fully
/// resolved config. Writes outputs plus a run manifest into the config's
/// "out" directory when set, prints human output to `out`, and maps all
/// failures onto the exit-code contract (never throws).
int run_command(const std::string& command, const std::string& config_json,
                std::ostream& out, std::ostream& err);

/// Re-run the command recorded in a manifest into a scratch directory and
/// compare output digests byte-for-byte.
int run_reproduce(const std::string& manifest_path, std::ostream& out, std::ostream& err);

} // namespace lambdacoal::runner
