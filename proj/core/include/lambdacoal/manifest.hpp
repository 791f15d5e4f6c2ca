#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lambdacoal {

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestOutput {
    std::string path; // relative to the manifest's directory
    std::string sha256;
};

/// Everything needed to reproduce a run bit-for-bit on the same artifact
/// version: the command, its fully resolved config, the master seed inside
/// it, and digests of every written output.
struct RunManifest {
    std::string artifact_version;
    std::string command;
    std::string config_json; // canonical dump of the resolved config object
    std::string created_utc;
    std::vector<ManifestOutput> outputs;
};

std::string to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);
RunManifest load_manifest(const std::filesystem::path& path);

/// Write a file atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace lambdacoal
