#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ecmc/common.hpp"

namespace ecmc {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance record emitted alongside every batch stage: tool version, the
// effective configuration, digests of the files read, stage wall times, and
// collected warnings.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;
    std::map<std::string, std::string> config;          // effective settings
    std::vector<std::pair<std::string, std::string>> input_digests;
    std::vector<std::pair<std::string, double>> stage_seconds;
    WarningList warnings;
};

// 64-bit FNV-1a over the file bytes, rendered as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace ecmc
