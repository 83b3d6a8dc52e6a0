#include "ecmc/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "ecmc/csv.hpp"

namespace ecmc {

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream stream(path, std::ios::binary);
    if (!stream) {
        throw ParseError("cannot open " + path.string() + " for digest");
    }
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buffer[65536];
    while (stream.read(buffer, sizeof(buffer)) || stream.gcount() > 0) {
        const std::streamsize got = stream.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ull;
        }
        if (!stream) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    nlohmann::json doc;
    doc["tool_version"] = manifest.tool_version;
    doc["command"] = manifest.command;
    doc["config"] = manifest.config;
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& [file, digest] : manifest.input_digests) {
        digests[file] = digest;
    }
    doc["input_digests"] = digests;
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [stage, seconds] : manifest.stage_seconds) {
        timings[stage] = seconds;
    }
    doc["stage_seconds"] = timings;
    doc["warnings"] = manifest.warnings;
    write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace ecmc
