#pragma once

// File plumbing shared across modules: whole-file IO with atomic writes
// (write to a temp sibling, rename over the target), content digests for
// run manifests, and small parsing helpers.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phrasevec {

std::string read_file(const std::string& path);

// Writes via a temporary file in the same directory plus rename, so a
// failed run never leaves a partial output behind.
void atomic_write_file(const std::string& path, std::string_view contents);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);

std::uint64_t parse_u64(std::string_view text, const std::string& what);
double parse_double(std::string_view text, const std::string& what);

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

std::vector<std::string_view> split_ws(std::string_view line);

void append_le_u32(std::string& out, std::uint32_t v);
void append_le_f64(std::string& out, double v);
std::uint32_t read_le_u32(std::string_view bytes, std::size_t offset);
double read_le_f64(std::string_view bytes, std::size_t offset);

struct RunManifest {
    std::string subcommand;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;         // flag -> value snapshot
    std::map<std::string, std::string> input_digests;  // path -> hex digest
    std::string simd_level;
};

// JSON sidecar written next to each command's primary output.
void write_run_manifest(const std::string& path, const RunManifest& manifest);

inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace phrasevec
