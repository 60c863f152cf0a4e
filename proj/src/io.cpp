#include "phrasevec/io.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <unistd.h>

#include <json.hpp>

namespace phrasevec {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read error on " + path);
    return data;
}

void atomic_write_file(const std::string& path, std::string_view contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
    const fs::path tmp = dir / (target.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot create " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write error on " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot move temporary file onto " + path);
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) { return fnv1a64(read_file(path)); }

std::uint64_t parse_u64(std::string_view text, const std::string& what) {
    std::uint64_t v = 0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error(what + ": expected unsigned integer, got '" +
                                 std::string(text) + "'");
    return v;
}

double parse_double(std::string_view text, const std::string& what) {
    // strtod needs a NUL-terminated buffer; tokens are short.
    char buf[64];
    if (text.empty() || text.size() >= sizeof(buf))
        throw std::runtime_error(what + ": malformed number '" + std::string(text) + "'");
    std::memcpy(buf, text.data(), text.size());
    buf[text.size()] = '\0';
    char* endp = nullptr;
    const double v = std::strtod(buf, &endp);
    if (endp != buf + text.size())
        throw std::runtime_error(what + ": malformed number '" + std::string(text) + "'");
    return v;
}

std::string format_double(double v) {
    char buf[40];
    int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

void append_le_u32(std::string& out, std::uint32_t v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void append_le_f64(std::string& out, double v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_le_u32(std::string_view bytes, std::size_t offset) {
    if (offset + 4 > bytes.size()) throw std::runtime_error("truncated binary data");
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + offset, sizeof(v));
    return v;
}

double read_le_f64(std::string_view bytes, std::size_t offset) {
    if (offset + 8 > bytes.size()) throw std::runtime_error("truncated binary data");
    double v;
    std::memcpy(&v, bytes.data() + offset, sizeof(v));
    return v;
}

void write_run_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::json j;
    j["subcommand"] = manifest.subcommand;
    j["tool_version"] = manifest.tool_version.empty() ? std::string(kToolVersion)
                                                      : manifest.tool_version;
    j["seed"] = manifest.seed;
    j["simd_level"] = manifest.simd_level;
    j["config"] = manifest.config;
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& [file, digest] : manifest.input_digests) digests[file] = digest;
    j["input_digests"] = digests;
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    atomic_write_file(path, j.dump(2) + "\n");
}

}  // namespace phrasevec
