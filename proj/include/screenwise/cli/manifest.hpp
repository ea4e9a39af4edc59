#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "screenwise/core/config.hpp"
#include "screenwise/core/error.hpp"

namespace screenwise::cli {

inline constexpr const char* tool_version = "0.1.0";

/// Hex SHA-256 of a file's bytes.
inline std::string file_sha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error(ErrorCode::Io, "sha256 unavailable");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Run record: config snapshot, input digests, version, seed, timestamps.
class RunManifest {
public:
    RunManifest(std::string command, const KeyValueConfig& config, std::uint64_t seed) {
        doc_["tool"] = "screenwise";
        doc_["version"] = tool_version;
        doc_["command"] = std::move(command);
        doc_["seed"] = seed;
        doc_["started"] = utc_timestamp();
        doc_["config"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : config.values()) doc_["config"][k] = v;
        doc_["inputs"] = nlohmann::ordered_json::object();
        doc_["outputs"] = nlohmann::ordered_json::array();
    }

    void add_input(const std::string& role, const std::string& path) {
        doc_["inputs"][role] = {{"path", path}, {"sha256", file_sha256(path)}};
    }

    void add_output(const std::string& path) { doc_["outputs"].push_back(path); }

    void set(const std::string& key, nlohmann::ordered_json value) { doc_[key] = std::move(value); }

    const nlohmann::ordered_json& json() const { return doc_; }

    void write(const std::string& path) {
        doc_["finished"] = utc_timestamp();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write manifest '" + path + "'");
        out << doc_.dump(2) << '\n';
    }

private:
    nlohmann::ordered_json doc_;
};

}  // namespace screenwise::cli
