#pragma once

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/text.hpp"

namespace screenwise {

/// `key = value` text with `#` comments. Keys are unique; typed getters
/// raise E_CONFIG naming the key.
class KeyValueConfig {
public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string required(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end() || it->second.empty()) throw Error(ErrorCode::Config, "missing required key '" + key + "'");
        return it->second;
    }

    double number(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        double v = 0.0;
        if (!parse_double(it->second, v)) bad(key, "a number");
        return v;
    }

    long integer(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        double v = 0.0;
        if (!parse_double(it->second, v) || v != static_cast<double>(static_cast<long>(v))) bad(key, "an integer");
        return static_cast<long>(v);
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::uint64_t v = 0;
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) bad(key, "a non-negative integer");
        return v;
    }

    bool boolean(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const auto v = lowercase(it->second);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        bad(key, "true or false");
    }

    Month month(const std::string& key) const {
        try {
            return Month::parse(required(key));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Config) throw;
            bad(key, "a YYYY-MM month");
        }
    }

    std::vector<std::string> list(const std::string& key, const std::string& fallback) const {
        std::vector<std::string> out;
        const std::string raw = text(key, fallback);
        for (auto part : split(raw, ','))
            if (auto t = trim(part); !t.empty()) out.emplace_back(t);
        return out;
    }

    /// Rejects keys outside `known`.
    void check_keys(const std::set<std::string>& known) const {
        for (const auto& [k, _] : values_)
            if (!known.count(k)) throw Error(ErrorCode::Config, "unknown config key '" + k + "'");
    }

private:
    [[noreturn]] void bad(const std::string& key, const char* what) const {
        throw Error(ErrorCode::Config, "config key '" + key + "' must be " + what + ", got '" + values_.at(key) + "'");
    }

    std::map<std::string, std::string> values_;
};

inline KeyValueConfig read_key_value_config(std::istream& in, const std::string& source = "<config>") {
    KeyValueConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::Config, source + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(body.substr(0, eq)));
        if (key.empty()) throw Error(ErrorCode::Config, source + ":" + std::to_string(line_no) + ": empty key");
        if (cfg.has(key))
            throw Error(ErrorCode::Config, source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        cfg.set(key, std::string(trim(body.substr(eq + 1))));
    }
    return cfg;
}

inline KeyValueConfig load_key_value_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot open config '" + path + "'");
    return read_key_value_config(in, path);
}

}  // namespace screenwise
