#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/core/error.hpp"

namespace screenwise {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

/// Strict decimal parse: the whole field must be consumed.
inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Shortest representation that round-trips; used for every number written
/// to output files so repeated runs are byte-identical.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Line-oriented reader for the comma-delimited input files. Validates the
/// header and reports one-based line numbers in errors.
class DelimitedReader {
public:
    DelimitedReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    void expect_header(const std::vector<std::string>& expected) {
        std::string line;
        if (!std::getline(in_, line)) fail(1, "empty file");
        line_no_ = 1;
        auto fields = split(line);
        if (fields.size() != expected.size()) fail(1, "unexpected header '" + line + "'");
        for (std::size_t i = 0; i < expected.size(); ++i)
            if (fields[i] != expected[i])
                fail(1, "header column " + std::to_string(i + 1) + " should be '" + expected[i] + "'");
    }

    /// Reads the header row verbatim (for files whose trailing columns vary).
    std::vector<std::string> read_header() {
        std::string line;
        if (!std::getline(in_, line)) fail(1, "empty file");
        line_no_ = 1;
        std::vector<std::string> out;
        for (auto f : split(line)) out.emplace_back(f);
        return out;
    }

    /// Next non-blank row, or false at end of input.
    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in_, buffer_)) {
            ++line_no_;
            if (trim(buffer_).empty()) continue;
            fields = split(buffer_);
            return true;
        }
        return false;
    }

    std::size_t line() const { return line_no_; }

    [[noreturn]] void fail(std::size_t line, const std::string& what) const {
        throw ParseError(line, source_ + ":" + std::to_string(line) + ": " + what);
    }
    [[noreturn]] void fail(const std::string& what) const { fail(line_no_, what); }

private:
    std::istream& in_;
    std::string source_;
    std::string buffer_;
    std::size_t line_no_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return in;
}

}  // namespace screenwise
