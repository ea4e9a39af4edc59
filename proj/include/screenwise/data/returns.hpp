#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/text.hpp"

namespace screenwise {

struct ReturnObservation {
    Month date;
    std::string asset;
    double ret = 0.0;

    bool operator==(const ReturnObservation&) const = default;
};

/// Long-format monthly simple returns keyed by (date, asset).
///
/// At most one observation per key; every return is finite and > -1. Gaps in
/// an asset's history are allowed and are treated as membership boundaries.
class ReturnsPanel {
public:
    void add(Month date, const std::string& asset, double ret) {
        if (!std::isfinite(ret) || ret <= -1.0)
            throw Error(ErrorCode::InvalidValue, "return for (" + date.str() + ", " + asset +
                                                     ") must be finite and > -1, got " + format_double(ret));
        auto& series = by_asset_[asset];
        if (!series.emplace(date, ret).second)
            throw Error(ErrorCode::DuplicateKey, "duplicate observation for (" + date.str() + ", " + asset + ")");
        dates_.insert(date);
        ++size_;
    }

    std::optional<double> get(const std::string& asset, Month date) const {
        auto a = by_asset_.find(asset);
        if (a == by_asset_.end()) return std::nullopt;
        auto it = a->second.find(date);
        if (it == a->second.end()) return std::nullopt;
        return it->second;
    }

    bool has_date(Month date) const { return dates_.count(date) > 0; }
    bool has_asset(const std::string& asset) const { return by_asset_.count(asset) > 0; }

    std::vector<std::string> assets() const {
        std::vector<std::string> out;
        out.reserve(by_asset_.size());
        for (const auto& [a, _] : by_asset_) out.push_back(a);
        return out;
    }

    /// Assets with an observation at `date`, in identifier order.
    std::vector<std::string> assets_at(Month date) const {
        std::vector<std::string> out;
        for (const auto& [a, series] : by_asset_)
            if (series.count(date)) out.push_back(a);
        return out;
    }

    std::vector<Month> dates() const { return {dates_.begin(), dates_.end()}; }
    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    const std::map<Month, double>* series(const std::string& asset) const {
        auto it = by_asset_.find(asset);
        return it == by_asset_.end() ? nullptr : &it->second;
    }

    std::vector<ReturnObservation> observations() const {
        std::vector<ReturnObservation> out;
        out.reserve(size_);
        for (const auto& [a, series] : by_asset_)
            for (const auto& [d, r] : series) out.push_back({d, a, r});
        return out;
    }

    /// Copy restricted to dates <= `last`.
    ReturnsPanel through(Month last) const {
        ReturnsPanel out;
        for (const auto& [a, series] : by_asset_)
            for (auto it = series.begin(); it != series.end() && it->first <= last; ++it)
                out.add(it->first, a, it->second);
        return out;
    }

private:
    std::map<std::string, std::map<Month, double>> by_asset_;
    std::set<Month> dates_;
    std::size_t size_ = 0;
};

/// Reads the `date,asset,ret` format. Errors carry the offending line number.
inline ReturnsPanel read_returns_panel(std::istream& in, const std::string& source = "<returns>") {
    DelimitedReader reader(in, source);
    reader.expect_header({"date", "asset", "ret"});
    ReturnsPanel panel;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(f.size()));
        Month date;
        try {
            date = Month::parse(f[0]);
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        if (f[1].empty()) reader.fail("empty asset identifier");
        double r = 0.0;
        if (!parse_double(f[2], r)) reader.fail("bad return '" + std::string(f[2]) + "'");
        try {
            panel.add(date, std::string(f[1]), r);
        } catch (const Error& e) {
            throw Error(e.code(), source + ":" + std::to_string(reader.line()) + ": " + e.what());
        }
    }
    return panel;
}

inline ReturnsPanel load_returns_panel(const std::string& path) {
    auto in = open_input(path);
    return read_returns_panel(in, path);
}

}  // namespace screenwise
