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

/// Feature name -> value for one asset at one date.
using FeatureRow = std::map<std::string, double>;

struct CharacteristicValue {
    std::optional<double> value;
    bool imputed = false;

    bool operator==(const CharacteristicValue&) const = default;
};

/// Per (date, asset, feature) characteristic values. Raw panels may hold
/// missing entries; standardized panels hold z-scores with imputed entries
/// flagged.
class CharacteristicsPanel {
public:
    void set(Month date, const std::string& asset, const std::string& feature,
             std::optional<double> value, bool imputed = false) {
        auto& slot = data_[date][asset][feature];
        slot.value = value;
        slot.imputed = imputed;
        features_.insert(feature);
    }

    /// Like set(), but rejects a second entry for the same key.
    void add(Month date, const std::string& asset, const std::string& feature, std::optional<double> value) {
        auto& row = data_[date][asset];
        if (row.count(feature))
            throw Error(ErrorCode::DuplicateKey,
                        "duplicate characteristic (" + date.str() + ", " + asset + ", " + feature + ")");
        row[feature] = CharacteristicValue{value, false};
        features_.insert(feature);
    }

    const CharacteristicValue* find(Month date, const std::string& asset, const std::string& feature) const {
        auto d = data_.find(date);
        if (d == data_.end()) return nullptr;
        auto a = d->second.find(asset);
        if (a == d->second.end()) return nullptr;
        auto f = a->second.find(feature);
        return f == a->second.end() ? nullptr : &f->second;
    }

    std::optional<double> value(Month date, const std::string& asset, const std::string& feature) const {
        auto* v = find(date, asset, feature);
        return v ? v->value : std::nullopt;
    }

    std::vector<Month> dates() const {
        std::vector<Month> out;
        for (const auto& [d, _] : data_) out.push_back(d);
        return out;
    }

    std::vector<std::string> features() const { return {features_.begin(), features_.end()}; }

    std::vector<std::string> assets_at(Month date) const {
        std::vector<std::string> out;
        auto d = data_.find(date);
        if (d != data_.end())
            for (const auto& [a, _] : d->second) out.push_back(a);
        return out;
    }

    bool has_date(Month date) const { return data_.count(date) > 0; }

    /// Observed (non-missing) features of every asset at `date`.
    std::map<std::string, FeatureRow> cross_section(Month date) const {
        std::map<std::string, FeatureRow> out;
        auto d = data_.find(date);
        if (d == data_.end()) return out;
        for (const auto& [asset, row] : d->second) {
            auto& dst = out[asset];
            for (const auto& [feature, v] : row)
                if (v.value) dst[feature] = *v.value;
        }
        return out;
    }

    const std::map<std::string, std::map<std::string, CharacteristicValue>>* at(Month date) const {
        auto d = data_.find(date);
        return d == data_.end() ? nullptr : &d->second;
    }

    /// Copy restricted to dates in [first, last].
    CharacteristicsPanel between(Month first, Month last) const {
        CharacteristicsPanel out;
        for (auto it = data_.lower_bound(first); it != data_.end() && it->first <= last; ++it)
            out.data_.insert(*it);
        out.features_ = features_;
        return out;
    }

    CharacteristicsPanel through(Month last) const {
        CharacteristicsPanel out;
        for (const auto& [d, rows] : data_) {
            if (d > last) break;
            out.data_[d] = rows;
        }
        out.features_ = features_;
        return out;
    }

private:
    std::map<Month, std::map<std::string, std::map<std::string, CharacteristicValue>>> data_;
    std::set<std::string> features_;
};

/// Reads `date,asset,feature,value`; an empty value marks a missing entry.
inline CharacteristicsPanel read_characteristics_panel(std::istream& in,
                                                       const std::string& source = "<characteristics>") {
    DelimitedReader reader(in, source);
    reader.expect_header({"date", "asset", "feature", "value"});
    CharacteristicsPanel panel;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(f.size()));
        Month date;
        try {
            date = Month::parse(f[0]);
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        if (f[1].empty() || f[2].empty()) reader.fail("empty asset or feature");
        std::optional<double> value;
        if (!f[3].empty()) {
            double v = 0.0;
            if (!parse_double(f[3], v) || !std::isfinite(v)) reader.fail("bad value '" + std::string(f[3]) + "'");
            value = v;
        }
        try {
            panel.add(date, std::string(f[1]), std::string(f[2]), value);
        } catch (const Error& e) {
            throw Error(e.code(), source + ":" + std::to_string(reader.line()) + ": " + e.what());
        }
    }
    return panel;
}

inline CharacteristicsPanel load_characteristics_panel(const std::string& path) {
    auto in = open_input(path);
    return read_characteristics_panel(in, path);
}

}  // namespace screenwise
