#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "screenwise/core/error.hpp"
#include "screenwise/data/characteristics.hpp"

namespace screenwise {

/// Empirical quantile taken as the order statistic nearest to rank
/// (N-1)q, rounding ties to even. Because the result is always an observed
/// value, clipping at these quantiles is idempotent.
inline double nearest_rank_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::Degenerate, "quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * q;
    const auto k = static_cast<std::size_t>(std::nearbyint(h));
    return values[std::min(k, values.size() - 1)];
}

struct StandardizeOptions {
    double lower_quantile = 0.01;
    double upper_quantile = 0.99;
};

/// Cross-sectional cleaning of a raw characteristics panel, per (date,
/// feature) group: clip to the 1st/99th percentiles, z-score with the
/// (N-1) standard deviation over observed values, then set missing entries
/// to exactly 0 (the cross-sectional mean) with `imputed = true`.
///
/// An asset present at a date but lacking a feature entry counts as missing.
inline CharacteristicsPanel winsorize_standardize(const CharacteristicsPanel& raw,
                                                  const StandardizeOptions& opts = {}) {
    CharacteristicsPanel out;
    const auto features = raw.features();
    for (Month date : raw.dates()) {
        const auto* rows = raw.at(date);
        for (const auto& feature : features) {
            std::vector<std::string> observed_assets;
            std::vector<double> values;
            for (const auto& [asset, row] : *rows) {
                auto it = row.find(feature);
                if (it != row.end() && it->second.value) {
                    observed_assets.push_back(asset);
                    values.push_back(*it->second.value);
                }
            }
            const std::string group = "(" + date.str() + ", " + feature + ")";
            if (values.size() < 2)
                throw Error(ErrorCode::Degenerate, "group " + group + " has fewer than 2 observed values");

            const double lo = nearest_rank_quantile(values, opts.lower_quantile);
            const double hi = nearest_rank_quantile(values, opts.upper_quantile);
            for (auto& v : values) v = std::clamp(v, lo, hi);

            const double n = static_cast<double>(values.size());
            const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / (n - 1.0));
            if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(mean)))
                throw Error(ErrorCode::Degenerate, "group " + group + " has zero variance after winsorization");

            for (std::size_t i = 0; i < values.size(); ++i)
                out.set(date, observed_assets[i], feature, (values[i] - mean) / sd, false);
            for (const auto& [asset, row] : *rows) {
                auto it = row.find(feature);
                if (it == row.end() || !it->second.value) out.set(date, asset, feature, 0.0, true);
            }
        }
    }
    return out;
}

}  // namespace screenwise
