#pragma once

#include <optional>
#include <string>
#include <vector>

#include "screenwise/agents/events.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/data/characteristics.hpp"
#include "screenwise/data/factors.hpp"
#include "screenwise/data/returns.hpp"
#include "screenwise/ruledsl/rules.hpp"

namespace screenwise {

/// Everything the pipeline reads. Agents and estimators only ever see a
/// view produced by through().
struct DataBundle {
    ReturnsPanel returns;
    CharacteristicsPanel characteristics;  // raw values
    std::optional<FactorSeries> factors;
    std::vector<ScoredEvent> sentiment;
    std::vector<ScoredEvent> analyst;
    std::optional<ruledsl::RuleSchedule> rules;

    /// Copy holding only information dated on or before the end of `t`.
    DataBundle through(Month t) const {
        DataBundle out;
        out.returns = returns.through(t);
        out.characteristics = characteristics.through(t);
        if (factors) out.factors = factors->through(t);
        const auto cutoff = std::chrono::sys_days{t.last_day()};
        for (const auto& e : sentiment)
            if (std::chrono::sys_days{e.timestamp} <= cutoff) out.sentiment.push_back(e);
        for (const auto& e : analyst)
            if (std::chrono::sys_days{e.timestamp} <= cutoff) out.analyst.push_back(e);
        out.rules = rules;
        return out;
    }
};

struct BundlePaths {
    std::string returns;
    std::string characteristics;
    std::string factors;
    std::string sentiment;
    std::string analyst;
    std::string rules;
};

/// Loads the files that are named; empty paths are skipped.
inline DataBundle load_bundle(const BundlePaths& paths) {
    if (paths.returns.empty()) throw Error(ErrorCode::Config, "a returns file is required");
    DataBundle b;
    b.returns = load_returns_panel(paths.returns);
    if (!paths.characteristics.empty()) b.characteristics = load_characteristics_panel(paths.characteristics);
    if (!paths.factors.empty()) b.factors = load_factor_series(paths.factors);
    if (!paths.sentiment.empty()) b.sentiment = load_sentiment_events(paths.sentiment);
    if (!paths.analyst.empty()) b.analyst = load_analyst_events(paths.analyst);
    if (!paths.rules.empty()) b.rules = ruledsl::load_rule_schedule(paths.rules);
    return b;
}

}  // namespace screenwise
