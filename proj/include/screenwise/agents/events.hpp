#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "screenwise/agents/signals.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/text.hpp"

namespace screenwise {

/// A dated score for one asset: a news article's sentiment (positive minus
/// negative probability) or an analyst's recommendation level.
struct ScoredEvent {
    std::string asset;
    std::chrono::year_month_day timestamp;
    double value = 0.0;
};

/// Sum of event values, each discounted by 2^(-age / half_life) where age is
/// the number of days from the event to `month_end`.
inline double decay_weighted_sum(const std::vector<ScoredEvent>& events, std::chrono::year_month_day month_end,
                                 double half_life_days) {
    if (!(half_life_days > 0.0)) throw Error(ErrorCode::InvalidValue, "half-life must be positive");
    double total = 0.0;
    for (const auto& e : events) {
        const long age = days_between(e.timestamp, month_end);
        if (age < 0)
            throw Error(ErrorCode::InvalidValue, "event for " + e.asset + " dated " + format_date(e.timestamp) +
                                                     " is after month end " + format_date(month_end));
        total += e.value * std::exp2(-static_cast<double>(age) / half_life_days);
    }
    return total;
}

inline std::map<std::string, std::vector<ScoredEvent>> group_by_asset(const std::vector<ScoredEvent>& events) {
    std::map<std::string, std::vector<ScoredEvent>> out;
    for (const auto& e : events) out[e.asset].push_back(e);
    return out;
}

/// Events whose timestamp falls inside month `m`.
inline std::vector<ScoredEvent> events_in_month(const std::vector<ScoredEvent>& events, Month m) {
    std::vector<ScoredEvent> out;
    for (const auto& e : events)
        if (Month::of(e.timestamp) == m) out.push_back(e);
    return out;
}

struct DecayAgentOptions {
    double half_life_days = 7.0;
    double threshold = 0.1;
};

struct AnalystOptions {
    double half_life_days = 7.0;
    double threshold = 0.5;
};

/// Buy when an asset's decayed sentiment exceeds the threshold, Sell when it
/// is below minus the threshold; both strict. Assets in `universe` without
/// events are Hold.
inline SignalSet sentiment_agent(const std::vector<ScoredEvent>& month_events, Month month,
                                 const std::vector<std::string>& universe = {},
                                 const DecayAgentOptions& opts = {}) {
    SignalSet out(month);
    for (const auto& a : universe) out.set(a, Signal::Hold);
    const auto end = month.last_day();
    for (const auto& [asset, evs] : group_by_asset(month_events)) {
        const double score = decay_weighted_sum(evs, end, opts.half_life_days);
        out.set(asset, score > opts.threshold ? Signal::Buy : score < -opts.threshold ? Signal::Sell : Signal::Hold);
    }
    return out;
}

/// Change in the decayed recommendation sum from the previous month to the
/// current one. A rise above the threshold is a Sell and a fall below minus
/// the threshold is a Buy (higher recommendation levels are more bearish).
inline SignalSet analyst_agent(const std::vector<ScoredEvent>& current, const std::vector<ScoredEvent>& previous,
                               Month month, const std::vector<std::string>& universe = {},
                               const AnalystOptions& opts = {}) {
    SignalSet out(month);
    for (const auto& a : universe) out.set(a, Signal::Hold);
    const auto cur = group_by_asset(current);
    const auto prev = group_by_asset(previous);
    std::map<std::string, double> delta;
    for (const auto& [asset, evs] : cur) delta[asset] += decay_weighted_sum(evs, month.last_day(), opts.half_life_days);
    for (const auto& [asset, evs] : prev)
        delta[asset] -= decay_weighted_sum(evs, (month - 1).last_day(), opts.half_life_days);
    for (const auto& [asset, d] : delta)
        out.set(asset, d > opts.threshold ? Signal::Sell : d < -opts.threshold ? Signal::Buy : Signal::Hold);
    return out;
}

/// Reads `date,asset,<value_column>` with day-level dates.
inline std::vector<ScoredEvent> read_scored_events(std::istream& in, const std::string& value_column,
                                                   const std::string& source) {
    DelimitedReader reader(in, source);
    reader.expect_header({"date", "asset", value_column});
    std::vector<ScoredEvent> out;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(f.size()));
        ScoredEvent e;
        try {
            e.timestamp = parse_date(f[0]);
        } catch (const Error& err) {
            reader.fail(err.what());
        }
        if (f[1].empty()) reader.fail("empty asset identifier");
        e.asset = std::string(f[1]);
        if (!parse_double(f[2], e.value) || !std::isfinite(e.value))
            reader.fail("bad " + value_column + " '" + std::string(f[2]) + "'");
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<ScoredEvent> load_sentiment_events(const std::string& path) {
    auto in = open_input(path);
    return read_scored_events(in, "score", path);
}

inline std::vector<ScoredEvent> load_analyst_events(const std::string& path) {
    auto in = open_input(path);
    return read_scored_events(in, "recommendation", path);
}

}  // namespace screenwise
