#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "screenwise/agents/signals.hpp"
#include "screenwise/core/error.hpp"

namespace screenwise {

/// Number of names per leg: 30% of the universe rounded up (150 of 500).
inline std::size_t novy_marx_leg_size(std::size_t universe_size) { return (3 * universe_size + 9) / 10; }

/// Ordinal ranks 1..N, ascending in value, ties by identifier.
inline std::map<std::string, std::size_t> ordinal_ranks(const std::map<std::string, double>& values) {
    std::vector<std::pair<std::string, double>> v(values.begin(), values.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out[v[i].first] = i + 1;
    return out;
}

/// Profitability-plus-value screen: rank each metric (higher is better), sum
/// the ranks, Buy the top legs and Sell the bottom legs.
inline SignalSet novy_marx_agent(const std::map<std::string, double>& profitability,
                                 const std::map<std::string, double>& book_to_market, std::size_t universe_size,
                                 Month date) {
    std::map<std::string, double> prof, bm;
    for (const auto& [a, v] : profitability)
        if (book_to_market.count(a)) prof[a] = v;
    for (const auto& [a, v] : book_to_market)
        if (profitability.count(a)) bm[a] = v;

    const std::size_t leg = novy_marx_leg_size(universe_size);
    if (prof.size() < 2 * leg)
        throw Error(ErrorCode::InvalidValue, "novy-marx screen needs " + std::to_string(2 * leg) +
                                                 " ranked assets, got " + std::to_string(prof.size()));

    const auto rp = ordinal_ranks(prof);
    const auto rb = ordinal_ranks(bm);
    std::vector<std::pair<std::string, std::size_t>> combined;
    for (const auto& [a, r] : rp) combined.emplace_back(a, r + rb.at(a));
    // Identifier order breaks ties: the map iteration above is already sorted.
    std::stable_sort(combined.begin(), combined.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    SignalSet out(date);
    for (std::size_t i = 0; i < combined.size(); ++i) {
        Signal s = Signal::Hold;
        if (i < leg) s = Signal::Buy;
        else if (i >= combined.size() - leg) s = Signal::Sell;
        out.set(combined[i].first, s);
    }
    return out;
}

}  // namespace screenwise
