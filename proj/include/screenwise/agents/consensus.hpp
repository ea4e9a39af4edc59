#pragma once

#include <set>
#include <string>
#include <vector>

#include "screenwise/agents/signals.hpp"
#include "screenwise/core/error.hpp"

namespace screenwise {

/// What a two-agent ensemble does when its signed intersection has at most
/// one asset.
struct ConsensusFallback {
    enum class Kind { Union, DesignatedAgent };
    Kind kind = Kind::Union;
    std::size_t agent = 0;

    static ConsensusFallback union_of_agents() { return {}; }
    static ConsensusFallback designated(std::size_t index) { return {Kind::DesignatedAgent, index}; }
};

struct ConsensusResult {
    SignalSet signals;
    std::size_t intersection_size = 0;
    bool fallback_used = false;
    /// Assets excluded because agents disagreed on direction.
    std::size_t conflicts_dropped = 0;
};

/// Two agents: keep an asset iff both give it the same non-Hold action. When
/// that leaves at most one asset, fall back to the union (assets with a
/// Buy/Sell conflict stay excluded) or to a designated agent's set.
/// Three agents: keep an asset with action a iff at least two agents say a.
inline ConsensusResult combine_consensus(const std::vector<SignalSet>& sets,
                                         ConsensusFallback fallback = ConsensusFallback::union_of_agents()) {
    if (sets.size() != 2 && sets.size() != 3)
        throw Error(ErrorCode::InvalidValue,
                    "consensus needs 2 or 3 signal sets, got " + std::to_string(sets.size()));
    const Month date = sets.front().date();
    for (const auto& s : sets)
        if (s.date() != date)
            throw Error(ErrorCode::InvalidValue, "signal sets have mismatched dates: " + date.str() + " vs " +
                                                     s.date().str());

    std::set<std::string> candidates;
    for (const auto& s : sets)
        for (const auto& a : s.actionable_assets()) candidates.insert(a);

    ConsensusResult out{SignalSet(date), 0, false, 0};

    if (sets.size() == 3) {
        for (const auto& a : candidates) {
            int buys = 0, sells = 0;
            for (const auto& s : sets) {
                buys += s.get(a) == Signal::Buy;
                sells += s.get(a) == Signal::Sell;
            }
            if (buys >= 2) out.signals.set(a, Signal::Buy);
            else if (sells >= 2) out.signals.set(a, Signal::Sell);
            else if (buys > 0 && sells > 0) ++out.conflicts_dropped;
        }
        out.intersection_size = out.signals.actionable().size();
        return out;
    }

    std::size_t conflicts = 0;
    SignalSet intersection(date), united(date);
    for (const auto& a : candidates) {
        const Signal s1 = sets[0].get(a), s2 = sets[1].get(a);
        if (s1 != Signal::Hold && s2 != Signal::Hold && s1 != s2) {
            ++conflicts;
            continue;
        }
        if (s1 == s2) intersection.set(a, s1);
        united.set(a, s1 != Signal::Hold ? s1 : s2);
    }
    out.intersection_size = intersection.all().size();
    out.conflicts_dropped = conflicts;
    if (out.intersection_size > 1) {
        out.signals = std::move(intersection);
        return out;
    }
    out.fallback_used = true;
    if (fallback.kind == ConsensusFallback::Kind::Union) {
        out.signals = std::move(united);
    } else {
        if (fallback.agent >= sets.size())
            throw Error(ErrorCode::InvalidValue, "designated fallback agent index out of range");
        out.signals = SignalSet(date, sets[fallback.agent].actionable());
        out.conflicts_dropped = 0;
    }
    return out;
}

}  // namespace screenwise
