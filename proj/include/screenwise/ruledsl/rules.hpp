#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "screenwise/agents/signals.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/text.hpp"
#include "screenwise/data/characteristics.hpp"
#include "screenwise/ruledsl/evaluate.hpp"
#include "screenwise/ruledsl/parser.hpp"

namespace screenwise::ruledsl {

/// Buy and sell rules valid over the closed month range [effective_from,
/// effective_to].
struct RulePair {
    RuleExpr buy;
    RuleExpr sell;
    Month effective_from;
    Month effective_to;
    std::string buy_text;
    std::string sell_text;

    bool covers(Month m) const { return effective_from <= m && m <= effective_to; }
};

inline RulePair make_rule_pair(std::string_view buy, std::string_view sell, Month from, Month to) {
    if (to < from)
        throw Error(ErrorCode::InvalidValue, "rule effective_to " + to.str() + " precedes effective_from " + from.str());
    return RulePair{parse_rule(buy), parse_rule(sell), from, to, std::string(buy), std::string(sell)};
}

struct RuleApplication {
    SignalSet signals;
    /// Assets that satisfied both rules and were resolved to Buy.
    std::vector<std::string> overlaps;
};

/// Buy if the buy rule holds, else Sell if the sell rule holds, else Hold.
inline RuleApplication apply_rules(const RulePair& rules, Month date,
                                   const std::map<std::string, FeatureRow>& cross_section) {
    RuleApplication out{SignalSet(date), {}};
    for (const auto& [asset, row] : cross_section) {
        bool buy = false, sell = false;
        try {
            buy = evaluate_rule(rules.buy, row);
            sell = evaluate_rule(rules.sell, row);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " for asset " + asset + " at " + date.str());
        }
        if (buy && sell) out.overlaps.push_back(asset);
        out.signals.set(asset, buy ? Signal::Buy : sell ? Signal::Sell : Signal::Hold);
    }
    return out;
}

/// Time-ordered collection of rule pairs, one per effective period.
class RuleSchedule {
public:
    void add(RulePair pair) { pairs_.push_back(std::move(pair)); }

    const std::vector<RulePair>& pairs() const { return pairs_; }
    bool empty() const { return pairs_.empty(); }

    /// The unique rule pair covering `m`; zero or several is an error.
    const RulePair& effective_at(Month m) const {
        const RulePair* hit = nullptr;
        for (const auto& p : pairs_) {
            if (!p.covers(m)) continue;
            if (hit)
                throw Error(ErrorCode::InvalidValue, "ambiguous rules: more than one rule pair covers " + m.str());
            hit = &p;
        }
        if (!hit) throw Error(ErrorCode::NotFound, "no rule pair covers " + m.str());
        return *hit;
    }

private:
    std::vector<RulePair> pairs_;
};

/// Reads a rule file: JSON Lines, one object per effective period with
/// string fields `effective_from`, `effective_to` (YYYY-MM), `buy`, `sell`.
/// Blank lines and lines starting with '#' are skipped.
inline RuleSchedule read_rule_schedule(std::istream& in, const std::string& source = "<rules>") {
    RuleSchedule schedule;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(t);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, where + "invalid JSON: " + e.what());
        }
        for (const char* key : {"effective_from", "effective_to", "buy", "sell"})
            if (!rec.contains(key) || !rec[key].is_string())
                throw ParseError(line_no, where + "missing string field '" + key + "'");
        try {
            schedule.add(make_rule_pair(rec["buy"].get<std::string>(), rec["sell"].get<std::string>(),
                                        Month::parse(rec["effective_from"].get<std::string>()),
                                        Month::parse(rec["effective_to"].get<std::string>())));
        } catch (const ParseError& e) {
            throw ParseError(line_no, where + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), where + e.what());
        }
    }
    return schedule;
}

inline RuleSchedule load_rule_schedule(const std::string& path) {
    auto in = open_input(path);
    return read_rule_schedule(in, path);
}

inline void write_rule_schedule(std::ostream& out, const RuleSchedule& schedule) {
    for (const auto& p : schedule.pairs()) {
        nlohmann::ordered_json rec;
        rec["effective_from"] = p.effective_from.str();
        rec["effective_to"] = p.effective_to.str();
        rec["buy"] = p.buy_text.empty() ? to_string(p.buy) : p.buy_text;
        rec["sell"] = p.sell_text.empty() ? to_string(p.sell) : p.sell_text;
        out << rec.dump() << '\n';
    }
}

}  // namespace screenwise::ruledsl
