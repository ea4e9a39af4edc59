#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"

namespace screenwise {

enum class Signal { Hold = 0, Buy = 1, Sell = 2 };

constexpr std::string_view to_string(Signal s) {
    switch (s) {
    case Signal::Buy: return "buy";
    case Signal::Sell: return "sell";
    case Signal::Hold: return "hold";
    }
    return "hold";
}

inline Signal parse_signal(std::string_view text) {
    if (text == "buy" || text == "Buy" || text == "BUY") return Signal::Buy;
    if (text == "sell" || text == "Sell" || text == "SELL") return Signal::Sell;
    if (text == "hold" || text == "Hold" || text == "HOLD") return Signal::Hold;
    throw Error(ErrorCode::InvalidValue, "unknown signal '" + std::string(text) + "'");
}

/// Per-date asset -> action map. Assets without an entry are Hold. Agents
/// record explicit Hold entries for the assets they evaluated; comparisons
/// only look at the actionable (non-Hold) part.
class SignalSet {
public:
    SignalSet() = default;
    explicit SignalSet(Month date) : date_(date) {}
    SignalSet(Month date, std::map<std::string, Signal> signals) : date_(date), signals_(std::move(signals)) {}

    Month date() const { return date_; }

    void set(const std::string& asset, Signal s) { signals_[asset] = s; }

    Signal get(const std::string& asset) const {
        auto it = signals_.find(asset);
        return it == signals_.end() ? Signal::Hold : it->second;
    }

    const std::map<std::string, Signal>& all() const { return signals_; }

    std::map<std::string, Signal> actionable() const {
        std::map<std::string, Signal> out;
        for (const auto& [a, s] : signals_)
            if (s != Signal::Hold) out.emplace(a, s);
        return out;
    }

    std::vector<std::string> actionable_assets() const {
        std::vector<std::string> out;
        for (const auto& [a, s] : signals_)
            if (s != Signal::Hold) out.push_back(a);
        return out;
    }

    std::size_t count(Signal s) const {
        std::size_t n = 0;
        for (const auto& [a, v] : signals_) n += (v == s);
        return n;
    }

    bool operator==(const SignalSet& other) const {
        return date_ == other.date_ && actionable() == other.actionable();
    }

private:
    Month date_;
    std::map<std::string, Signal> signals_;
};

}  // namespace screenwise
