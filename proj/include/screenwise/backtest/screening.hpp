#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/agents/consensus.hpp"
#include "screenwise/agents/events.hpp"
#include "screenwise/agents/logistic.hpp"
#include "screenwise/agents/novy_marx.hpp"
#include "screenwise/agents/rule_agent.hpp"
#include "screenwise/agents/signals.hpp"
#include "screenwise/backtest/bundle.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/data/standardize.hpp"

namespace screenwise {

enum class AgentKind { Rules, Sentiment, Analyst, Logistic, NovyMarx };

constexpr std::string_view agent_name(AgentKind a) {
    switch (a) {
    case AgentKind::Rules: return "rules";
    case AgentKind::Sentiment: return "sentiment";
    case AgentKind::Analyst: return "analyst";
    case AgentKind::Logistic: return "logistic";
    case AgentKind::NovyMarx: return "novymarx";
    }
    return "?";
}

inline AgentKind parse_agent(std::string_view name) {
    for (auto a : {AgentKind::Rules, AgentKind::Sentiment, AgentKind::Analyst, AgentKind::Logistic,
                   AgentKind::NovyMarx})
        if (agent_name(a) == name) return a;
    throw Error(ErrorCode::Config,
                "unknown agent '" + std::string(name) + "' (rules, sentiment, analyst, logistic, novymarx)");
}

struct ScreeningConfig {
    std::vector<AgentKind> agents{AgentKind::Rules, AgentKind::Sentiment};
    ConsensusFallback fallback;
    DecayAgentOptions sentiment;
    AnalystOptions analyst;
    LogisticOptions logistic;
    int logistic_window = 1;
    StandardizeOptions standardize;
    std::string profitability_feature = "gp";
    std::string value_feature = "bm";

    void validate() const {
        if (agents.empty() || agents.size() > 3) throw Error(ErrorCode::Config, "agent ensemble needs 1 to 3 agents");
        if (fallback.kind == ConsensusFallback::Kind::DesignatedAgent && fallback.agent >= agents.size())
            throw Error(ErrorCode::Config, "fallback agent is not in the ensemble");
        if (logistic_window < 1) throw Error(ErrorCode::Config, "logistic_window must be >= 1");
    }
};

struct ScreenResult {
    Month date;
    std::vector<SignalSet> agent_signals;
    SignalSet signals;
    std::size_t intersection_size = 0;
    bool fallback_used = false;
    std::size_t conflicts_dropped = 0;
    std::vector<std::string> notes;
};

namespace detail {

inline std::map<std::string, FeatureRow> listed_rows(const CharacteristicsPanel& standardized, Month date,
                                                     const ReturnsPanel& returns) {
    std::map<std::string, FeatureRow> out;
    for (auto& [asset, row] : standardized.cross_section(date))
        if (returns.get(asset, date)) out.emplace(asset, std::move(row));
    return out;
}

}  // namespace detail

/// Runs the agent ensemble on a view holding data through `t` only.
inline ScreenResult screen_assets(const DataBundle& view, Month t, const ScreeningConfig& cfg) {
    cfg.validate();
    ScreenResult out{t, {}, SignalSet(t), 0, false, 0, {}};
    const auto listed = view.returns.assets_at(t);

    bool needs_std = false;
    for (auto a : cfg.agents) needs_std |= a == AgentKind::Rules || a == AgentKind::Logistic;
    CharacteristicsPanel standardized;
    if (needs_std) {
        if (!view.characteristics.has_date(t))
            throw Error(ErrorCode::NotFound, "no characteristics for " + t.str());
        const int back = cfg.logistic_window;
        standardized = winsorize_standardize(view.characteristics.between(t - back, t), cfg.standardize);
    }

    for (auto agent : cfg.agents) {
        switch (agent) {
        case AgentKind::Rules: {
            if (!view.rules) throw Error(ErrorCode::Config, "rules agent needs a rules file");
            auto app = rule_agent(*view.rules, t, detail::listed_rows(standardized, t, view.returns));
            if (!app.overlaps.empty())
                out.notes.push_back("rules: " + std::to_string(app.overlaps.size()) + " buy/sell overlaps");
            out.agent_signals.push_back(std::move(app.signals));
            break;
        }
        case AgentKind::Sentiment:
            out.agent_signals.push_back(sentiment_agent(events_in_month(view.sentiment, t), t, listed, cfg.sentiment));
            break;
        case AgentKind::Analyst:
            out.agent_signals.push_back(analyst_agent(events_in_month(view.analyst, t),
                                                      events_in_month(view.analyst, t - 1), t, listed, cfg.analyst));
            break;
        case AgentKind::Logistic: {
            std::vector<LabeledRow> train;
            for (int lag = 1; lag <= cfg.logistic_window; ++lag) {
                const Month d = t - lag;
                for (auto& [asset, row] : standardized.cross_section(d)) {
                    auto next = view.returns.get(asset, d + 1);
                    if (next) train.push_back({std::move(row), *next > 0.0});
                }
            }
            out.agent_signals.push_back(logistic_agent(train, standardized.features(),
                                                       detail::listed_rows(standardized, t, view.returns), t,
                                                       cfg.logistic));
            break;
        }
        case AgentKind::NovyMarx: {
            std::map<std::string, double> prof, bm;
            for (const auto& asset : listed) {
                if (auto v = view.characteristics.value(t, asset, cfg.profitability_feature)) prof[asset] = *v;
                if (auto v = view.characteristics.value(t, asset, cfg.value_feature)) bm[asset] = *v;
            }
            std::size_t both = 0;
            for (const auto& [a, _] : prof) both += bm.count(a);
            out.agent_signals.push_back(novy_marx_agent(prof, bm, both, t));
            break;
        }
        }
    }

    if (out.agent_signals.size() == 1) {
        out.signals = out.agent_signals.front();
        out.intersection_size = out.signals.actionable().size();
    } else {
        auto c = combine_consensus(out.agent_signals, cfg.fallback);
        out.signals = std::move(c.signals);
        out.intersection_size = c.intersection_size;
        out.fallback_used = c.fallback_used;
        out.conflicts_dropped = c.conflicts_dropped;
    }
    return out;
}

}  // namespace screenwise
