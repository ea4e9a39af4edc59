#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "screenwise/backtest/bundle.hpp"
#include "screenwise/backtest/config.hpp"
#include "screenwise/backtest/performance.hpp"
#include "screenwise/backtest/screening.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/rng.hpp"
#include "screenwise/data/window.hpp"
#include "screenwise/portfolio/weights.hpp"
#include "screenwise/precision/dispatch.hpp"

namespace screenwise {

/// An estimator or weighting step failed under the abort policy.
class EstimatorFailure : public Error {
public:
    EstimatorFailure(ErrorCode cause, const std::string& message) : Error(cause, message) {}
};

struct MonthRecord {
    Month date;
    double gross = 0.0;
    double net = 0.0;
    double turnover = 0.0;
    double establishment_cost = 0.0;
    std::size_t p_hat = 0;
    std::vector<std::string> assets;  // held over the month
    std::vector<std::string> flags;
};

struct CellResult {
    PrecisionMethod method;
    Objective objective;
    std::vector<MonthRecord> monthly;
    std::optional<PerformanceSummary> summary;
    std::string summary_note;

    std::vector<double> net_series() const {
        std::vector<double> out;
        for (const auto& r : monthly) out.push_back(r.net);
        return out;
    }
};

struct AuditRecord {
    Month date;  // decision month
    std::vector<std::size_t> agent_actionable;
    std::size_t screened = 0;
    std::size_t intersection_size = 0;
    bool fallback_used = false;
    std::size_t conflicts_dropped = 0;
    std::size_t window_assets = 0;
    std::vector<std::string> dropped;
    std::vector<std::string> flags;
};

struct BacktestReport {
    std::vector<CellResult> cells;
    std::vector<AuditRecord> audit;

    const CellResult& cell(PrecisionMethod m, Objective o) const {
        for (const auto& c : cells)
            if (c.method == m && c.objective == o) return c;
        throw Error(ErrorCode::NotFound, "no backtest cell for that method and objective");
    }
};

/// Portfolios chosen at one decision date, one per (method, objective).
struct Decision {
    std::vector<Holdings> weights;
    std::vector<std::vector<std::string>> flags;
    AuditRecord audit;
};

/// Screens, estimates and weights using only data through `t`.
inline Decision decide(const DataBundle& full, Month t, const BacktestConfig& cfg) {
    const std::size_t cells = cfg.methods.size() * cfg.objectives.size();
    Decision d;
    d.weights.resize(cells);
    d.flags.resize(cells);
    d.audit.date = t;
    auto flag_all = [&](const std::string& f) {
        for (auto& fl : d.flags) fl.push_back(f);
        d.audit.flags.push_back(f);
    };

    const DataBundle view = full.through(t);
    if (!view.returns.has_date(t)) throw Error(ErrorCode::NotFound, "returns panel has no data for " + t.str());
    const auto screen = screen_assets(view, t, cfg.screening);
    for (const auto& s : screen.agent_signals) d.audit.agent_actionable.push_back(s.actionable().size());
    d.audit.intersection_size = screen.intersection_size;
    d.audit.fallback_used = screen.fallback_used;
    d.audit.conflicts_dropped = screen.conflicts_dropped;
    for (const auto& n : screen.notes) d.audit.flags.push_back(n);
    const auto screened = screen.signals.actionable_assets();
    d.audit.screened = screened.size();
    if (screened.empty()) {
        flag_all("cash:empty_screen");
        return d;
    }

    WindowResult window;
    try {
        window = align_window(view.returns, t, cfg.train_window, screened);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Degenerate) throw;
        flag_all("cash:no_full_coverage");
        return d;
    }
    d.audit.window_assets = window.matrix.assets.size();
    d.audit.dropped = window.dropped;
    const auto& r = window.matrix;

    std::optional<FactorPanel> factors;
    for (auto m : cfg.methods)
        if (needs_factors(m) && !factors) {
            if (!view.factors) throw Error(ErrorCode::Config, "methods rnw and deep need a factor file");
            factors = view.factors->window(r.dates);
        }

    PrecisionConfig pc = cfg.precision;
    pc.deep.seed = SeedSplitter(cfg.seed).seed("precision.deep", static_cast<std::uint64_t>(t.index()));
    const MeanEstimate mu = estimate_mean(r);

    auto fail = [&](std::size_t cell, const std::string& what, const Error& e) {
        if (cfg.on_failure == FailurePolicy::Abort)
            throw EstimatorFailure(e.code(), t.str() + " " + what + ": " + e.what());
        d.weights[cell].clear();
        d.flags[cell].push_back("cash:failed:" + std::string(to_string(e.code())));
        d.audit.flags.push_back(what + ": " + e.what());
    };

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const auto method = cfg.methods[mi];
        const std::size_t base = mi * cfg.objectives.size();
        if (r.assets.size() == 1) {
            for (std::size_t oi = 0; oi < cfg.objectives.size(); ++oi) {
                d.weights[base + oi][r.assets.front()] = 1.0;
                d.flags[base + oi].push_back("single_asset");
            }
            continue;
        }
        std::optional<PrecisionEstimate> gamma;
        try {
            gamma = estimate_precision(method, r, factors ? &*factors : nullptr, pc);
        } catch (const EstimatorFailure&) {
            throw;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Config) throw;
            for (std::size_t oi = 0; oi < cfg.objectives.size(); ++oi)
                fail(base + oi, std::string(method_name(method)), e);
            continue;
        }
        for (std::size_t oi = 0; oi < cfg.objectives.size(); ++oi) {
            const auto objective = cfg.objectives[oi];
            try {
                d.weights[base + oi] = portfolio_weights(objective, *gamma, mu, cfg.rho).as_map();
            } catch (const EstimatorFailure&) {
                throw;
            } catch (const Error& e) {
                fail(base + oi, std::string(method_name(method)) + "/" + std::string(objective_name(objective)), e);
            }
        }
    }
    return d;
}

inline BacktestReport run_backtest(const BacktestConfig& cfg, const DataBundle& data) {
    cfg.validate();
    const Month first_decision = cfg.out_sample_start - 1;
    if (!data.returns.has_date(first_decision - (cfg.train_window - 1)))
        throw Error(ErrorCode::NotFound, "returns do not cover the first training window (need " +
                                             (first_decision - (cfg.train_window - 1)).str() + ")");
    if (!data.returns.has_date(cfg.out_sample_end))
        throw Error(ErrorCode::NotFound, "returns do not cover the out-of-sample end " + cfg.out_sample_end.str());

    BacktestReport report;
    for (auto m : cfg.methods)
        for (auto o : cfg.objectives) report.cells.push_back({m, o, {}, std::nullopt, ""});

    Decision held = decide(data, first_decision, cfg);
    report.audit.push_back(held.audit);
    const double c = cfg.cost_rate();
    for (Month m = cfg.out_sample_start; m <= cfg.out_sample_end; ++m) {
        Decision next = decide(data, m, cfg);
        report.audit.push_back(next.audit);
        for (std::size_t i = 0; i < report.cells.size(); ++i) {
            MonthRecord rec;
            rec.date = m;
            rec.flags = held.flags[i];
            std::map<std::string, double> realized;
            for (const auto& [asset, w] : held.weights[i]) {
                rec.assets.push_back(asset);
                auto ret = data.returns.get(asset, m);
                if (!ret) rec.flags.push_back("missing_return:" + asset);
                realized[asset] = ret.value_or(0.0);
            }
            rec.p_hat = rec.assets.size();
            const auto nr = net_return(next.weights[i], held.weights[i], realized, c);
            rec.gross = nr.gross;
            rec.turnover = nr.turnover;
            rec.net = nr.net;
            if (1.0 + nr.gross <= 0.0) rec.flags.push_back("book_wiped_out");
            if (m == cfg.out_sample_start && cfg.charge_initial) {
                double size = 0.0;
                for (const auto& [_, w] : held.weights[i]) size += std::abs(w);
                rec.establishment_cost = c * size;
                rec.net -= rec.establishment_cost;
                if (size > 0.0) rec.flags.push_back("establishment_cost");
            }
            report.cells[i].monthly.push_back(std::move(rec));
        }
        held = std::move(next);
    }

    for (auto& cell : report.cells) {
        try {
            cell.summary = summarize(cell.net_series());
        } catch (const Error& e) {
            cell.summary_note = e.what();
        }
    }
    return report;
}

}  // namespace screenwise
