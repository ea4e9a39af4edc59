#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "screenwise/backtest/bundle.hpp"
#include "screenwise/backtest/screening.hpp"
#include "screenwise/core/config.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/portfolio/weights.hpp"
#include "screenwise/precision/dispatch.hpp"

namespace screenwise {

enum class FailurePolicy { Skip, Abort };

/// Summary-table row order.
inline const std::vector<PrecisionMethod>& table_method_order() {
    static const std::vector<PrecisionMethod> order{PrecisionMethod::Nodewise, PrecisionMethod::ResidualNodewise,
                                                    PrecisionMethod::DeepFactor, PrecisionMethod::Poet,
                                                    PrecisionMethod::NonlinearShrinkage};
    return order;
}

struct BacktestConfig {
    int train_window = 180;
    double cost_bp = 10.0;
    std::vector<PrecisionMethod> methods = table_method_order();
    std::vector<Objective> objectives{Objective::Gmv, Objective::Mv, Objective::Msr};
    ScreeningConfig screening;
    double rho = 0.01;
    Month out_sample_start;
    Month out_sample_end;
    std::uint64_t seed = 1;
    /// Charge the cost of building the first portfolio from cash.
    bool charge_initial = true;
    FailurePolicy on_failure = FailurePolicy::Skip;
    PrecisionConfig precision;

    double cost_rate() const { return cost_bp / 10000.0; }

    void validate() const {
        if (train_window < 24) throw Error(ErrorCode::Config, "train_window must be >= 24");
        if (!(cost_bp >= 0.0)) throw Error(ErrorCode::Config, "cost_bp must be >= 0");
        if (out_sample_end < out_sample_start) throw Error(ErrorCode::Config, "out-of-sample start is after end");
        if (methods.empty() || objectives.empty()) throw Error(ErrorCode::Config, "no methods or objectives selected");
        screening.validate();
    }
};

inline const std::set<std::string>& backtest_config_keys() {
    static const std::set<std::string> keys{
        "returns", "characteristics", "factors", "sentiment", "analyst", "rules", "output_dir",
        "train_window", "cost_bp", "methods", "objectives", "agents", "fallback", "rho", "start", "end", "seed",
        "charge_initial", "on_failure", "sentiment_threshold", "sentiment_half_life", "analyst_threshold",
        "analyst_half_life", "logistic_window", "nodewise_grid_points", "poet_factors", "poet_max_factors",
        "diagonal_loading", "deep_epochs", "deep_hidden", "deep_learning_rate", "deep_batch_size",
        "deep_per_asset", "deep_c", "deep_beta"};
    return keys;
}

inline BundlePaths bundle_paths_from(const KeyValueConfig& kv) {
    return {kv.text("returns", ""),   kv.text("characteristics", ""), kv.text("factors", ""),
            kv.text("sentiment", ""), kv.text("analyst", ""),         kv.text("rules", "")};
}

inline BacktestConfig backtest_config_from(const KeyValueConfig& kv) {
    kv.check_keys(backtest_config_keys());
    BacktestConfig c;
    c.train_window = static_cast<int>(kv.integer("train_window", c.train_window));
    c.cost_bp = kv.number("cost_bp", c.cost_bp);
    c.methods.clear();
    for (const auto& m : kv.list("methods", "nw,rnw,deep,poet,nls")) c.methods.push_back(parse_method(m));
    c.objectives.clear();
    for (const auto& o : kv.list("objectives", "gmv,mv,msr")) c.objectives.push_back(parse_objective(o));
    c.screening.agents.clear();
    for (const auto& a : kv.list("agents", "rules,sentiment")) c.screening.agents.push_back(parse_agent(a));
    const auto fb = kv.text("fallback", "union");
    if (fb.rfind("agent:", 0) == 0) {
        const auto target = parse_agent(fb.substr(6));
        std::size_t idx = c.screening.agents.size();
        for (std::size_t i = 0; i < c.screening.agents.size(); ++i)
            if (c.screening.agents[i] == target) idx = i;
        if (idx == c.screening.agents.size())
            throw Error(ErrorCode::Config, "fallback agent '" + fb.substr(6) + "' is not in the ensemble");
        c.screening.fallback = ConsensusFallback::designated(idx);
    } else if (fb != "union") {
        throw Error(ErrorCode::Config, "fallback must be 'union' or 'agent:<name>'");
    }
    c.rho = kv.number("rho", c.rho);
    c.out_sample_start = kv.month("start");
    c.out_sample_end = kv.month("end");
    c.seed = kv.unsigned_integer("seed", c.seed);
    c.charge_initial = kv.boolean("charge_initial", c.charge_initial);
    const auto pol = kv.text("on_failure", "skip");
    if (pol == "skip") c.on_failure = FailurePolicy::Skip;
    else if (pol == "abort") c.on_failure = FailurePolicy::Abort;
    else throw Error(ErrorCode::Config, "on_failure must be 'skip' or 'abort'");

    c.screening.sentiment.threshold = kv.number("sentiment_threshold", c.screening.sentiment.threshold);
    c.screening.sentiment.half_life_days = kv.number("sentiment_half_life", c.screening.sentiment.half_life_days);
    c.screening.analyst.threshold = kv.number("analyst_threshold", c.screening.analyst.threshold);
    c.screening.analyst.half_life_days = kv.number("analyst_half_life", c.screening.analyst.half_life_days);
    c.screening.logistic_window = static_cast<int>(kv.integer("logistic_window", c.screening.logistic_window));

    auto& pc = c.precision;
    pc.nodewise.grid_points = static_cast<int>(kv.integer("nodewise_grid_points", pc.nodewise.grid_points));
    if (pc.nodewise.grid_points < 1) throw Error(ErrorCode::Config, "nodewise_grid_points must be >= 1");
    if (kv.has("poet_factors")) pc.poet.factors = static_cast<int>(kv.integer("poet_factors", 1));
    if (kv.has("poet_max_factors")) pc.poet.max_factors = static_cast<int>(kv.integer("poet_max_factors", 8));
    pc.poet.diagonal_loading = pc.deep.diagonal_loading = kv.boolean("diagonal_loading", false);
    pc.deep.training.epochs = static_cast<int>(kv.integer("deep_epochs", pc.deep.training.epochs));
    pc.deep.training.learning_rate = kv.number("deep_learning_rate", pc.deep.training.learning_rate);
    pc.deep.training.batch_size = static_cast<int>(kv.integer("deep_batch_size", pc.deep.training.batch_size));
    if (kv.has("deep_hidden")) {
        pc.deep.training.hidden.clear();
        for (const auto& h : kv.list("deep_hidden", "")) {
            double v = 0.0;
            if (!parse_double(h, v) || v < 1 || v != static_cast<int>(v))
                throw Error(ErrorCode::Config, "deep_hidden must list positive integers");
            pc.deep.training.hidden.push_back(static_cast<int>(v));
        }
    }
    pc.deep.per_asset = kv.boolean("deep_per_asset", pc.deep.per_asset);
    pc.deep.threshold_c = kv.number("deep_c", pc.deep.threshold_c);
    pc.deep.smoothness = kv.number("deep_beta", pc.deep.smoothness);
    if (pc.deep.training.epochs < 1 || pc.deep.training.batch_size < 1 || !(pc.deep.training.learning_rate > 0))
        throw Error(ErrorCode::Config, "deep network settings must be positive");
    c.validate();
    return c;
}

}  // namespace screenwise
