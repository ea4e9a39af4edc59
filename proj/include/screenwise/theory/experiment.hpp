#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/config.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/rng.hpp"
#include "screenwise/core/text.hpp"
#include "screenwise/precision/dispatch.hpp"
#include "screenwise/theory/market.hpp"
#include "screenwise/theory/sharpe.hpp"

namespace screenwise {

enum class ScreenKind { Sensible, Random };

struct TheoryExperimentConfig {
    std::vector<int> grid{120, 360, 1080};
    int replications = 50;
    /// p_hat = p* + D with D uniform on {-deviation, ..., deviation}.
    int deviation = 2;
    ScreenKind screen = ScreenKind::Sensible;
    /// "oracle" or a precision method name.
    std::string estimator = "nw";
    std::uint64_t seed = 1;
    MarketSpec market;
    double max_failure_rate = 0.2;
    /// Terminal median below which a monotone run counts as converged.
    double tolerance = 0.10;
    PrecisionConfig precision;

    void validate() const {
        if (grid.empty()) throw Error(ErrorCode::Config, "theory grid is empty");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] < 12) throw Error(ErrorCode::Config, "theory grid sample sizes must be >= 12");
            if (i && grid[i] <= grid[i - 1]) throw Error(ErrorCode::Config, "theory grid must be ascending");
        }
        if (replications < 10) throw Error(ErrorCode::Config, "theory experiment needs >= 10 replications");
        if (deviation < 0) throw Error(ErrorCode::Config, "deviation must be >= 0");
        if (estimator != "oracle") parse_method(estimator);
        if (market.universe < 2) throw Error(ErrorCode::Config, "universe must hold at least 2 assets");
    }
};

struct ConvergenceRow {
    int n = 0;
    int p_star = 0;
    double q10 = 0.0, q50 = 0.0, q90 = 0.0;
    double fail_rate = 0.0;
    std::size_t failures = 0;
    std::vector<double> errors;
};

struct TheoryResult {
    std::vector<ConvergenceRow> rows;
    bool monotone = false;
    bool converged = false;
    std::vector<std::string> notes;
};

/// Linear-interpolation sample quantile.
inline double sample_quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline int default_p_star(int n) { return static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))); }

/// One replication: the squared-Sharpe ratio error, or throws on estimator
/// failure.
inline double theory_replication(const TheoryExperimentConfig& cfg, int n, int rep) {
    const SeedSplitter seeds(cfg.seed);
    const std::uint64_t key = static_cast<std::uint64_t>(n) * 1000003ULL + static_cast<std::uint64_t>(rep);
    const int p_star = std::min(default_p_star(n), cfg.market.universe);
    const auto market = make_market(cfg.market, p_star, seeds.seed("theory.market", key));
    auto phat_rng = seeds.engine("theory.phat", key);
    std::uniform_int_distribution<int> dev(-cfg.deviation, cfg.deviation);
    const int p_hat = std::clamp(p_star + dev(phat_rng), 1, cfg.market.universe);
    const auto screen = cfg.screen == ScreenKind::Sensible
                            ? sensible_screen(market, p_hat, seeds.seed("theory.screen", key))
                            : random_screen(market, p_hat, seeds.seed("theory.screen", key));

    Eigen::MatrixXd gamma_hat;
    Eigen::VectorXd mu_hat;
    if (cfg.estimator == "oracle") {
        const Eigen::MatrixXd s = restrict(market.sigma, screen.selected);
        gamma_hat = s.llt().solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
        mu_hat = restrict(market.mu, screen.selected);
    } else {
        const auto sample = simulate_returns(market, n, seeds.seed("theory.returns", key));
        const auto r = restrict_columns(sample.returns, screen.selected);
        PrecisionConfig pc = cfg.precision;
        pc.deep.seed = seeds.seed("theory.deep", key);
        gamma_hat = estimate_precision(parse_method(cfg.estimator), r, &sample.factors, pc).symmetric();
        mu_hat = r.values.colwise().mean().transpose();
    }
    return sr_ratio_error(estimated_sr(gamma_hat, mu_hat, p_hat), target_sr(market));
}

inline TheoryResult sharpe_convergence_experiment(const TheoryExperimentConfig& cfg) {
    cfg.validate();
    TheoryResult out;
    for (int n : cfg.grid) {
        ConvergenceRow row;
        row.n = n;
        row.p_star = std::min(default_p_star(n), cfg.market.universe);
        std::string first_failure;
        for (int rep = 0; rep < cfg.replications; ++rep) {
            try {
                row.errors.push_back(theory_replication(cfg, n, rep));
            } catch (const Error& e) {
                if (e.code() == ErrorCode::Config) throw;
                ++row.failures;
                if (first_failure.empty()) first_failure = e.what();
            }
        }
        row.fail_rate = static_cast<double>(row.failures) / cfg.replications;
        row.q10 = sample_quantile(row.errors, 0.1);
        row.q50 = sample_quantile(row.errors, 0.5);
        row.q90 = sample_quantile(row.errors, 0.9);
        if (row.failures) out.notes.push_back("n=" + std::to_string(n) + ": " + std::to_string(row.failures) +
                                              " failures, first: " + first_failure);
        out.rows.push_back(std::move(row));
        if (out.rows.back().fail_rate > cfg.max_failure_rate)
            throw Error(ErrorCode::Theory, "estimator failure rate " + format_double(out.rows.back().fail_rate) +
                                               " at n=" + std::to_string(n) + " exceeds " +
                                               format_double(cfg.max_failure_rate) + " (" + first_failure + ")");
    }
    out.monotone = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].q50 > out.rows[i - 1].q50) out.monotone = false;
    out.converged = out.monotone && out.rows.back().q50 < cfg.tolerance;
    return out;
}

inline void write_convergence_table(std::ostream& out, const TheoryResult& r) {
    out << "n,q10,q50,q90,fail_rate,converged\n";
    for (const auto& row : r.rows)
        out << row.n << ',' << format_double(row.q10) << ',' << format_double(row.q50) << ','
            << format_double(row.q90) << ',' << format_double(row.fail_rate) << ','
            << (r.converged ? "true" : "false") << '\n';
}

inline TheoryExperimentConfig theory_config_from(const KeyValueConfig& kv) {
    kv.check_keys({"grid", "replications", "deviation", "screen", "estimator", "seed", "universe", "factors",
                   "max_failure_rate", "tolerance", "output"});
    TheoryExperimentConfig c;
    if (kv.has("grid")) {
        c.grid.clear();
        for (const auto& g : kv.list("grid", "")) {
            double v = 0.0;
            if (!parse_double(g, v) || v != static_cast<int>(v)) throw Error(ErrorCode::Config, "grid must list integers");
            c.grid.push_back(static_cast<int>(v));
        }
    }
    c.replications = static_cast<int>(kv.integer("replications", c.replications));
    c.deviation = static_cast<int>(kv.integer("deviation", c.deviation));
    const auto screen = kv.text("screen", "sensible");
    if (screen == "sensible") c.screen = ScreenKind::Sensible;
    else if (screen == "random") c.screen = ScreenKind::Random;
    else throw Error(ErrorCode::Config, "screen must be 'sensible' or 'random'");
    c.estimator = kv.text("estimator", c.estimator);
    c.seed = kv.unsigned_integer("seed", c.seed);
    c.market.universe = static_cast<int>(kv.integer("universe", c.market.universe));
    c.market.factors = static_cast<int>(kv.integer("factors", c.market.factors));
    if (c.market.factors < 1) throw Error(ErrorCode::Config, "factors must be >= 1");
    c.max_failure_rate = kv.number("max_failure_rate", c.max_failure_rate);
    c.tolerance = kv.number("tolerance", c.tolerance);
    c.validate();
    return c;
}

}  // namespace screenwise
