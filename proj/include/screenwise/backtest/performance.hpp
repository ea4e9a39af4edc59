#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "screenwise/core/error.hpp"
#include "screenwise/core/text.hpp"

namespace screenwise {

/// Weights held going into a month; empty means all cash.
using Holdings = std::map<std::string, double>;

struct NetReturn {
    double gross = 0.0;
    double net = 0.0;
    double turnover = 0.0;
};

/// Realizes one month: `held` earns `returns`, then the book is rebalanced
/// to `target`. Turnover compares the target with the drifted holdings,
/// over the union of both asset sets.
inline NetReturn net_return(const Holdings& target, const Holdings& held, const std::map<std::string, double>& returns,
                            double cost) {
    if (!(cost >= 0.0)) throw Error(ErrorCode::InvalidValue, "transaction cost must be non-negative");
    NetReturn out;
    for (const auto& [asset, w] : held) {
        auto it = returns.find(asset);
        if (it == returns.end()) throw Error(ErrorCode::NotFound, "no return for held asset " + asset);
        out.gross += w * it->second;
    }
    const double growth = 1.0 + out.gross;
    if (growth == 0.0)
        throw Error(ErrorCode::Degenerate, "portfolio gross return of exactly -1 leaves drift undefined");

    std::set<std::string> names;
    for (const auto& [a, _] : target) names.insert(a);
    for (const auto& [a, _] : held) names.insert(a);
    for (const auto& a : names) {
        auto t = target.find(a);
        auto h = held.find(a);
        const double w_new = t == target.end() ? 0.0 : t->second;
        const double drifted = h == held.end() ? 0.0 : h->second * (1.0 + returns.at(a)) / growth;
        out.turnover += std::abs(w_new - drifted);
    }
    out.net = out.gross - cost * growth * out.turnover;
    return out;
}

struct PerformanceSummary {
    std::size_t months = 0;
    double mean = 0.0;      // monthly
    double variance = 0.0;  // monthly, T-1 denominator
    double sharpe = 0.0;    // monthly
    double annual_return = 0.0;
    double annual_variance = 0.0;
    double annual_sharpe = 0.0;
};

inline PerformanceSummary summarize(const std::vector<double>& net) {
    if (net.size() < 2) throw Error(ErrorCode::InvalidValue, "performance summary needs at least 2 months");
    PerformanceSummary s;
    s.months = net.size();
    const double t = static_cast<double>(net.size());
    double sum = 0.0;
    for (double v : net) sum += v;
    s.mean = sum / t;
    double ss = 0.0;
    for (double v : net) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / (t - 1.0);
    if (!(s.variance > 0.0)) throw Error(ErrorCode::Degenerate, "zero variance: Sharpe ratio undefined");
    s.sharpe = s.mean / std::sqrt(s.variance);
    s.annual_return = 12.0 * s.mean;
    s.annual_variance = 12.0 * s.variance;
    s.annual_sharpe = std::sqrt(12.0) * s.sharpe;
    return s;
}

}  // namespace screenwise
