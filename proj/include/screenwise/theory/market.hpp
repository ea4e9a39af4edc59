#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/core/rng.hpp"
#include "screenwise/data/factors.hpp"
#include "screenwise/data/window.hpp"

namespace screenwise {

struct MarketSpec {
    int universe = 500;
    int factors = 3;
    std::vector<double> factor_variances{0.04, 0.02, 0.01};
    double error_variance_low = 0.01;
    double error_variance_high = 0.05;
    double mean_low = 0.0;
    double mean_high = 0.02;
};

/// Factor-structured market with known moments.
struct SyntheticMarket {
    int p = 0;
    std::vector<std::string> assets;
    Eigen::MatrixXd loadings;         // p x K
    Eigen::VectorXd factor_variances; // K
    Eigen::VectorXd error_variances;  // p
    Eigen::MatrixXd sigma;
    Eigen::VectorXd mu;
    Eigen::MatrixXd gamma;
    /// Indices of the optimal set, best per-asset Sharpe first.
    std::vector<int> optimal_set;
    std::uint64_t seed = 0;

    int p_star() const { return static_cast<int>(optimal_set.size()); }
};

inline std::string synthetic_asset_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "A%03d", i + 1);
    return buf;
}

inline SyntheticMarket make_market(const MarketSpec& spec, int p_star, std::uint64_t seed) {
    const int p = spec.universe, k = spec.factors;
    if (p < 1 || p_star < 1 || p_star > p) throw Error(ErrorCode::InvalidValue, "need 1 <= p* <= p");
    if (k < 1) throw Error(ErrorCode::InvalidValue, "market needs K >= 1 factors");
    if (!(spec.error_variance_low > 0.0) || spec.error_variance_high < spec.error_variance_low)
        throw Error(ErrorCode::InvalidValue, "error variance range must be positive and ordered");

    SyntheticMarket m;
    m.p = p;
    m.seed = seed;
    for (int i = 0; i < p; ++i) m.assets.push_back(synthetic_asset_name(i));
    auto rng = SeedSplitter(seed).engine("theory.market");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> err(spec.error_variance_low, spec.error_variance_high);
    std::uniform_real_distribution<double> mean(spec.mean_low, spec.mean_high);

    m.loadings.resize(p, k);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < k; ++j) m.loadings(i, j) = normal(rng);
    m.factor_variances.resize(k);
    for (int j = 0; j < k; ++j)
        m.factor_variances(j) = j < static_cast<int>(spec.factor_variances.size())
                                    ? spec.factor_variances[static_cast<std::size_t>(j)]
                                    : 0.04 * std::pow(0.5, j);
    m.error_variances.resize(p);
    for (int i = 0; i < p; ++i) m.error_variances(i) = err(rng);
    m.mu.resize(p);
    for (int i = 0; i < p; ++i) m.mu(i) = mean(rng);

    m.sigma = m.loadings * m.factor_variances.asDiagonal() * m.loadings.transpose();
    m.sigma.diagonal() += m.error_variances;
    m.gamma = m.sigma.llt().solve(Eigen::MatrixXd::Identity(p, p));

    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return m.mu(a) / std::sqrt(m.sigma(a, a)) > m.mu(b) / std::sqrt(m.sigma(b, b));
    });
    m.optimal_set.assign(order.begin(), order.begin() + p_star);
    return m;
}

struct MarketSample {
    ReturnsMatrix returns;
    FactorPanel factors;
};

/// n i.i.d. Gaussian months from the market's factor structure.
inline MarketSample simulate_returns(const SyntheticMarket& m, int n, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::InvalidValue, "sample size must be positive");
    auto rng = SeedSplitter(seed).engine("theory.returns");
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index k = m.loadings.cols();
    MarketSample s;
    s.factors.values.resize(n, k);
    s.returns.values.resize(n, m.p);
    for (int t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < k; ++j) s.factors.values(t, j) = std::sqrt(m.factor_variances(j)) * normal(rng);
        for (int i = 0; i < m.p; ++i) s.returns.values(t, i) = std::sqrt(m.error_variances(i)) * normal(rng);
    }
    s.returns.values += s.factors.values * m.loadings.transpose();
    s.returns.values.rowwise() += m.mu.transpose();
    s.returns.assets = m.assets;
    for (int t = 0; t < n; ++t) s.returns.dates.push_back(Month(2000, 1) + t);
    s.factors.dates = s.returns.dates;
    return s;
}

inline std::pair<SyntheticMarket, ReturnsMatrix> simulate_market(int p, int p_star, int k, int n, std::uint64_t seed) {
    MarketSpec spec;
    spec.universe = p;
    spec.factors = k;
    auto m = make_market(spec, p_star, seed);
    auto sample = simulate_returns(m, n, seed);
    return {std::move(m), std::move(sample.returns)};
}

struct ScreeningOutcome {
    /// Indices into the universe; optimal members first.
    std::vector<int> selected;
    bool sensible = false;

    int p_hat() const { return static_cast<int>(selected.size()); }
};

/// Whether `selected` meets the sensible-screening definition for `optimal`.
inline bool is_sensible(const std::vector<int>& selected, const std::vector<int>& optimal) {
    const auto in = [](const std::vector<int>& set, int x) { return std::find(set.begin(), set.end(), x) != set.end(); };
    if (selected.size() >= optimal.size()) {
        for (int o : optimal)
            if (!in(selected, o)) return false;
        return true;
    }
    for (int s : selected)
        if (!in(optimal, s)) return false;
    return true;
}

inline std::vector<int> order_optimal_first(std::vector<int> selected, const std::vector<int>& optimal) {
    std::stable_sort(selected.begin(), selected.end(), [&](int a, int b) {
        const auto ra = std::find(optimal.begin(), optimal.end(), a) - optimal.begin();
        const auto rb = std::find(optimal.begin(), optimal.end(), b) - optimal.begin();
        if (ra != rb) return ra < rb;
        return a < b;
    });
    return selected;
}

/// p_hat >= p*: the optimal set plus uniformly drawn others. p_hat < p*: a
/// uniformly drawn subset of the optimal set.
inline ScreeningOutcome sensible_screen(const SyntheticMarket& m, int p_hat, std::uint64_t seed) {
    if (p_hat < 1 || p_hat > m.p) throw Error(ErrorCode::InvalidValue, "need 1 <= p_hat <= p");
    auto rng = SeedSplitter(seed).engine("theory.screen");
    std::vector<int> selected;
    if (p_hat >= m.p_star()) {
        selected = m.optimal_set;
        std::vector<int> others;
        for (int i = 0; i < m.p; ++i)
            if (std::find(m.optimal_set.begin(), m.optimal_set.end(), i) == m.optimal_set.end()) others.push_back(i);
        std::shuffle(others.begin(), others.end(), rng);
        selected.insert(selected.end(), others.begin(), others.begin() + (p_hat - m.p_star()));
    } else {
        std::vector<int> pool = m.optimal_set;
        std::shuffle(pool.begin(), pool.end(), rng);
        selected.assign(pool.begin(), pool.begin() + p_hat);
    }
    selected = order_optimal_first(std::move(selected), m.optimal_set);
    return {selected, is_sensible(selected, m.optimal_set)};
}

/// Uniform p_hat-subset of the universe, ignoring the optimal set.
inline ScreeningOutcome random_screen(const SyntheticMarket& m, int p_hat, std::uint64_t seed) {
    if (p_hat < 1 || p_hat > m.p) throw Error(ErrorCode::InvalidValue, "need 1 <= p_hat <= p");
    auto rng = SeedSplitter(seed).engine("theory.screen.random");
    std::vector<int> all(static_cast<std::size_t>(m.p));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<int> selected(all.begin(), all.begin() + p_hat);
    selected = order_optimal_first(std::move(selected), m.optimal_set);
    return {selected, is_sensible(selected, m.optimal_set)};
}

inline Eigen::MatrixXd restrict(const Eigen::MatrixXd& a, const std::vector<int>& idx) {
    Eigen::MatrixXd out(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = a(idx[i], idx[j]);
    return out;
}

inline Eigen::VectorXd restrict(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

inline ReturnsMatrix restrict_columns(const ReturnsMatrix& r, const std::vector<int>& idx) {
    ReturnsMatrix out{{}, r.dates, Eigen::MatrixXd(r.rows(), static_cast<Eigen::Index>(idx.size()))};
    for (std::size_t j = 0; j < idx.size(); ++j) {
        out.assets.push_back(r.assets[static_cast<std::size_t>(idx[j])]);
        out.values.col(static_cast<Eigen::Index>(j)) = r.values.col(idx[j]);
    }
    return out;
}

}  // namespace screenwise
