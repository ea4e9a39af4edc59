#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/agents/signals.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/data/characteristics.hpp"

namespace screenwise {

struct LogisticOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    /// Coefficient magnitude beyond which the likelihood is treated as
    /// unbounded (separated data).
    double divergence_bound = 1e4;
};

struct LogisticFit {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    int iterations = 0;
    std::vector<double> trace;  // max |step| per iteration

    double probability(const Eigen::VectorXd& x) const {
        const double eta = intercept + coefficients.dot(x);
        return 1.0 / (1.0 + std::exp(-eta));
    }
};

/// Maximum-likelihood logistic regression with intercept, by iteratively
/// reweighted least squares. `labels` must be 0/1.
inline LogisticFit fit_logistic(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                const LogisticOptions& opts = {}) {
    const Eigen::Index n = features.rows();
    const Eigen::Index k = features.cols();
    if (labels.size() != n) throw Error(ErrorCode::InvalidValue, "label count does not match feature rows");
    const double positives = labels.sum();
    if (positives <= 0.0 || positives >= static_cast<double>(n))
        throw Error(ErrorCode::Separation, "perfect separation: all labels are identical");

    Eigen::MatrixXd z(n, k + 1);
    z.col(0).setOnes();
    z.rightCols(k) = features;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k + 1);
    LogisticFit fit;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::VectorXd eta = z * beta;
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
            w(i) = p(i) * (1.0 - p(i));
        }
        const Eigen::MatrixXd info = z.transpose() * w.asDiagonal() * z;
        const Eigen::VectorXd score = z.transpose() * (labels - p);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-14)
            throw Error(ErrorCode::Separation, "perfect separation: information matrix became singular at iteration " +
                                                   std::to_string(it));
        const Eigen::VectorXd step = ldlt.solve(score);
        beta += step;
        const double change = step.cwiseAbs().maxCoeff();
        fit.trace.push_back(change);
        fit.iterations = it;
        if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > opts.divergence_bound)
            throw Error(ErrorCode::Separation, "perfect separation: coefficients diverge");
        if (change < opts.tolerance) {
            fit.intercept = beta(0);
            fit.coefficients = beta.tail(k);
            return fit;
        }
    }
    std::vector<double> last(beta.data(), beta.data() + beta.size());
    throw ConvergenceError("logistic regression did not converge in " + std::to_string(opts.max_iterations) +
                               " iterations",
                           last, fit.trace.empty() ? 0.0 : fit.trace.back(), fit.trace);
}

struct LabeledRow {
    FeatureRow features;
    bool label = false;
};

inline Eigen::VectorXd feature_vector(const FeatureRow& row, const std::vector<std::string>& names) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        auto it = row.find(names[j]);
        if (it == row.end()) throw Error(ErrorCode::NotFound, "missing feature '" + names[j] + "'");
        x(static_cast<Eigen::Index>(j)) = it->second;
    }
    return x;
}

/// Splits a scored cross-section into deciles: the top floor(N/10)
/// probabilities are Buy and the bottom floor(N/10) are Sell. Ties are broken
/// by asset identifier.
inline SignalSet decile_signals(const std::map<std::string, double>& scores, Month date) {
    std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t decile = ranked.size() / 10;
    SignalSet out(date);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        Signal s = Signal::Hold;
        if (i < decile) s = Signal::Buy;
        else if (i >= ranked.size() - decile) s = Signal::Sell;
        out.set(ranked[i].first, s);
    }
    return out;
}

/// Fits P(next-month return > 0 | features) on the training rows and screens
/// the `score` cross-section by predicted-probability decile.
inline SignalSet logistic_agent(const std::vector<LabeledRow>& train, const std::vector<std::string>& features,
                                const std::map<std::string, FeatureRow>& score, Month date,
                                const LogisticOptions& opts = {}) {
    if (train.size() < 30)
        throw Error(ErrorCode::InvalidValue,
                    "logistic agent needs at least 30 labeled observations, got " + std::to_string(train.size()));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(features.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = feature_vector(train[i].features, features).transpose();
        y(static_cast<Eigen::Index>(i)) = train[i].label ? 1.0 : 0.0;
    }
    const auto fit = fit_logistic(x, y, opts);
    std::map<std::string, double> probs;
    for (const auto& [asset, row] : score) probs[asset] = fit.probability(feature_vector(row, features));
    return decile_signals(probs, date);
}

}  // namespace screenwise
