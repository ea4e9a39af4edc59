#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"

namespace screenwise {

struct LassoOptions {
    double tolerance = 1e-7;
    int max_sweeps = 10000;
};

struct LassoResult {
    Eigen::VectorXd coefficients;
    int sweeps = 0;
};

inline double soft_threshold(double x, double lambda) {
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return 0.0;
}

/// Coordinate descent on the Gram form of the lasso problem
///   min_b  b'Gb - 2c'b + 2*lambda*|b|_1,
/// i.e. ||y - Xb||^2/n + 2*lambda*|b|_1 with G = X'X/n and c = X'y/n.
///
/// Sweeps alternate between the full coordinate set and the current active
/// set; convergence is declared on a full sweep whose largest coefficient
/// change is below the tolerance.
inline LassoResult lasso_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double lambda,
                              const LassoOptions& opts = {}, const Eigen::VectorXd* warm_start = nullptr) {
    const Eigen::Index m = gram.rows();
    Eigen::VectorXd b = warm_start ? *warm_start : Eigen::VectorXd::Zero(m);
    Eigen::VectorXd gb = gram * b;

    auto sweep = [&](bool active_only) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (active_only && b(j) == 0.0) continue;
            const double gjj = gram(j, j);
            if (gjj <= 0.0) continue;
            const double rho = xty(j) - gb(j) + gjj * b(j);
            const double updated = soft_threshold(rho, lambda) / gjj;
            const double delta = updated - b(j);
            if (delta != 0.0) {
                gb.noalias() += gram.col(j) * delta;
                b(j) = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        return max_change;
    };

    int sweeps = 0;
    double last_change = 0.0;
    while (sweeps < opts.max_sweeps) {
        last_change = sweep(false);
        ++sweeps;
        if (last_change < opts.tolerance) return {b, sweeps};
        while (sweeps < opts.max_sweeps) {
            const double change = sweep(true);
            ++sweeps;
            if (change < opts.tolerance) break;
        }
    }
    std::vector<double> last(b.data(), b.data() + b.size());
    throw ConvergenceError("lasso did not converge in " + std::to_string(opts.max_sweeps) + " sweeps", last,
                           last_change);
}

/// Lasso regression of y on the columns of X minimizing
/// ||y - Xb||^2/n + 2*lambda*|b|_1 by cyclic coordinate descent.
inline Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                                                const LassoOptions& opts = {}) {
    if (x.rows() < 2) throw Error(ErrorCode::InvalidValue, "lasso needs at least 2 observations");
    if (x.rows() != y.size()) throw Error(ErrorCode::InvalidValue, "lasso design and response lengths differ");
    if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::InvalidValue, "lasso inputs must be finite");
    if (lambda < 0.0) throw Error(ErrorCode::InvalidValue, "lasso penalty must be non-negative");
    const double n = static_cast<double>(x.rows());
    const Eigen::MatrixXd gram = x.transpose() * x / n;
    const Eigen::VectorXd xty = x.transpose() * y / n;
    return lasso_gram(gram, xty, lambda, opts).coefficients;
}

/// Smallest penalty at which every coefficient is zero: max_j |X_j'y|/n.
inline double lambda_max(const Eigen::VectorXd& xty) { return xty.size() ? xty.cwiseAbs().maxCoeff() : 0.0; }

/// `points` penalties log-spaced over [ratio * lambda_max, lambda_max].
inline std::vector<double> lambda_grid(double lmax, int points = 50, double ratio = 1e-4) {
    if (!(lmax > 0.0)) return {0.0};
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double lo = std::log(ratio * lmax), hi = std::log(lmax);
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = points == 1 ? lmax : std::exp(lo + (hi - lo) * i / (points - 1));
    grid.back() = lmax;
    return grid;
}

struct GicOptions {
    /// The `p` in the log(p)/n penalty; defaults to the number of regressors.
    std::optional<double> dimension;
    LassoOptions lasso;
};

struct GicSelection {
    double lambda = 0.0;
    Eigen::VectorXd coefficients;
    double criterion = 0.0;
    double residual_variance = 0.0;
    std::size_t support = 0;
    std::vector<double> criteria;  // per grid point; NaN where skipped
    std::vector<std::string> warnings;
};

/// Picks the penalty minimizing
///   GIC(lambda) = log(sigma2) + |S| * log(p)/n * log(log n)
/// over `grid`, where sigma2 = ||y - Xb||^2/n and |S| counts non-zero
/// coefficients. Ties resolve to the smallest penalty; grid points with a
/// zero residual variance are skipped.
inline GicSelection gic_select_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double yty_over_n,
                                    std::size_t n, const std::vector<double>& grid, const GicOptions& opts = {}) {
    if (grid.empty()) throw Error(ErrorCode::InvalidValue, "GIC grid is empty");
    for (double l : grid)
        if (!(l >= 0.0)) throw Error(ErrorCode::InvalidValue, "GIC grid penalties must be non-negative");
    const double nd = static_cast<double>(n);
    const double p = opts.dimension.value_or(static_cast<double>(gram.rows()));
    const double penalty = std::log(p) / nd * std::log(std::log(nd));
    const double zero_floor = 1e-12 * std::max(yty_over_n, std::numeric_limits<double>::min());

    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });

    GicSelection best;
    best.criteria.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    bool found = false;
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(gram.rows());
    for (std::size_t idx : order) {
        const double lambda = grid[idx];
        auto fit = lasso_gram(gram, xty, lambda, opts.lasso, &warm);
        warm = fit.coefficients;
        const auto& b = fit.coefficients;
        const double sigma2 = yty_over_n - 2.0 * xty.dot(b) + b.dot(gram * b);
        if (!(sigma2 > zero_floor)) {
            best.warnings.push_back("lambda " + std::to_string(lambda) + " skipped: zero residual variance");
            continue;
        }
        std::size_t support = 0;
        for (Eigen::Index j = 0; j < b.size(); ++j) support += b(j) != 0.0;
        const double gic = std::log(sigma2) + static_cast<double>(support) * penalty;
        best.criteria[idx] = gic;
        if (!found || gic < best.criterion || (gic == best.criterion && lambda < best.lambda)) {
            found = true;
            best.lambda = lambda;
            best.coefficients = b;
            best.criterion = gic;
            best.residual_variance = sigma2;
            best.support = support;
        }
    }
    if (!found) throw Error(ErrorCode::Degenerate, "GIC: every grid point has zero residual variance");
    return best;
}

inline GicSelection gic_select_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const std::vector<double>& grid, const GicOptions& opts = {}) {
    if (x.rows() != y.size()) throw Error(ErrorCode::InvalidValue, "GIC design and response lengths differ");
    const double n = static_cast<double>(x.rows());
    const Eigen::MatrixXd gram = x.transpose() * x / n;
    const Eigen::VectorXd xty = x.transpose() * y / n;
    return gic_select_gram(gram, xty, y.squaredNorm() / n, static_cast<std::size_t>(x.rows()), grid, opts);
}

}  // namespace screenwise
