#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/data/factors.hpp"
#include "screenwise/data/window.hpp"
#include "screenwise/precision/estimate.hpp"
#include "screenwise/precision/lasso.hpp"

namespace screenwise {

struct NodewiseOptions {
    int grid_points = 50;
    double grid_ratio = 1e-4;
    /// Bypasses GIC and uses this penalty for every regression.
    std::optional<double> fixed_lambda;
    LassoOptions lasso;
};

namespace detail {

inline void check_window(const ReturnsMatrix& r) {
    if (r.cols() < 1) throw Error(ErrorCode::InvalidValue, "returns window has no assets");
    if (r.rows() < 2) throw Error(ErrorCode::InvalidValue, "returns window needs at least 2 months");
    if (static_cast<std::size_t>(r.cols()) != r.assets.size())
        throw Error(ErrorCode::InvalidValue, "returns window columns and asset list differ");
    if (!r.values.allFinite()) throw Error(ErrorCode::InvalidValue, "returns window has non-finite values");
}

inline Eigen::MatrixXd drop_index(const Eigen::MatrixXd& s, Eigen::Index j) {
    const Eigen::Index m = s.rows() - 1;
    Eigen::MatrixXd out(m, m);
    for (Eigen::Index a = 0, ra = 0; a < s.rows(); ++a) {
        if (a == j) continue;
        for (Eigen::Index b = 0, rb = 0; b < s.cols(); ++b) {
            if (b == j) continue;
            out(ra, rb++) = s(a, b);
        }
        ++ra;
    }
    return out;
}

}  // namespace detail

/// Nodewise-regression precision estimate: one lasso regression per asset
/// on all the others, with the penalty chosen by GIC.
inline PrecisionEstimate nodewise_precision(const ReturnsMatrix& r, const NodewiseOptions& opts = {}) {
    detail::check_window(r);
    if (r.cols() == 1) return single_asset_precision(r, PrecisionMethod::Nodewise);

    const Eigen::Index n = r.rows(), p = r.cols();
    const double nd = static_cast<double>(n);
    const Eigen::MatrixXd y = demean_columns(r.values);
    const Eigen::MatrixXd s = y.transpose() * y / nd;

    PrecisionEstimate est{r.assets, Eigen::MatrixXd::Zero(p, p), PrecisionMethod::Nodewise, {}};
    auto& lambdas = est.diagnostics.series["lambda"];
    auto& supports = est.diagnostics.series["support"];
    auto& taus = est.diagnostics.series["tau2"];

    GicOptions gic;
    gic.dimension = static_cast<double>(p);
    gic.lasso = opts.lasso;

    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::MatrixXd gram = detail::drop_index(s, j);
        Eigen::VectorXd c(p - 1);
        for (Eigen::Index k = 0, rk = 0; k < p; ++k)
            if (k != j) c(rk++) = s(k, j);

        double lambda = 0.0, sigma2 = 0.0;
        Eigen::VectorXd g;
        if (opts.fixed_lambda) {
            lambda = *opts.fixed_lambda;
            if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidValue, "fixed lambda must be non-negative");
            g = lasso_gram(gram, c, lambda, opts.lasso).coefficients;
            sigma2 = s(j, j) - 2.0 * c.dot(g) + g.dot(gram * g);
        } else {
            auto sel = gic_select_gram(gram, c, s(j, j), static_cast<std::size_t>(n),
                                       lambda_grid(lambda_max(c), opts.grid_points, opts.grid_ratio), gic);
            lambda = sel.lambda;
            sigma2 = sel.residual_variance;
            g = std::move(sel.coefficients);
            for (auto& w : sel.warnings) est.diagnostics.notes.push_back(r.assets[j] + ": " + w);
        }
        const double tau2 = sigma2 + lambda * g.lpNorm<1>();
        if (!(tau2 > 1e-12))
            throw Error(ErrorCode::Degenerate, "nodewise regression for asset " + r.assets[j] +
                                                   " is degenerate (tau^2 = " + std::to_string(tau2) + ")");
        est.gamma(j, j) = 1.0 / tau2;
        std::size_t support = 0;
        for (Eigen::Index k = 0, rk = 0; k < p; ++k) {
            if (k == j) continue;
            est.gamma(j, k) = -g(rk) / tau2;
            support += g(rk) != 0.0;
            ++rk;
        }
        lambdas.push_back(lambda);
        supports.push_back(static_cast<double>(support));
        taus.push_back(tau2);
    }
    require_finite(est);
    add_spectral_diagnostics(est);
    return est;
}

/// Reconstructs the return precision from the error precision `omega`,
/// loadings `b` (p x K) and factor covariance `sigma_f` (K x K).
inline Eigen::MatrixXd factor_woodbury(const Eigen::MatrixXd& omega, const Eigen::MatrixXd& b,
                                       const Eigen::MatrixXd& sigma_f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fe(symmetrize(sigma_f), Eigen::EigenvaluesOnly);
    const double flo = fe.eigenvalues().minCoeff(), fhi = fe.eigenvalues().maxCoeff();
    if (!(flo > 1e-12 * std::max(fhi, 1e-300)))
        throw Error(ErrorCode::Degenerate, "factor covariance is singular (condition number " +
                                               std::to_string(flo > 0 ? fhi / flo : INFINITY) + ")");
    const Eigen::MatrixXd inner = sigma_f.inverse() + b.transpose() * symmetrize(omega) * b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(inner);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond < 1e12))
        throw Error(ErrorCode::Degenerate, "Woodbury inner matrix is singular (condition number " +
                                               std::to_string(cond) + ")");
    return omega - omega * b * inner.fullPivLu().solve(b.transpose() * omega);
}

struct ResidualNodewiseParts {
    Eigen::MatrixXd loadings;     // p x K
    Eigen::MatrixXd residuals;    // n x p
    Eigen::MatrixXd factor_cov;   // K x K
    PrecisionEstimate omega;      // error precision
};

/// Factor removal by OLS (no intercept), nodewise on the residuals, and the
/// demeaned factor covariance.
inline ResidualNodewiseParts residual_nodewise_parts(const ReturnsMatrix& r, const FactorPanel& f,
                                                     const NodewiseOptions& opts = {}) {
    detail::check_window(r);
    const Eigen::Index n = r.rows(), k = f.values.cols();
    if (k < 1) throw Error(ErrorCode::InvalidValue, "factor panel needs K >= 1");
    if (f.values.rows() != n || (!f.dates.empty() && f.dates != r.dates))
        throw Error(ErrorCode::InvalidValue, "factor panel does not cover the returns window");
    if (n <= k) throw Error(ErrorCode::InvalidValue, "residual nodewise needs n > K");
    if (!f.values.allFinite()) throw Error(ErrorCode::InvalidValue, "factor panel has non-finite values");

    const Eigen::MatrixXd& x = f.values;  // n x K
    const double nd = static_cast<double>(n);
    const Eigen::MatrixXd xtx = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> xe(xtx, Eigen::EigenvaluesOnly);
    const double lo = xe.eigenvalues().minCoeff(), hi = xe.eigenvalues().maxCoeff();
    if (!(lo > 1e-12 * hi))
        throw Error(ErrorCode::Degenerate, "factor matrix is not of full column rank (condition number " +
                                               std::to_string(lo > 0 ? hi / lo : INFINITY) + ")");

    ResidualNodewiseParts parts;
    parts.loadings = xtx.ldlt().solve(x.transpose() * r.values).transpose();
    parts.residuals = r.values - x * parts.loadings.transpose();
    const Eigen::RowVectorXd fbar = x.colwise().mean();
    parts.factor_cov = x.transpose() * x / nd - fbar.transpose() * fbar;

    ReturnsMatrix u{r.assets, r.dates, parts.residuals};
    parts.omega = nodewise_precision(u, opts);
    return parts;
}

inline PrecisionEstimate residual_nodewise_precision(const ReturnsMatrix& r, const FactorPanel& f,
                                                     const NodewiseOptions& opts = {}) {
    detail::check_window(r);
    if (r.cols() == 1) return single_asset_precision(r, PrecisionMethod::ResidualNodewise);
    auto parts = residual_nodewise_parts(r, f, opts);
    PrecisionEstimate est{r.assets, factor_woodbury(parts.omega.gamma, parts.loadings, parts.factor_cov),
                          PrecisionMethod::ResidualNodewise, std::move(parts.omega.diagnostics)};
    est.diagnostics.scalars.erase("min_eigenvalue");
    est.diagnostics.scalars.erase("max_eigenvalue");
    est.diagnostics.scalars.erase("condition_number");
    est.diagnostics.scalars["factors"] = static_cast<double>(f.values.cols());
    require_finite(est);
    add_spectral_diagnostics(est);
    return est;
}

}  // namespace screenwise
