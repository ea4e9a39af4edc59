#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/data/window.hpp"
#include "screenwise/precision/estimate.hpp"
#include "screenwise/precision/nodewise.hpp"

namespace screenwise {

namespace detail {

/// Top-k eigenpairs of Y'Y for a p x n matrix Y, descending. Eigenvectors
/// are n-vectors.
struct TopEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline TopEigen top_eigen_yty(const Eigen::MatrixXd& y, Eigen::Index k) {
    const Eigen::Index p = y.rows(), n = y.cols();
    TopEigen out{Eigen::VectorXd(k), Eigen::MatrixXd(n, k)};
    if (p < n) {
        // same non-zero spectrum through the smaller Gram matrix
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(y * y.transpose());
        for (Eigen::Index i = 0; i < k; ++i) {
            const double v = eig.eigenvalues()(p - 1 - i);
            out.values(i) = v;
            if (!(v > 0.0)) throw Error(ErrorCode::Degenerate, "returns matrix has rank below the factor count");
            out.vectors.col(i) = y.transpose() * eig.eigenvectors().col(p - 1 - i) / std::sqrt(v);
        }
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(y.transpose() * y);
    for (Eigen::Index i = 0; i < k; ++i) {
        out.values(i) = eig.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
    }
    return out;
}

/// Keeps off-diagonal entries with |s_ij| >= tau_ij. Returns the count zeroed.
inline std::size_t hard_threshold(Eigen::MatrixXd& s, const Eigen::MatrixXd& tau) {
    std::size_t zeroed = 0;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
        for (Eigen::Index j = 0; j < s.cols(); ++j)
            if (i != j && std::abs(s(i, j)) < tau(i, j)) {
                s(i, j) = 0.0;
                ++zeroed;
            }
    return zeroed;
}

/// Inverse of a thresholded error covariance, optionally retrying with
/// diagonal loading when it is not positive definite.
inline Eigen::MatrixXd inverse_pd(Eigen::MatrixXd s, bool diagonal_loading, Diagnostics& diag,
                                  const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
    double lo = eig.eigenvalues().minCoeff();
    diag.scalars["error_cov_min_eigenvalue"] = lo;
    if (!(lo > 0.0) && diagonal_loading) {
        const double eps = 1e-8 * s.trace() / static_cast<double>(s.rows());
        s.diagonal().array() += eps;
        diag.scalars["diagonal_loading"] = eps;
        diag.notes.push_back(std::string(what) + " loaded with " + std::to_string(eps) + " on the diagonal");
        lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    }
    if (!(lo > 0.0))
        throw Error(ErrorCode::NotPositiveDefinite,
                    std::string(what) + " is not positive definite (min eigenvalue " + std::to_string(lo) + ")");
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositiveDefinite, std::string(what) + " Cholesky factorization failed");
    return llt.solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
}

}  // namespace detail

struct FactorCount {
    int k = 1;
    std::vector<double> criteria;  // index k-1
    bool floored = false;          // some residual hit the epsilon floor
};

/// Bai-Ng information criterion over k = 1..k1 for a p x n matrix Y.
inline FactorCount bai_ng_factor_count(const Eigen::MatrixXd& y, int k1) {
    const Eigen::Index p = y.rows(), n = y.cols();
    if (k1 < 1 || k1 >= std::min(p, n))
        throw Error(ErrorCode::InvalidValue, "K1 must satisfy 1 <= K1 < min(p, n)");
    const double pn = static_cast<double>(p) * static_cast<double>(n);
    const auto top = detail::top_eigen_yty(y, k1);
    const double total = y.squaredNorm();
    const double penalty_unit = (static_cast<double>(p) + static_cast<double>(n)) / pn *
                                std::log(static_cast<double>(std::min(p, n)));
    FactorCount out;
    double best = std::numeric_limits<double>::infinity();
    double explained = 0.0;
    for (int k = 1; k <= k1; ++k) {
        explained += top.values(k - 1);
        double v = (total - explained) / pn;
        if (!(v > std::numeric_limits<double>::epsilon())) {
            v = std::numeric_limits<double>::epsilon();
            out.floored = true;
        }
        const double ic = std::log(v) + k * penalty_unit;
        out.criteria.push_back(ic);
        if (ic < best) {
            best = ic;
            out.k = k;
        }
    }
    return out;
}

inline int default_max_factors(Eigen::Index p, Eigen::Index n) {
    return static_cast<int>(std::min<Eigen::Index>(8, std::min(p, n) - 1));
}

struct PoetOptions {
    std::optional<int> factors;
    std::optional<int> max_factors;
    bool diagonal_loading = false;
};

struct PoetFit {
    int factors = 0;
    Eigen::MatrixXd loadings;           // p x K
    Eigen::MatrixXd factor_scores;      // n x K, F'F/n = I
    Eigen::MatrixXd error_cov;          // before thresholding
    Eigen::MatrixXd error_cov_th;       // after thresholding (and loading, if any)
    std::size_t zeroed = 0;
    PrecisionEstimate estimate;
};

inline PoetFit poet_fit(const ReturnsMatrix& r, const PoetOptions& opts = {}) {
    detail::check_window(r);
    const Eigen::Index n = r.rows(), p = r.cols();
    if (p < 2) throw Error(ErrorCode::InvalidValue, "POET needs p >= 2");
    const Eigen::MatrixXd y = r.values.transpose();  // p x n
    const double nd = static_cast<double>(n), pd = static_cast<double>(p);

    PoetFit fit;
    Diagnostics diag;
    if (opts.factors) {
        fit.factors = *opts.factors;
        if (fit.factors < 1) throw Error(ErrorCode::InvalidValue, "POET needs K >= 1 factors");
        if (fit.factors >= std::min(p, n))
            throw Error(ErrorCode::InvalidValue, "POET needs K < min(p, n)");
    } else {
        const int k1 = opts.max_factors.value_or(default_max_factors(p, n));
        auto count = bai_ng_factor_count(y, k1);
        fit.factors = count.k;
        diag.series["bai_ng_criteria"] = count.criteria;
        if (count.floored) diag.notes.push_back("Bai-Ng residual floored at machine epsilon");
    }
    const auto top = detail::top_eigen_yty(y, fit.factors);
    fit.factor_scores = std::sqrt(nd) * top.vectors;
    fit.loadings = y * fit.factor_scores / nd;
    const Eigen::MatrixXd u = y - fit.loadings * fit.factor_scores.transpose();  // p x n
    fit.error_cov = u * u.transpose() / nd;

    const double scale = 0.5 * (1.0 / std::sqrt(pd) + std::sqrt(std::log(pd) / nd));
    Eigen::MatrixXd tau(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i; j < p; ++j) {
            const double theta =
                ((u.row(i).array() * u.row(j).array()) - fit.error_cov(i, j)).square().sum() / nd;
            tau(i, j) = tau(j, i) = scale * std::sqrt(theta);
        }
    fit.error_cov_th = fit.error_cov;
    fit.zeroed = detail::hard_threshold(fit.error_cov_th, tau);

    const Eigen::MatrixXd su_inv = detail::inverse_pd(fit.error_cov_th, opts.diagonal_loading, diag,
                                                      "thresholded error covariance");
    if (diag.scalars.count("diagonal_loading"))
        fit.error_cov_th.diagonal().array() += diag.scalars["diagonal_loading"];
    const Eigen::MatrixXd& b = fit.loadings;
    const Eigen::MatrixXd inner =
        Eigen::MatrixXd::Identity(fit.factors, fit.factors) + b.transpose() * su_inv * b;
    const Eigen::MatrixXd sb = su_inv * b;
    Eigen::MatrixXd gamma = su_inv - sb * inner.ldlt().solve(sb.transpose());

    diag.scalars["factors"] = fit.factors;
    diag.scalars["thresholded_fraction"] =
        static_cast<double>(fit.zeroed) / (pd * (pd - 1.0));
    fit.estimate = PrecisionEstimate{r.assets, symmetrize(gamma), PrecisionMethod::Poet, std::move(diag)};
    require_finite(fit.estimate);
    add_spectral_diagnostics(fit.estimate);
    require_symmetric_pd(fit.estimate);
    return fit;
}

inline PrecisionEstimate poet_precision(const ReturnsMatrix& r, const PoetOptions& opts = {}) {
    detail::check_window(r);
    if (opts.factors && *opts.factors < 1) throw Error(ErrorCode::InvalidValue, "POET needs K >= 1 factors");
    if (r.cols() == 1) return single_asset_precision(r, PrecisionMethod::Poet);
    return poet_fit(r, opts).estimate;
}

}  // namespace screenwise
