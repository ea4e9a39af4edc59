#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/core/text.hpp"
#include "screenwise/data/window.hpp"
#include "screenwise/precision/estimate.hpp"
#include "screenwise/precision/nodewise.hpp"

namespace screenwise {

namespace detail {

inline double epanechnikov(double x) {
    const double t = 1.0 - x * x / 5.0;
    return t > 0.0 ? 3.0 / (4.0 * std::sqrt(5.0)) * t : 0.0;
}

/// Hilbert transform of the Epanechnikov kernel, scaled by pi.
inline double epanechnikov_hilbert(double x) {
    const double r5 = std::sqrt(5.0);
    double value = -3.0 * x / (10.0 * std::numbers::pi);
    const double num = r5 - x, den = r5 + x;
    if (num != 0.0 && den != 0.0)
        value += 3.0 / (4.0 * r5 * std::numbers::pi) * (1.0 - x * x / 5.0) * std::log(std::abs(num / den));
    return value;
}

}  // namespace detail

/// Nonlinear shrinkage of sample eigenvalues (ascending) of S = Y'Y/n.
/// Eigenvalues at or below `zero_tol` are treated as the null part of the
/// spectrum when p > n.
inline Eigen::VectorXd nls_shrink(const Eigen::VectorXd& lambda, std::size_t n_obs, double zero_tol) {
    const Eigen::Index p = lambda.size();
    const double n = static_cast<double>(n_obs);
    if (n_obs < 12) throw Error(ErrorCode::InvalidValue, "nonlinear shrinkage needs n >= 12");
    const double c = static_cast<double>(p) / n;
    const double h0 = std::pow(n, -1.0 / 3.0);
    const double pi = std::numbers::pi;

    Eigen::Index first = 0;  // start of the non-zero part
    if (static_cast<std::size_t>(p) > n_obs) {
        first = p - static_cast<Eigen::Index>(n_obs);
        while (first < p && !(lambda(first) > zero_tol)) ++first;
        if (first == p) throw Error(ErrorCode::Degenerate, "sample covariance has no positive eigenvalue");
    } else if (!(lambda(0) > zero_tol)) {
        throw Error(ErrorCode::Degenerate, "sample covariance is singular with p <= n (min eigenvalue " +
                                               format_double(lambda(0)) + ")");
    }
    const Eigen::Index m = p - first;
    const double md = static_cast<double>(m);

    Eigen::VectorXd out(p);
    for (Eigen::Index j = first; j < p; ++j) {
        double f = 0.0, hilbert = 0.0;
        for (Eigen::Index k = first; k < p; ++k) {
            const double h = h0 * lambda(k);
            const double x = (lambda(j) - lambda(k)) / h;
            f += detail::epanechnikov(x) / h;
            hilbert += detail::epanechnikov_hilbert(x) / h;
        }
        f /= static_cast<double>(p);
        double hf = 0.0;
        if (first == 0) {
            hf = hilbert / static_cast<double>(p);
        } else {
            const double hbar = hilbert / md;
            hf = hbar / c - (1.0 - 1.0 / c) / (pi * lambda(j));
        }
        const double a = pi * c * lambda(j) * f;
        const double b = 1.0 - c - pi * c * lambda(j) * hf;
        out(j) = lambda(j) / (a * a + b * b);
    }
    if (first > 0) {
        const double s5h = std::sqrt(5.0) * h0;
        const double bracket = 3.0 / (10.0 * h0 * h0) +
                               3.0 / (4.0 * std::sqrt(5.0) * h0) * (1.0 - 1.0 / (5.0 * h0 * h0)) *
                                   std::log((1.0 + s5h) / (1.0 - s5h));
        const double inv_mean = lambda.tail(m).cwiseInverse().sum() / (pi * md);
        const double h_zero = bracket * inv_mean;
        out.head(first).setConstant(1.0 / (pi * (c - 1.0) * h_zero));
    }

    std::string bad;
    for (Eigen::Index j = 0; j < p; ++j)
        if (!(out(j) > 0.0) || !std::isfinite(out(j)))
            bad += (bad.empty() ? "" : ", ") + format_double(lambda(j)) + " -> " + format_double(out(j));
    if (!bad.empty()) throw Error(ErrorCode::Degenerate, "non-positive shrunk eigenvalues: " + bad);
    return out;
}

struct NlsFit {
    Eigen::MatrixXd eigenvectors;
    Eigen::VectorXd sample_eigenvalues;  // ascending
    Eigen::VectorXd shrunk_eigenvalues;
    Eigen::MatrixXd covariance;
    PrecisionEstimate estimate;
};

inline NlsFit nls_fit(const ReturnsMatrix& r) {
    detail::check_window(r);
    const Eigen::Index n = r.rows();
    if (n < 12) throw Error(ErrorCode::InvalidValue, "nonlinear shrinkage needs n >= 12");
    const Eigen::MatrixXd s = r.values.transpose() * r.values / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    NlsFit fit;
    fit.eigenvectors = eig.eigenvectors();
    fit.sample_eigenvalues = eig.eigenvalues();
    const double top = std::max(fit.sample_eigenvalues.maxCoeff(), 0.0);
    fit.shrunk_eigenvalues = nls_shrink(fit.sample_eigenvalues, static_cast<std::size_t>(n), 1e-12 * top);
    const auto& u = fit.eigenvectors;
    fit.covariance = u * fit.shrunk_eigenvalues.asDiagonal() * u.transpose();
    Eigen::MatrixXd gamma = u * fit.shrunk_eigenvalues.cwiseInverse().asDiagonal() * u.transpose();

    Diagnostics diag;
    const auto& d = fit.shrunk_eigenvalues;
    diag.series["sample_eigenvalues"] = {fit.sample_eigenvalues.data(),
                                         fit.sample_eigenvalues.data() + fit.sample_eigenvalues.size()};
    diag.series["shrunk_eigenvalues"] = {d.data(), d.data() + d.size()};
    fit.estimate = PrecisionEstimate{r.assets, symmetrize(gamma), PrecisionMethod::NonlinearShrinkage, std::move(diag)};
    require_finite(fit.estimate);
    add_spectral_diagnostics(fit.estimate);
    require_symmetric_pd(fit.estimate);
    return fit;
}

inline PrecisionEstimate nls_precision(const ReturnsMatrix& r) {
    detail::check_window(r);
    if (r.cols() == 1) return single_asset_precision(r, PrecisionMethod::NonlinearShrinkage);
    return nls_fit(r).estimate;
}

}  // namespace screenwise
