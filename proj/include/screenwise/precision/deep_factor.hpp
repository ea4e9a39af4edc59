#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/core/rng.hpp"
#include "screenwise/data/factors.hpp"
#include "screenwise/data/window.hpp"
#include "screenwise/precision/estimate.hpp"
#include "screenwise/precision/mlp.hpp"
#include "screenwise/precision/nodewise.hpp"
#include "screenwise/precision/poet.hpp"

namespace screenwise {

struct DeepFactorConfig {
    TrainingConfig training;
    /// One network per asset instead of a shared network with p outputs.
    bool per_asset = false;
    double threshold_c = 0.5;
    double smoothness = 2.0;
    std::uint64_t seed = 20240601;
    bool diagonal_loading = false;
    int min_observations = 50;
};

/// Fitted values g(f_t) for every asset (n x p), in the scale of `y`.
inline Eigen::MatrixXd fit_factor_network(const Eigen::MatrixXd& y, const Eigen::MatrixXd& f,
                                          const DeepFactorConfig& cfg, std::vector<double>* losses = nullptr) {
    const Eigen::RowVectorXd fmean = f.colwise().mean();
    Eigen::RowVectorXd fsd = ((f.rowwise() - fmean).colwise().squaredNorm() / static_cast<double>(f.rows())).cwiseSqrt();
    for (Eigen::Index k = 0; k < fsd.size(); ++k)
        if (!(fsd(k) > 0.0)) fsd(k) = 1.0;
    const Eigen::RowVectorXd ymean = y.colwise().mean();
    Eigen::RowVectorXd ysd = ((y.rowwise() - ymean).colwise().squaredNorm() / static_cast<double>(y.rows())).cwiseSqrt();
    for (Eigen::Index k = 0; k < ysd.size(); ++k)
        if (!(ysd(k) > 0.0)) ysd(k) = 1.0;

    const Eigen::MatrixXd xs = (f.rowwise() - fmean).array().rowwise() / fsd.array();
    const Eigen::MatrixXd ys = (y.rowwise() - ymean).array().rowwise() / ysd.array();
    SeedSplitter seeds(cfg.seed);
    Eigen::MatrixXd pred(y.rows(), y.cols());
    const int in = static_cast<int>(f.cols());
    if (cfg.per_asset) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            auto rng = seeds.engine("deep-factor", static_cast<std::uint64_t>(j));
            Mlp net(in, cfg.training.hidden, 1, rng);
            auto l = net.train(xs, ys.col(j), cfg.training, rng);
            if (losses && j == 0) *losses = l;
            pred.col(j) = net.predict(xs);
        }
    } else {
        auto rng = seeds.engine("deep-factor", 0);
        Mlp net(in, cfg.training.hidden, static_cast<int>(y.cols()), rng);
        auto l = net.train(xs, ys, cfg.training, rng);
        if (losses) *losses = l;
        pred = net.predict(xs);
    }
    return (pred.array().rowwise() * ysd.array()).rowwise() + ymean.array();
}

struct DeepFactorParts {
    Eigen::MatrixXd predictions;   // n x p
    Eigen::MatrixXd signal_cov;    // Sigma_g
    Eigen::MatrixXd error_cov_th;  // thresholded error covariance
    std::size_t zeroed = 0;
    PrecisionEstimate estimate;
};

/// Builds the precision estimate from network predictions: the covariance of
/// the predictions, thresholded residual covariance, and the Woodbury
/// reconstruction of (Sigma_g + Sigma_u)^-1.
inline DeepFactorParts assemble_deep_precision(const ReturnsMatrix& r, const Eigen::MatrixXd& predictions,
                                               int factor_count, const DeepFactorConfig& cfg) {
    const Eigen::Index n = r.rows(), p = r.cols();
    if (predictions.rows() != n || predictions.cols() != p)
        throw Error(ErrorCode::InvalidValue, "predictions do not match the returns window");
    if (!predictions.allFinite()) throw Error(ErrorCode::Convergence, "network predictions are not finite");
    const double nd = static_cast<double>(n);

    DeepFactorParts parts;
    parts.predictions = predictions;
    const Eigen::MatrixXd gc = demean_columns(predictions);
    parts.signal_cov = gc.transpose() * gc / nd;
    const Eigen::MatrixXd u = r.values - predictions;  // n x p
    const Eigen::MatrixXd su = u.transpose() * u / nd;

    const double beta = cfg.smoothness, k = static_cast<double>(factor_count);
    const double rn = std::pow(nd, -beta / (beta + k)) * std::pow(std::log(nd), 8.0);
    Eigen::MatrixXd tau(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i; j < p; ++j)
            tau(i, j) = tau(j, i) =
                cfg.threshold_c * rn * ((u.col(i).array() * u.col(j).array()) - su(i, j)).abs().sum();
    parts.error_cov_th = su;
    parts.zeroed = detail::hard_threshold(parts.error_cov_th, tau);

    Diagnostics diag;
    const Eigen::MatrixXd su_inv =
        detail::inverse_pd(parts.error_cov_th, cfg.diagonal_loading, diag, "thresholded error covariance");
    if (diag.scalars.count("diagonal_loading"))
        parts.error_cov_th.diagonal().array() += diag.scalars["diagonal_loading"];
    const Eigen::MatrixXd sg = su_inv * parts.signal_cov;
    const Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(p, p) + sg;
    Eigen::MatrixXd gamma = su_inv - sg * inner.partialPivLu().solve(su_inv);

    diag.scalars["rate"] = rn;
    diag.scalars["thresholded_fraction"] = p > 1 ? static_cast<double>(parts.zeroed) / (static_cast<double>(p) * (p - 1.0)) : 0.0;
    parts.estimate = PrecisionEstimate{r.assets, symmetrize(gamma), PrecisionMethod::DeepFactor, std::move(diag)};
    require_finite(parts.estimate);
    add_spectral_diagnostics(parts.estimate);
    require_symmetric_pd(parts.estimate);
    return parts;
}

inline DeepFactorParts deep_factor_fit(const ReturnsMatrix& r, const FactorPanel& f, const DeepFactorConfig& cfg = {}) {
    detail::check_window(r);
    if (f.values.cols() < 1) throw Error(ErrorCode::InvalidValue, "factor panel needs K >= 1");
    if (f.values.rows() != r.rows() || (!f.dates.empty() && f.dates != r.dates))
        throw Error(ErrorCode::InvalidValue, "factor panel does not cover the returns window");
    if (r.rows() < cfg.min_observations)
        throw Error(ErrorCode::InvalidValue, "deep factor estimator needs n >= " + std::to_string(cfg.min_observations) +
                                                 " (got " + std::to_string(r.rows()) + ")");
    std::vector<double> losses;
    auto pred = fit_factor_network(r.values, f.values, cfg, &losses);
    auto parts = assemble_deep_precision(r, pred, static_cast<int>(f.values.cols()), cfg);
    parts.estimate.diagnostics.scalars["final_loss"] = losses.empty() ? 0.0 : losses.back();
    return parts;
}

inline PrecisionEstimate deep_factor_precision(const ReturnsMatrix& r, const FactorPanel& f,
                                               const DeepFactorConfig& cfg = {}) {
    detail::check_window(r);
    if (r.cols() == 1) return single_asset_precision(r, PrecisionMethod::DeepFactor);
    return deep_factor_fit(r, f, cfg).estimate;
}

}  // namespace screenwise
