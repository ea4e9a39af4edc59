#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/precision/estimate.hpp"
#include "screenwise/theory/market.hpp"

namespace screenwise {

/// sqrt(p) * (1'G mu / p) * (1'G 1 / p)^(-1/2), the Sharpe ratio of the GMV
/// portfolio built from (G, mu).
inline double estimated_sr(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& mu, int p_hat) {
    if (gamma.rows() != p_hat || gamma.cols() != p_hat || mu.size() != p_hat)
        throw Error(ErrorCode::InvalidValue, "Sharpe ratio inputs do not match p_hat");
    const double p = static_cast<double>(p_hat);
    const double a = gamma.sum() / p;
    if (!(a > 0.0)) throw Error(ErrorCode::Degenerate, "1'G1 is not positive");
    const double f = (Eigen::RowVectorXd::Ones(p_hat) * gamma * mu)(0) / p;
    return std::sqrt(p) * f / std::sqrt(a);
}

/// Same quantity on the true precision of the optimal block (restricted
/// first, then inverted) and the true means.
inline double target_sr(const SyntheticMarket& m) {
    const Eigen::MatrixXd s = restrict(m.sigma, m.optimal_set);
    const Eigen::MatrixXd g = s.llt().solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
    return estimated_sr(g, restrict(m.mu, m.optimal_set), m.p_star());
}

inline double sr_ratio_error(double estimated, double target) {
    return std::abs(estimated * estimated / (target * target) - 1.0);
}

struct BlockPartition {
    Eigen::MatrixXd top_left, top_right, bottom_left, bottom_right;
};

/// Splits a square matrix after its first k rows and columns.
inline BlockPartition partition(const Eigen::MatrixXd& a, Eigen::Index k) {
    if (a.rows() != a.cols() || k < 0 || k > a.rows())
        throw Error(ErrorCode::InvalidValue, "partition needs a square matrix and 0 <= k <= size");
    const Eigen::Index r = a.rows() - k;
    return {a.topLeftCorner(k, k), a.topRightCorner(k, r), a.bottomLeftCorner(r, k), a.bottomRightCorner(r, r)};
}

inline Eigen::MatrixXd reassemble(const BlockPartition& b) {
    const Eigen::Index k = b.top_left.rows(), r = b.bottom_right.rows();
    Eigen::MatrixXd out(k + r, k + r);
    out.topLeftCorner(k, k) = b.top_left;
    out.topRightCorner(k, r) = b.top_right;
    out.bottomLeftCorner(r, k) = b.bottom_left;
    out.bottomRightCorner(r, r) = b.bottom_right;
    return out;
}

struct AssumptionDiagnostics {
    bool overshoot = false;  // p_hat >= p*
    /// l-infinity norms of the three off-target blocks (NaN when the larger
    /// estimate is not available).
    double block_norms[3] = {0, 0, 0};
    double common_block_error = 0.0;  // ||G_hat - G||_linf on the shared block
    double mean_error = 0.0;          // max |mu_hat - mu| over the screened set
    double min_eigen_target = 0.0;    // Eigmin(G_p*)
    double scaled_mean = 0.0;         // |1'G_p* mu_p*| / p*
};

/// `gamma_hat` and `mu_hat` are on `screen.selected` (optimal members first).
/// When p_hat < p*, the off-target blocks need an estimate on the optimal
/// set ordered with the screened members first: pass it as `gamma_on_target`.
inline AssumptionDiagnostics assumption_diagnostics(const SyntheticMarket& m, const ScreeningOutcome& screen,
                                                    const Eigen::MatrixXd& gamma_hat, const Eigen::VectorXd& mu_hat,
                                                    const std::optional<Eigen::MatrixXd>& gamma_on_target = {}) {
    const int p_hat = screen.p_hat(), p_star = m.p_star();
    if (gamma_hat.rows() != p_hat || mu_hat.size() != p_hat)
        throw Error(ErrorCode::InvalidValue, "diagnostic inputs do not match the screened set");
    AssumptionDiagnostics d;
    d.overshoot = p_hat >= p_star;
    const Eigen::MatrixXd sigma_star = restrict(m.sigma, m.optimal_set);
    const Eigen::MatrixXd gamma_star = sigma_star.llt().solve(Eigen::MatrixXd::Identity(p_star, p_star));
    d.min_eigen_target = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gamma_star, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
    d.scaled_mean = std::abs((Eigen::RowVectorXd::Ones(p_star) * gamma_star * restrict(m.mu, m.optimal_set))(0)) /
                    static_cast<double>(p_star);
    d.mean_error = (mu_hat - restrict(m.mu, screen.selected)).cwiseAbs().maxCoeff();

    if (d.overshoot) {
        // the first p* screened members are the optimal set in rank order
        const auto b = partition(gamma_hat, p_star);
        d.block_norms[0] = linf_norm(b.top_right);
        d.block_norms[1] = linf_norm(b.bottom_left);
        d.block_norms[2] = linf_norm(b.bottom_right);
        d.common_block_error = linf_norm(b.top_left - gamma_star);
    } else {
        if (gamma_on_target) {
            const auto b = partition(*gamma_on_target, p_hat);
            d.block_norms[0] = linf_norm(b.top_right);
            d.block_norms[1] = linf_norm(b.bottom_left);
            d.block_norms[2] = linf_norm(b.bottom_right);
        } else {
            for (auto& v : d.block_norms) v = std::numeric_limits<double>::quiet_NaN();
        }
        std::vector<int> ranks;
        for (int s : screen.selected)
            ranks.push_back(static_cast<int>(std::find(m.optimal_set.begin(), m.optimal_set.end(), s) -
                                             m.optimal_set.begin()));
        d.common_block_error = linf_norm(gamma_hat - restrict(gamma_star, ranks));
    }
    return d;
}

}  // namespace screenwise
