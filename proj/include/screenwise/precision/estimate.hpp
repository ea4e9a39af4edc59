#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/data/factors.hpp"
#include "screenwise/data/window.hpp"

namespace screenwise {

enum class PrecisionMethod { Nodewise, ResidualNodewise, Poet, DeepFactor, NonlinearShrinkage };

constexpr std::string_view method_name(PrecisionMethod m) {
    switch (m) {
    case PrecisionMethod::Nodewise: return "nw";
    case PrecisionMethod::ResidualNodewise: return "rnw";
    case PrecisionMethod::Poet: return "poet";
    case PrecisionMethod::DeepFactor: return "deep";
    case PrecisionMethod::NonlinearShrinkage: return "nls";
    }
    return "?";
}

/// Row labels used in summary tables.
constexpr std::string_view method_label(PrecisionMethod m) {
    switch (m) {
    case PrecisionMethod::Nodewise: return "NW";
    case PrecisionMethod::ResidualNodewise: return "Residual NW";
    case PrecisionMethod::Poet: return "POET";
    case PrecisionMethod::DeepFactor: return "Deep learning";
    case PrecisionMethod::NonlinearShrinkage: return "NLS";
    }
    return "?";
}

inline PrecisionMethod parse_method(std::string_view name) {
    for (auto m : {PrecisionMethod::Nodewise, PrecisionMethod::ResidualNodewise, PrecisionMethod::Poet,
                   PrecisionMethod::DeepFactor, PrecisionMethod::NonlinearShrinkage})
        if (method_name(m) == name) return m;
    throw Error(ErrorCode::Config, "unknown precision method '" + std::string(name) + "' (nw, rnw, poet, deep, nls)");
}

/// Nodewise-family estimates are not symmetric by construction.
constexpr bool symmetric_by_construction(PrecisionMethod m) {
    return m != PrecisionMethod::Nodewise && m != PrecisionMethod::ResidualNodewise;
}

struct Diagnostics {
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> series;
    std::vector<std::string> notes;
};

struct PrecisionEstimate {
    std::vector<std::string> assets;
    Eigen::MatrixXd gamma;
    PrecisionMethod method = PrecisionMethod::Nodewise;
    Diagnostics diagnostics;

    /// The matrix the weight formulas consume.
    Eigen::MatrixXd symmetric() const { return 0.5 * (gamma + gamma.transpose()); }
};

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidValue, "symmetrize needs a square matrix");
    return 0.5 * (m + m.transpose());
}

inline Eigen::MatrixXd demean_columns(const Eigen::MatrixXd& y) {
    return y.rowwise() - y.colwise().mean();
}

/// Maximum absolute row sum.
inline double linf_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Condition number and minimum eigenvalue of the symmetric part.
inline void add_spectral_diagnostics(PrecisionEstimate& est) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.symmetric(), Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const double lo = ev.minCoeff(), hi = ev.maxCoeff();
    est.diagnostics.scalars["min_eigenvalue"] = lo;
    est.diagnostics.scalars["max_eigenvalue"] = hi;
    est.diagnostics.scalars["condition_number"] =
        lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

inline void require_finite(const PrecisionEstimate& est) {
    if (!est.gamma.allFinite())
        throw Error(ErrorCode::Degenerate,
                    std::string("precision estimate (") + std::string(method_name(est.method)) + ") has non-finite entries");
}

/// Symmetric and strictly positive definite, as required of the factor and
/// shrinkage estimators.
inline void require_symmetric_pd(const PrecisionEstimate& est, double tol = 1e-8) {
    const double asym = (est.gamma - est.gamma.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, est.gamma.cwiseAbs().maxCoeff());
    if (asym > tol * scale)
        throw Error(ErrorCode::Degenerate, "precision estimate is not symmetric (max asymmetry " +
                                               std::to_string(asym) + ")");
    if (!(est.diagnostics.scalars.at("min_eigenvalue") > 0.0))
        throw Error(ErrorCode::NotPositiveDefinite, "precision estimate is not positive definite (min eigenvalue " +
                                                        std::to_string(est.diagnostics.scalars.at("min_eigenvalue")) +
                                                        ")");
}

/// The 1x1 case shared by every estimator: the reciprocal of the (1/n)
/// variance of the demeaned series.
inline PrecisionEstimate single_asset_precision(const ReturnsMatrix& r, PrecisionMethod method) {
    const Eigen::VectorXd y = r.values.col(0).array() - r.values.col(0).mean();
    const double var = y.squaredNorm() / static_cast<double>(y.size());
    if (!(var > 0.0)) throw Error(ErrorCode::Degenerate, "asset " + r.assets.front() + " has zero variance");
    PrecisionEstimate est{r.assets, Eigen::MatrixXd::Constant(1, 1, 1.0 / var), method, {}};
    add_spectral_diagnostics(est);
    return est;
}

}  // namespace screenwise
