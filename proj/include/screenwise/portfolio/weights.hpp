#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/agents/signals.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/text.hpp"
#include "screenwise/data/window.hpp"
#include "screenwise/precision/estimate.hpp"

namespace screenwise {

enum class Objective { Gmv, Mv, Msr };

constexpr std::string_view objective_name(Objective o) {
    switch (o) {
    case Objective::Gmv: return "gmv";
    case Objective::Mv: return "mv";
    case Objective::Msr: return "msr";
    }
    return "?";
}

constexpr std::string_view objective_label(Objective o) {
    switch (o) {
    case Objective::Gmv: return "GMV";
    case Objective::Mv: return "MV";
    case Objective::Msr: return "MSR";
    }
    return "?";
}

inline Objective parse_objective(std::string_view name) {
    for (auto o : {Objective::Gmv, Objective::Mv, Objective::Msr})
        if (objective_name(o) == name) return o;
    throw Error(ErrorCode::Config, "unknown objective '" + std::string(name) + "' (gmv, mv, msr)");
}

/// Fully invested portfolio: weights sum to one, shorts allowed.
class WeightVector {
public:
    WeightVector(std::vector<std::string> assets, Eigen::VectorXd weights)
        : assets_(std::move(assets)), weights_(std::move(weights)) {
        if (static_cast<Eigen::Index>(assets_.size()) != weights_.size())
            throw Error(ErrorCode::InvalidValue, "weight vector and asset list differ in length");
        if (!weights_.allFinite()) throw Error(ErrorCode::Degenerate, "portfolio weights are not finite");
        if (std::abs(weights_.sum() - 1.0) > 1e-10)
            throw Error(ErrorCode::Degenerate, "portfolio weights sum to " + format_double(weights_.sum()));
    }

    const std::vector<std::string>& assets() const { return assets_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    std::size_t size() const { return assets_.size(); }

    std::map<std::string, double> as_map() const {
        std::map<std::string, double> out;
        for (std::size_t i = 0; i < assets_.size(); ++i) out[assets_[i]] = weights_(static_cast<Eigen::Index>(i));
        return out;
    }

private:
    std::vector<std::string> assets_;
    Eigen::VectorXd weights_;
};

struct MeanEstimate {
    std::vector<std::string> assets;
    Eigen::VectorXd mu;
};

inline MeanEstimate estimate_mean(const ReturnsMatrix& r) {
    if (r.rows() < 1) throw Error(ErrorCode::InvalidValue, "mean estimate needs at least one month");
    return {r.assets, r.values.colwise().mean().transpose()};
}

namespace detail {

inline Eigen::MatrixXd weighting_matrix(const PrecisionEstimate& g) {
    return symmetric_by_construction(g.method) ? g.gamma : g.symmetric();
}

inline void check_mean(const PrecisionEstimate& g, const MeanEstimate& m) {
    if (g.assets != m.assets) throw Error(ErrorCode::InvalidValue, "precision and mean estimates cover different assets");
    if (!m.mu.allFinite()) throw Error(ErrorCode::InvalidValue, "mean estimate is not finite");
}

}  // namespace detail

inline WeightVector gmv_weights(const PrecisionEstimate& g) {
    const Eigen::MatrixXd gamma = detail::weighting_matrix(g);
    const Eigen::VectorXd g1 = gamma.rowwise().sum();
    const double a = g1.sum();
    if (!(std::abs(a) > 1e-12)) throw Error(ErrorCode::Degenerate, "GMV denominator 1'G1 is (near) zero");
    return {g.assets, g1 / a};
}

inline WeightVector mv_weights(const PrecisionEstimate& g, const MeanEstimate& m, double rho = 0.01) {
    detail::check_mean(g, m);
    const Eigen::MatrixXd gamma = detail::weighting_matrix(g);
    const Eigen::VectorXd g1 = gamma.rowwise().sum();
    const Eigen::VectorXd gmu = gamma * m.mu;
    const double a = g1.sum(), f = gmu.sum(), d = m.mu.dot(gmu);
    const double det = a * d - f * f;
    if (!(std::abs(det) > 1e-12))
        throw Error(ErrorCode::Degenerate, "mean-variance problem is degenerate (AD - F^2 = " + format_double(det) + ")");
    Eigen::VectorXd w = ((d - rho * f) / det) * g1 + ((rho * a - f) / det) * gmu;
    if (std::abs(w.sum() - 1.0) > 1e-8 || std::abs(w.dot(m.mu) - rho) > 1e-8)
        throw Error(ErrorCode::Degenerate, "mean-variance weights fail their constraints (ill-conditioned inputs)");
    w /= w.sum();
    return {g.assets, w};
}

inline WeightVector msr_weights(const PrecisionEstimate& g, const MeanEstimate& m) {
    detail::check_mean(g, m);
    const Eigen::VectorXd gmu = detail::weighting_matrix(g) * m.mu;
    const double f = gmu.sum();
    if (!(std::abs(f) > 1e-12)) throw Error(ErrorCode::Degenerate, "MSR denominator 1'G mu is (near) zero");
    return {g.assets, gmu / f};
}

inline WeightVector portfolio_weights(Objective o, const PrecisionEstimate& g, const MeanEstimate& m, double rho) {
    switch (o) {
    case Objective::Gmv: return gmv_weights(g);
    case Objective::Mv: return mv_weights(g, m, rho);
    case Objective::Msr: return msr_weights(g, m);
    }
    throw Error(ErrorCode::Config, "unknown objective");
}

/// Market-neutral long-short book: long leg sums to +0.5, short leg to -0.5.
class DollarNeutralWeights {
public:
    DollarNeutralWeights(std::vector<std::string> assets, Eigen::VectorXd weights)
        : assets_(std::move(assets)), weights_(std::move(weights)) {
        double longs = 0.0, shorts = 0.0;
        for (Eigen::Index i = 0; i < weights_.size(); ++i) (weights_(i) > 0 ? longs : shorts) += weights_(i);
        if (std::abs(longs - 0.5) > 1e-10 || std::abs(shorts + 0.5) > 1e-10)
            throw Error(ErrorCode::Degenerate, "long-short legs must sum to +0.5 and -0.5");
    }
    const std::vector<std::string>& assets() const { return assets_; }
    const Eigen::VectorXd& weights() const { return weights_; }

private:
    std::vector<std::string> assets_;
    Eigen::VectorXd weights_;
};

enum class LegWeighting { Equal, Value };

/// Longs the Buy names and shorts the Sell names. Value weighting scales
/// each leg by the magnitudes in `sizes`.
inline DollarNeutralWeights long_short_portfolio(const SignalSet& signals, LegWeighting weighting,
                                                 const std::map<std::string, double>& sizes = {}) {
    std::vector<std::string> longs, shorts;
    for (const auto& [asset, s] : signals.all()) {
        if (s == Signal::Buy) longs.push_back(asset);
        if (s == Signal::Sell) shorts.push_back(asset);
    }
    if (longs.empty() || shorts.empty()) throw Error(ErrorCode::Degenerate, "long-short portfolio needs both legs");
    auto leg = [&](const std::vector<std::string>& names) {
        Eigen::VectorXd w(static_cast<Eigen::Index>(names.size()));
        for (std::size_t i = 0; i < names.size(); ++i) {
            double v = 1.0;
            if (weighting == LegWeighting::Value) {
                auto it = sizes.find(names[i]);
                if (it == sizes.end()) throw Error(ErrorCode::NotFound, "no size for " + names[i]);
                v = std::abs(it->second);
                if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "non-finite size for " + names[i]);
            }
            w(static_cast<Eigen::Index>(i)) = v;
        }
        if (!(w.sum() > 0.0)) throw Error(ErrorCode::Degenerate, "long-short leg has zero total size");
        return Eigen::VectorXd(0.5 * w / w.sum());
    };
    const Eigen::VectorXd wl = leg(longs), ws = leg(shorts);
    std::vector<std::string> assets = longs;
    assets.insert(assets.end(), shorts.begin(), shorts.end());
    Eigen::VectorXd w(wl.size() + ws.size());
    w << wl, -ws;
    return {assets, w};
}

inline void write_weights_header(std::ostream& out) { out << "date,asset,weight\n"; }

inline void write_weights(std::ostream& out, Month date, const WeightVector& w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        out << date.str() << ',' << w.assets()[i] << ',' << format_double(w.weights()(static_cast<Eigen::Index>(i)))
            << '\n';
}

}  // namespace screenwise
