#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/data/returns.hpp"

namespace screenwise {

/// Dense n x p block of returns: rows are months, columns follow `assets`.
struct ReturnsMatrix {
    std::vector<std::string> assets;
    std::vector<Month> dates;
    Eigen::MatrixXd values;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

struct WindowResult {
    ReturnsMatrix matrix;
    /// Requested assets excluded for lacking a return in some window month.
    std::vector<std::string> dropped;
};

/// The `length` months ending at `end_date` (inclusive) for the requested
/// assets. Assets missing any month in the window are dropped and reported.
inline WindowResult align_window(const ReturnsPanel& panel, Month end_date, int length,
                                 const std::vector<std::string>& assets) {
    if (length < 2) throw Error(ErrorCode::InvalidValue, "window length must be >= 2");
    if (!panel.has_date(end_date))
        throw Error(ErrorCode::NotFound, "window end " + end_date.str() + " not present in returns panel");

    WindowResult out;
    const Month first = end_date - (length - 1);
    for (int i = 0; i < length; ++i) out.matrix.dates.push_back(first + i);

    std::vector<const std::map<Month, double>*> kept;
    for (const auto& asset : assets) {
        const auto* series = panel.series(asset);
        bool complete = series != nullptr;
        if (complete) {
            auto it = series->find(first);
            for (int i = 0; i < length && complete; ++i, ++it)
                complete = it != series->end() && it->first == first + i;
        }
        if (complete) {
            out.matrix.assets.push_back(asset);
            kept.push_back(series);
        } else {
            out.dropped.push_back(asset);
        }
    }
    if (kept.empty())
        throw Error(ErrorCode::Degenerate, "no requested asset has full coverage over the " +
                                               std::to_string(length) + " months ending " + end_date.str());

    out.matrix.values.resize(length, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) {
        auto it = kept[j]->find(first);
        for (int i = 0; i < length; ++i, ++it) out.matrix.values(i, static_cast<Eigen::Index>(j)) = it->second;
    }
    return out;
}

}  // namespace screenwise
