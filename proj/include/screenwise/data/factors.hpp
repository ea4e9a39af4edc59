#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/text.hpp"

namespace screenwise {

/// Observable factor realizations aligned to a returns window (n x K).
struct FactorPanel {
    std::vector<Month> dates;
    Eigen::MatrixXd values;

    Eigen::Index factors() const { return values.cols(); }
};

/// Full history of K factors read from `date,f1,...,fK`.
class FactorSeries {
public:
    FactorSeries() = default;
    explicit FactorSeries(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.empty()) throw Error(ErrorCode::InvalidValue, "factor series needs at least one factor");
    }

    void add(Month date, const Eigen::VectorXd& values) {
        if (values.size() != static_cast<Eigen::Index>(names_.size()))
            throw Error(ErrorCode::InvalidValue, "factor row for " + date.str() + " has wrong width");
        if (!values.allFinite()) throw Error(ErrorCode::InvalidValue, "non-finite factor value at " + date.str());
        if (!rows_.emplace(date, values).second)
            throw Error(ErrorCode::DuplicateKey, "duplicate factor row for " + date.str());
    }

    const std::vector<std::string>& names() const { return names_; }
    bool has_date(Month d) const { return rows_.count(d) > 0; }
    std::size_t size() const { return rows_.size(); }

    FactorPanel window(const std::vector<Month>& dates) const {
        FactorPanel out{dates, Eigen::MatrixXd(static_cast<Eigen::Index>(dates.size()),
                                               static_cast<Eigen::Index>(names_.size()))};
        for (std::size_t i = 0; i < dates.size(); ++i) {
            auto it = rows_.find(dates[i]);
            if (it == rows_.end()) throw Error(ErrorCode::NotFound, "no factor values for " + dates[i].str());
            out.values.row(static_cast<Eigen::Index>(i)) = it->second.transpose();
        }
        return out;
    }

    FactorSeries through(Month last) const {
        FactorSeries out(names_);
        for (auto it = rows_.begin(); it != rows_.end() && it->first <= last; ++it) out.rows_.insert(*it);
        return out;
    }

private:
    std::vector<std::string> names_;
    std::map<Month, Eigen::VectorXd> rows_;
};

inline FactorSeries read_factor_series(std::istream& in, const std::string& source = "<factors>") {
    DelimitedReader reader(in, source);
    auto header = reader.read_header();
    if (header.size() < 2 || header[0] != "date")
        reader.fail(1, "factor header must be date,f1,...,fK");
    FactorSeries series(std::vector<std::string>(header.begin() + 1, header.end()));
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != header.size())
            reader.fail("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        Eigen::VectorXd row(static_cast<Eigen::Index>(f.size() - 1));
        Month date;
        try {
            date = Month::parse(f[0]);
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        for (std::size_t k = 1; k < f.size(); ++k)
            if (!parse_double(f[k], row(static_cast<Eigen::Index>(k - 1))))
                reader.fail("bad factor value '" + std::string(f[k]) + "'");
        try {
            series.add(date, row);
        } catch (const Error& e) {
            throw Error(e.code(), source + ":" + std::to_string(reader.line()) + ": " + e.what());
        }
    }
    return series;
}

inline FactorSeries load_factor_series(const std::string& path) {
    auto in = open_input(path);
    return read_factor_series(in, path);
}

}  // namespace screenwise
