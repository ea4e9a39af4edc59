#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screenwise/agents/events.hpp"
#include "screenwise/backtest/bundle.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/rng.hpp"
#include "screenwise/core/text.hpp"
#include "screenwise/ruledsl/rules.hpp"

namespace screenwise {

struct WorldSpec {
    int assets = 100;
    int months = 240;
    Month start{2000, 1};
    int factors = 3;
    /// Scales every predictive link (characteristics, sentiment, analysts).
    double predictive_strength = 1.0;
    double late_entry_fraction = 0.1;
    double missing_fraction = 0.01;
    std::uint64_t seed = 1;

    void validate() const {
        if (assets < 2 || months < 2 || factors < 1)
            throw Error(ErrorCode::Config, "synthetic world needs >= 2 assets, >= 2 months and >= 1 factor");
        if (!(predictive_strength >= 0.0)) throw Error(ErrorCode::Config, "predictive strength must be >= 0");
        if (!(late_entry_fraction >= 0.0 && late_entry_fraction <= 0.5))
            throw Error(ErrorCode::Config, "late entry fraction must be in [0, 0.5]");
        if (!(missing_fraction >= 0.0 && missing_fraction < 0.5))
            throw Error(ErrorCode::Config, "missing fraction must be in [0, 0.5)");
    }
};

inline const std::vector<std::string>& world_features() {
    static const std::vector<std::string> f{"bm", "gp", "mom12m", "mve"};
    return f;
}

struct SyntheticWorld {
    WorldSpec spec;
    DataBundle bundle;
    std::vector<std::string> factor_names;
};

inline std::string world_asset_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%04d", i + 1);
    return buf;
}

/// Factor-driven returns whose cross-section is tilted by lagged
/// characteristics; sentiment and analyst events lead next-month
/// idiosyncratic returns. Strength 0 removes every predictive link.
inline SyntheticWorld generate_world(const WorldSpec& spec) {
    spec.validate();
    const int p = spec.assets, T = spec.months, K = spec.factors;
    const double s = spec.predictive_strength;
    const SeedSplitter seeds(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SyntheticWorld w;
    w.spec = spec;
    for (int k = 0; k < K; ++k) w.factor_names.push_back("f" + std::to_string(k + 1));

    auto frng = seeds.engine("world.factors");
    Eigen::MatrixXd f(T, K);
    for (int t = 0; t < T; ++t)
        for (int k = 0; k < K; ++k) f(t, k) = (k == 0 ? 0.006 : 0.002) + (k == 0 ? 0.045 : 0.025) * normal(frng);

    auto arng = seeds.engine("world.assets");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd loadings(p, K);
    Eigen::VectorXd idio_sd(p), alpha(p);
    std::vector<int> first_month(static_cast<std::size_t>(p), 0);
    for (int i = 0; i < p; ++i) {
        for (int k = 0; k < K; ++k) loadings(i, k) = (k == 0 ? 1.0 : 0.0) + 0.4 * normal(arng);
        idio_sd(i) = 0.04 + 0.06 * unit(arng);
        alpha(i) = 0.002 * normal(arng);
        if (unit(arng) < spec.late_entry_fraction)
            first_month[static_cast<std::size_t>(i)] = 1 + static_cast<int>(unit(arng) * (T / 2));
    }

    // standardized AR(1) characteristic states, T x p per feature
    const auto& features = world_features();
    auto crng = seeds.engine("world.characteristics");
    std::vector<Eigen::MatrixXd> state(features.size(), Eigen::MatrixXd(T, p));
    for (auto& x : state)
        for (int i = 0; i < p; ++i) {
            x(0, i) = normal(crng);
            for (int t = 1; t < T; ++t) x(t, i) = 0.9 * x(t - 1, i) + std::sqrt(1.0 - 0.81) * normal(crng);
        }
    const auto& bm = state[0];
    const auto& gp = state[1];
    const auto& mom = state[2];

    auto erng = seeds.engine("world.shocks");
    // one extra row so the final month's news has something to lead
    Eigen::MatrixXd eps(T + 1, p);
    for (int t = 0; t <= T; ++t)
        for (int i = 0; i < p; ++i) eps(t, i) = normal(erng);

    for (int t = 0; t < T; ++t) {
        const Month date = spec.start + t;
        for (int i = 0; i < p; ++i) {
            if (t < first_month[static_cast<std::size_t>(i)]) continue;
            double r = alpha(i) + loadings.row(i).dot(f.row(t)) + idio_sd(i) * eps(t, i);
            if (t > 0) r += s * 0.004 * (0.5 * mom(t - 1, i) + 0.3 * gp(t - 1, i) + 0.2 * bm(t - 1, i));
            w.bundle.returns.add(date, world_asset_name(i), std::max(r, -0.95));
        }
    }

    auto mrng = seeds.engine("world.missing");
    for (int t = 0; t < T; ++t) {
        const Month date = spec.start + t;
        for (int i = 0; i < p; ++i) {
            if (t < first_month[static_cast<std::size_t>(i)]) continue;
            for (std::size_t k = 0; k < features.size(); ++k) {
                const double z = state[k](t, i);
                double raw = 0.0;
                if (features[k] == "bm") raw = std::exp(-0.5 + 0.6 * z);
                else if (features[k] == "gp") raw = 0.3 + 0.12 * z;
                else if (features[k] == "mom12m") raw = 0.1 + 0.35 * z;
                else raw = 7.5 + 1.8 * z;
                std::optional<double> v = raw;
                if (unit(mrng) < spec.missing_fraction) v.reset();
                w.bundle.characteristics.add(date, world_asset_name(i), features[k], v);
            }
        }
    }

    FactorSeries factors(w.factor_names);
    for (int t = 0; t < T; ++t) factors.add(spec.start + t, f.row(t).transpose());
    w.bundle.factors = std::move(factors);

    // news and analyst events in month t lead the month t+1 shock
    auto srng = seeds.engine("world.sentiment");
    auto anrng = seeds.engine("world.analyst");
    std::poisson_distribution<int> news_count(1.5);
    for (int t = 0; t < T; ++t) {
        const Month date = spec.start + t;
        const int days = static_cast<int>(static_cast<unsigned>(date.last_day().day()));
        std::uniform_int_distribution<int> day(1, days);
        auto stamp = [&](std::mt19937_64& g) {
            return std::chrono::year{date.year()} / std::chrono::month{static_cast<unsigned>(date.month())} /
                   std::chrono::day{static_cast<unsigned>(day(g))};
        };
        for (int i = 0; i < p; ++i) {
            if (t < first_month[static_cast<std::size_t>(i)]) continue;
            const double lead = eps(t + 1, i);
            const int count = news_count(srng);
            for (int e = 0; e < count; ++e) {
                const double score = std::tanh(s * 0.08 * lead + 0.5 * normal(srng));
                w.bundle.sentiment.push_back({world_asset_name(i), stamp(srng), score});
            }
            if (unit(anrng) < 0.3) {
                const double level = 3.0 - s * 0.2 * lead + 0.8 * normal(anrng);
                const double rec = std::clamp(std::round(level), 1.0, 5.0);
                w.bundle.analyst.push_back({world_asset_name(i), stamp(anrng), rec});
            }
        }
    }
    auto by_time = [](const ScoredEvent& a, const ScoredEvent& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.asset < b.asset;
    };
    std::stable_sort(w.bundle.sentiment.begin(), w.bundle.sentiment.end(), by_time);
    std::stable_sort(w.bundle.analyst.begin(), w.bundle.analyst.end(), by_time);

    ruledsl::RuleSchedule rules;
    const Month last = spec.start + (T - 1);
    for (int y = spec.start.year(); y <= last.year(); ++y) {
        const Month from = std::max(Month(y, 1), spec.start), to = std::min(Month(y, 12), last);
        const bool odd = y % 2;
        rules.add(ruledsl::make_rule_pair(odd ? "mom12m > 0.5 AND gp > 0.0" : "mom12m > 0.4 AND (gp > 0.2 OR bm > 0.5)",
                                          odd ? "mom12m < -0.5 OR (gp < -1.0 AND bm < 0.0)"
                                              : "mom12m < -0.4 AND NOT gp > 0.5",
                                          from, to));
    }
    w.bundle.rules = std::move(rules);
    return w;
}

struct WorldFiles {
    std::string returns, characteristics, factors, sentiment, analyst, rules;
};

inline WorldFiles world_file_names(const std::filesystem::path& dir) {
    return {(dir / "returns.csv").string(),   (dir / "characteristics.csv").string(),
            (dir / "factors.csv").string(),   (dir / "sentiment.csv").string(),
            (dir / "analyst.csv").string(),   (dir / "rules.jsonl").string()};
}

inline void write_world(const SyntheticWorld& w, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
    const auto names = world_file_names(dir);
    auto open = [](const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
        return out;
    };
    {
        auto out = open(names.returns);
        out << "date,asset,ret\n";
        for (const auto& o : w.bundle.returns.observations())
            out << o.date.str() << ',' << o.asset << ',' << format_double(o.ret) << '\n';
    }
    {
        auto out = open(names.characteristics);
        out << "date,asset,feature,value\n";
        for (Month d : w.bundle.characteristics.dates())
            for (const auto& [asset, row] : *w.bundle.characteristics.at(d))
                for (const auto& [feature, v] : row)
                    out << d.str() << ',' << asset << ',' << feature << ','
                        << (v.value ? format_double(*v.value) : std::string()) << '\n';
    }
    {
        auto out = open(names.factors);
        out << "date";
        for (const auto& n : w.factor_names) out << ',' << n;
        out << '\n';
        const Month first = w.spec.start;
        const auto panel = w.bundle.factors->window([&] {
            std::vector<Month> d;
            for (int t = 0; t < w.spec.months; ++t) d.push_back(first + t);
            return d;
        }());
        for (std::size_t t = 0; t < panel.dates.size(); ++t) {
            out << panel.dates[t].str();
            for (Eigen::Index k = 0; k < panel.values.cols(); ++k)
                out << ',' << format_double(panel.values(static_cast<Eigen::Index>(t), k));
            out << '\n';
        }
    }
    auto write_events = [&](const std::string& path, const char* column, const std::vector<ScoredEvent>& events) {
        auto out = open(path);
        out << "date,asset," << column << '\n';
        for (const auto& e : events) out << format_date(e.timestamp) << ',' << e.asset << ',' << format_double(e.value) << '\n';
    };
    write_events(names.sentiment, "score", w.bundle.sentiment);
    write_events(names.analyst, "recommendation", w.bundle.analyst);
    {
        auto out = open(names.rules);
        ruledsl::write_rule_schedule(out, *w.bundle.rules);
    }
}

}  // namespace screenwise
