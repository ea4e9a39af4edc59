#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "screenwise/data/characteristics.hpp"
#include "screenwise/data/factors.hpp"
#include "screenwise/data/returns.hpp"
#include "screenwise/data/standardize.hpp"
#include "screenwise/data/window.hpp"

using namespace screenwise;

namespace {

ReturnsPanel parse_returns(const std::string& text) {
    std::istringstream in(text);
    return read_returns_panel(in);
}

double group_mean(const CharacteristicsPanel& p, Month d, const std::string& f, bool observed_only) {
    double s = 0;
    int n = 0;
    for (const auto& [a, row] : *p.at(d)) {
        const auto& v = row.at(f);
        if (observed_only && v.imputed) continue;
        s += *v.value;
        ++n;
    }
    return s / n;
}

double group_sd(const CharacteristicsPanel& p, Month d, const std::string& f) {
    const double m = group_mean(p, d, f, true);
    double ss = 0;
    int n = 0;
    for (const auto& [a, row] : *p.at(d)) {
        const auto& v = row.at(f);
        if (v.imputed) continue;
        ss += (*v.value - m) * (*v.value - m);
        ++n;
    }
    return std::sqrt(ss / (n - 1));
}

}  // namespace

TEST(Returns, LoadsWellFormedFile) {
    auto p = parse_returns("date,asset,ret\n2020-01,AAA,0.01\n2020-01,BBB,-0.02\n2020-02,AAA,0.03\n");
    EXPECT_EQ(p.size(), 3u);
    EXPECT_DOUBLE_EQ(*p.get("AAA", Month(2020, 2)), 0.03);
    EXPECT_FALSE(p.get("BBB", Month(2020, 2)));
    EXPECT_EQ(p.assets_at(Month(2020, 1)), (std::vector<std::string>{"AAA", "BBB"}));
    EXPECT_EQ(p.dates().size(), 2u);
}

TEST(Returns, RejectsDuplicatesAndBadValues) {
    try {
        parse_returns("date,asset,ret\n2020-01,AAA,0.01\n2020-01,AAA,0.02\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateKey);
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
    }
    try {
        parse_returns("date,asset,ret\n2020-01,AAA,-1.5\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidValue);
    }
    try {
        parse_returns("date,asset,ret\n2020-01,AAA,abc\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 2u);
    }
    EXPECT_THROW(parse_returns("date,asset,ret\n2020-01,AAA,nan\n"), Error);
    EXPECT_THROW(parse_returns("date,asset\n"), ParseError);
    EXPECT_THROW(load_returns_panel("/nonexistent/returns.csv"), Error);
}

TEST(Returns, ThroughDropsLaterDates) {
    auto p = parse_returns("date,asset,ret\n2020-01,A,0.1\n2020-02,A,0.2\n2020-03,A,0.3\n");
    auto v = p.through(Month(2020, 2));
    EXPECT_EQ(v.size(), 2u);
    EXPECT_FALSE(v.has_date(Month(2020, 3)));
}

TEST(Characteristics, MissingValuesAndDuplicates) {
    std::istringstream in("date,asset,feature,value\n2020-01,A,bm,0.5\n2020-01,B,bm,\n");
    auto p = read_characteristics_panel(in);
    EXPECT_DOUBLE_EQ(*p.value(Month(2020, 1), "A", "bm"), 0.5);
    EXPECT_FALSE(p.value(Month(2020, 1), "B", "bm"));
    ASSERT_NE(p.find(Month(2020, 1), "B", "bm"), nullptr);
    EXPECT_EQ(p.cross_section(Month(2020, 1)).at("B").size(), 0u);

    std::istringstream dup("date,asset,feature,value\n2020-01,A,bm,0.5\n2020-01,A,bm,0.6\n");
    EXPECT_THROW(read_characteristics_panel(dup), Error);
}

TEST(Characteristics, BetweenAndThrough) {
    CharacteristicsPanel p;
    for (int m = 1; m <= 5; ++m) p.add(Month(2020, m), "A", "bm", m);
    EXPECT_EQ(p.between(Month(2020, 2), Month(2020, 4)).dates().size(), 3u);
    EXPECT_EQ(p.through(Month(2020, 2)).dates().size(), 2u);
}

TEST(Standardize, OneToHundredGroup) {
    CharacteristicsPanel raw;
    const Month d(2020, 1);
    for (int i = 1; i <= 100; ++i) raw.add(d, "A" + std::to_string(1000 + i), "mve", i);
    auto z = winsorize_standardize(raw);
    // order statistics nearest ranks 0.99 and 98.01 are the values 2 and 99
    EXPECT_DOUBLE_EQ(nearest_rank_quantile({1, 2, 3, 4, 5}, 0.5), 3);
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    EXPECT_DOUBLE_EQ(nearest_rank_quantile(v, 0.01), 2);
    EXPECT_DOUBLE_EQ(nearest_rank_quantile(v, 0.99), 99);
    EXPECT_NEAR(group_mean(z, d, "mve", true), 0.0, 1e-9);
    EXPECT_NEAR(group_sd(z, d, "mve"), 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(*z.value(d, "A1001", "mve"), *z.value(d, "A1002", "mve"));
    EXPECT_DOUBLE_EQ(*z.value(d, "A1100", "mve"), *z.value(d, "A1099", "mve"));
}

TEST(Standardize, MissingBecomesImputedZero) {
    CharacteristicsPanel raw;
    const Month d(2020, 1);
    raw.add(d, "A", "bm", 1.0);
    raw.add(d, "B", "bm", 2.0);
    raw.add(d, "C", "bm", 4.0);
    raw.add(d, "D", "bm", std::nullopt);
    raw.add(d, "E", "mom12m", 0.3);  // E lacks bm entirely
    raw.add(d, "A", "mom12m", 0.1);
    auto z = winsorize_standardize(raw);
    auto* v = z.find(d, "D", "bm");
    ASSERT_NE(v, nullptr);
    EXPECT_EQ(*v->value, 0.0);
    EXPECT_TRUE(v->imputed);
    EXPECT_TRUE(z.find(d, "E", "bm")->imputed);
    EXPECT_FALSE(z.find(d, "A", "bm")->imputed);
    EXPECT_NEAR(group_mean(z, d, "bm", true), 0.0, 1e-12);
}

TEST(Standardize, DegenerateGroups) {
    CharacteristicsPanel raw;
    for (int i = 0; i < 5; ++i) raw.add(Month(2020, 1), "A" + std::to_string(i), "bm", 3.0);
    try {
        winsorize_standardize(raw);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Degenerate);
        EXPECT_NE(std::string(e.what()).find("2020-01, bm"), std::string::npos);
    }
    CharacteristicsPanel one;
    one.add(Month(2020, 1), "A", "bm", 1.0);
    EXPECT_THROW(winsorize_standardize(one), Error);
}

TEST(Standardize, IdempotentOnStandardizedGroups) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    CharacteristicsPanel raw;
    for (int m = 1; m <= 3; ++m)
        for (int i = 0; i < 200; ++i) {
            raw.add(Month(2021, m), "S" + std::to_string(i), "bm", std::exp(nd(rng)));
            raw.add(Month(2021, m), "S" + std::to_string(i), "mom12m", nd(rng));
        }
    auto once = winsorize_standardize(raw);
    CharacteristicsPanel again_in;
    for (Month d : once.dates())
        for (const auto& [a, row] : *once.at(d))
            for (const auto& [f, v] : row) again_in.add(d, a, f, v.value);
    auto twice = winsorize_standardize(again_in);
    for (Month d : once.dates())
        for (const auto& [a, row] : *once.at(d))
            for (const auto& [f, v] : row) EXPECT_NEAR(*v.value, *twice.value(d, a, f), 1e-9);
}

TEST(Window, FullCoverage) {
    ReturnsPanel p;
    for (int m = 0; m < 24; ++m) {
        p.add(Month(2019, 1) + m, "A", 0.01 * m);
        p.add(Month(2019, 1) + m, "B", -0.01 * m);
    }
    auto w = align_window(p, Month(2020, 12), 12, {"A", "B"});
    EXPECT_EQ(w.matrix.rows(), 12);
    EXPECT_EQ(w.matrix.cols(), 2);
    EXPECT_TRUE(w.dropped.empty());
    EXPECT_EQ(w.matrix.dates.front(), Month(2020, 1));
    EXPECT_DOUBLE_EQ(w.matrix.values(0, 0), 0.12);
}

TEST(Window, DropsIncompleteAssets) {
    ReturnsPanel p;
    for (int m = 0; m < 12; ++m) {
        p.add(Month(2020, 1) + m, "A", 0.0);
        if (m != 5) p.add(Month(2020, 1) + m, "B", 0.0);
    }
    auto w = align_window(p, Month(2020, 12), 12, {"A", "B", "Z"});
    EXPECT_EQ(w.matrix.assets, (std::vector<std::string>{"A"}));
    EXPECT_EQ(w.dropped, (std::vector<std::string>{"B", "Z"}));
    EXPECT_THROW(align_window(p, Month(2021, 1), 12, {"A"}), Error);
    EXPECT_THROW(align_window(p, Month(2020, 12), 12, {"B"}), Error);
    EXPECT_THROW(align_window(p, Month(2020, 12), 1, {"A"}), Error);
}

TEST(Window, MatchesBruteForceLookupAndMeans) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    std::bernoulli_distribution gap(0.03);
    ReturnsPanel p;
    std::vector<std::string> assets;
    for (int j = 0; j < 15; ++j) assets.push_back("X" + std::to_string(j));
    for (int m = 0; m < 60; ++m)
        for (const auto& a : assets)
            if (!gap(rng)) p.add(Month(2010, 1) + m, a, u(rng));
    const Month end(2014, 12);
    auto w = align_window(p, end, 36, assets);
    for (std::size_t j = 0; j < w.matrix.assets.size(); ++j) {
        double sum = 0;
        for (int i = 0; i < 36; ++i) {
            const double cell = *p.get(w.matrix.assets[j], w.matrix.dates[static_cast<std::size_t>(i)]);
            EXPECT_EQ(w.matrix.values(i, static_cast<Eigen::Index>(j)), cell);
            sum += cell;
        }
        EXPECT_NEAR(w.matrix.values.col(static_cast<Eigen::Index>(j)).mean(), sum / 36, 1e-12);
    }
    for (const auto& a : w.dropped) {
        bool missing = false;
        for (int i = 0; i < 36; ++i) missing |= !p.get(a, end - i);
        EXPECT_TRUE(missing) << a;
    }
    EXPECT_EQ(w.matrix.assets.size() + w.dropped.size(), assets.size());
}

TEST(Factors, ReadWindowAndThrough) {
    std::istringstream in("date,mkt,smb\n2020-01,0.01,0.002\n2020-02,-0.02,0.001\n2020-03,0.03,0\n");
    auto f = read_factor_series(in);
    EXPECT_EQ(f.names(), (std::vector<std::string>{"mkt", "smb"}));
    auto w = f.window({Month(2020, 2), Month(2020, 3)});
    EXPECT_EQ(w.factors(), 2);
    EXPECT_DOUBLE_EQ(w.values(0, 0), -0.02);
    EXPECT_THROW(f.window({Month(2020, 4)}), Error);
    EXPECT_EQ(f.through(Month(2020, 1)).size(), 1u);

    std::istringstream bad("date,mkt\n2020-01,0.1,0.2\n");
    EXPECT_THROW(read_factor_series(bad), ParseError);
    std::istringstream dup("date,mkt\n2020-01,0.1\n2020-01,0.2\n");
    EXPECT_THROW(read_factor_series(dup), Error);
    std::istringstream hdr("month,mkt\n");
    EXPECT_THROW(read_factor_series(hdr), ParseError);
}
