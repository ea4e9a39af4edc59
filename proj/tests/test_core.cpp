#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "screenwise/core/config.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/core/month.hpp"
#include "screenwise/core/rng.hpp"
#include "screenwise/core/text.hpp"

using namespace screenwise;

TEST(Month, ArithmeticAndFormatting) {
    const Month m(2020, 1);
    EXPECT_EQ(m.str(), "2020-01");
    EXPECT_EQ((m - 1).str(), "2019-12");
    EXPECT_EQ((m + 13).str(), "2021-02");
    EXPECT_EQ(Month(2021, 2) - m, 13);
    EXPECT_LT(Month(2019, 12), m);
    Month k = Month(1999, 12);
    ++k;
    EXPECT_EQ(k, Month(2000, 1));
}

TEST(Month, ParseAcceptsMonthAndDay) {
    EXPECT_EQ(Month::parse("2024-03"), Month(2024, 3));
    EXPECT_EQ(Month::parse("2024-02-29"), Month(2024, 2));
    for (const char* bad : {"2024-13", "2024-3", "24-03", "2023-02-29", "2024/03", "abcd-ef", ""})
        EXPECT_THROW(Month::parse(bad), Error) << bad;
}

TEST(Month, DayHelpers) {
    EXPECT_EQ(format_date(Month(2024, 2).last_day()), "2024-02-29");
    EXPECT_EQ(format_date(Month(2023, 2).last_day()), "2023-02-28");
    EXPECT_EQ(days_between(parse_date("2024-01-25"), parse_date("2024-02-01")), 7);
    EXPECT_EQ(days_between(parse_date("2024-02-01"), parse_date("2024-01-25")), -7);
    EXPECT_EQ(Month::of(parse_date("2021-07-15")), Month(2021, 7));
    EXPECT_THROW(parse_date("2024-01"), Error);
}

TEST(Text, SplitTrimAndParse) {
    auto f = split(" a , b,,c ");
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[0], "a");
    EXPECT_EQ(f[2], "");
    EXPECT_EQ(f[3], "c");
    double v = 0;
    EXPECT_TRUE(parse_double("-0.25", v));
    EXPECT_DOUBLE_EQ(v, -0.25);
    EXPECT_TRUE(parse_double("+3", v));
    EXPECT_FALSE(parse_double("1.5x", v));
    EXPECT_FALSE(parse_double("", v));
}

TEST(Text, FormatDoubleRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, -1e-300, 123456789.123, 0.0}) {
        double y = 0;
        ASSERT_TRUE(parse_double(format_double(x), y));
        EXPECT_EQ(x, y);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Text, ReaderReportsLineNumbers) {
    std::istringstream in("a,b\n1,2\n\n3\n");
    DelimitedReader r(in, "src");
    r.expect_header({"a", "b"});
    std::vector<std::string_view> f;
    ASSERT_TRUE(r.next(f));
    EXPECT_EQ(r.line(), 2u);
    ASSERT_TRUE(r.next(f));
    EXPECT_EQ(r.line(), 4u);
    try {
        r.fail("boom");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 4u);
        EXPECT_NE(std::string(e.what()).find("src:4"), std::string::npos);
    }
    EXPECT_FALSE(r.next(f));

    std::istringstream bad("x,b\n");
    DelimitedReader r2(bad, "src");
    EXPECT_THROW(r2.expect_header({"a", "b"}), ParseError);
}

TEST(Errors, StableCodes) {
    EXPECT_EQ(to_string(ErrorCode::Parse), "E_PARSE");
    EXPECT_EQ(to_string(ErrorCode::NotPositiveDefinite), "E_NOT_POSITIVE_DEFINITE");
    EXPECT_EQ(to_string(ErrorCode::Theory), "E_THEORY");
    ConvergenceError c("x", {1.0, 2.0}, 0.5, {3.0});
    EXPECT_EQ(c.code(), ErrorCode::Convergence);
    EXPECT_EQ(c.last_iterate().size(), 2u);
    EXPECT_DOUBLE_EQ(c.residual(), 0.5);
}

TEST(Seeds, StreamsAreStableAndIndependent) {
    const SeedSplitter s(42);
    EXPECT_EQ(s.seed("a", 1), SeedSplitter(42).seed("a", 1));
    std::set<std::uint64_t> seen;
    for (const char* name : {"a", "b", "precision.deep", "theory.market"})
        for (std::uint64_t i = 0; i < 50; ++i) seen.insert(s.seed(name, i));
    EXPECT_EQ(seen.size(), 200u);
    EXPECT_NE(SeedSplitter(1).seed("a"), SeedSplitter(2).seed("a"));
    auto e1 = s.engine("x", 3), e2 = s.engine("x", 3);
    EXPECT_EQ(e1(), e2());
}

TEST(Config, TypedGettersAndErrors) {
    std::istringstream in("# comment\nalpha = 1.5\nn = 3  # trailing\nflag = yes\nlist = a, b ,c\nwhen = 2020-05\n");
    auto kv = read_key_value_config(in);
    EXPECT_DOUBLE_EQ(kv.number("alpha", 0), 1.5);
    EXPECT_EQ(kv.integer("n", 0), 3);
    EXPECT_TRUE(kv.boolean("flag", false));
    EXPECT_EQ(kv.list("list", ""), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(kv.list("missing", "x,y"), (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(kv.month("when"), Month(2020, 5));
    EXPECT_EQ(kv.unsigned_integer("n", 0), 3u);
    EXPECT_DOUBLE_EQ(kv.number("absent", 7.0), 7.0);
    EXPECT_THROW(kv.integer("alpha", 0), Error);
    EXPECT_THROW(kv.required("absent"), Error);
    EXPECT_THROW(kv.check_keys({"alpha"}), Error);
    EXPECT_NO_THROW(kv.check_keys({"alpha", "n", "flag", "list", "when"}));

    std::istringstream dup("a = 1\na = 2\n");
    try {
        read_key_value_config(dup);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Config);
    }
    std::istringstream noeq("just text\n");
    EXPECT_THROW(read_key_value_config(noeq), Error);
    EXPECT_THROW(load_key_value_config("/nonexistent/x.cfg"), Error);
}
