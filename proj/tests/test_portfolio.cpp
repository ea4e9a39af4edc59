#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "screenwise/portfolio/weights.hpp"

using namespace screenwise;

namespace {

std::vector<std::string> names(Eigen::Index p) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < p; ++i) out.push_back("A" + std::to_string(i));
    return out;
}

PrecisionEstimate precision(const Eigen::MatrixXd& gamma, PrecisionMethod m = PrecisionMethod::NonlinearShrinkage) {
    return PrecisionEstimate{names(gamma.rows()), gamma, m, {}};
}

MeanEstimate mean(const Eigen::VectorXd& mu) { return {names(mu.size()), mu}; }

Eigen::VectorXd random_mu(std::mt19937_64& rng, Eigen::Index p) {
    std::normal_distribution<double> nd(0.01, 0.01);
    Eigen::VectorXd mu(p);
    for (Eigen::Index i = 0; i < p; ++i) mu(i) = nd(rng);
    return mu;
}

double sharpe(const Eigen::VectorXd& w, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    return w.dot(mu) / std::sqrt(w.dot(sigma * w));
}

}  // namespace

TEST(Mean, Examples) {
    ReturnsMatrix r{names(2), {Month(2020, 1), Month(2020, 2)}, Eigen::MatrixXd(2, 2)};
    r.values << 0.01, 0.02, 0.01, 0.00;
    auto m = estimate_mean(r);
    EXPECT_DOUBLE_EQ(m.mu(0), 0.01);
    EXPECT_DOUBLE_EQ(m.mu(1), 0.01);
    EXPECT_THROW(estimate_mean(ReturnsMatrix{names(2), {}, Eigen::MatrixXd(0, 2)}), Error);
}

TEST(Mean, MatchesNaiveSummation) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0, 0.05);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 40), p = 1 + static_cast<int>(rng() % 8);
        ReturnsMatrix r{names(p), {}, Eigen::MatrixXd(n, p)};
        for (Eigen::Index i = 0; i < r.values.size(); ++i) r.values.data()[i] = nd(rng);
        auto m = estimate_mean(r);
        for (int j = 0; j < p; ++j) {
            double s = 0;
            for (int t = 0; t < n; ++t) s += r.values(t, j);
            ASSERT_NEAR(m.mu(j), s / n, 1e-12);
        }
    }
}

TEST(Gmv, IdentityAndScaleInvariance) {
    auto w = gmv_weights(precision(Eigen::MatrixXd::Identity(4, 4)));
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w.weights()(i), 0.25);
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd g = oracle::random_spd(rng, 6);
    auto a = gmv_weights(precision(g)), b = gmv_weights(precision(3.7 * g));
    EXPECT_LT((a.weights() - b.weights()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::MatrixXd bad(2, 2);
    bad << 1, -1, -1, 1;
    EXPECT_THROW(gmv_weights(precision(bad)), Error);
}

TEST(Gmv, MatchesConstrainedMinimizer) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd sigma = oracle::random_spd(rng, 5);
        auto w = gmv_weights(precision(sigma.inverse()));
        EXPECT_LT((w.weights() - oracle::gmv(sigma)).cwiseAbs().maxCoeff(), 1e-6) << trial;
    }
}

TEST(Gmv, BeatsRandomUnitSumPortfolios) {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd sigma = oracle::random_spd(rng, 5);
    const Eigen::VectorXd w = gmv_weights(precision(sigma.inverse())).weights();
    const double best = w.dot(sigma * w);
    std::normal_distribution<double> nd(0.2, 0.5);
    for (int i = 0; i < 10000; ++i) {
        Eigen::VectorXd v(5);
        for (int j = 0; j < 5; ++j) v(j) = nd(rng);
        v /= v.sum();
        ASSERT_LE(best, v.dot(sigma * v) + 1e-15);
    }
}

TEST(Mv, TwoAssetExample) {
    Eigen::VectorXd mu(2);
    mu << 0.02, 0.0;
    auto w = mv_weights(precision(Eigen::MatrixXd::Identity(2, 2)), mean(mu), 0.01);
    EXPECT_NEAR(w.weights()(0), 0.5, 1e-15);
    EXPECT_NEAR(w.weights()(1), 0.5, 1e-15);
    EXPECT_NEAR(w.weights().dot(mu), 0.01, 1e-15);
}

TEST(Mv, ConstantMeanIsDegenerate) {
    std::mt19937_64 rng(5);
    try {
        mv_weights(precision(oracle::random_spd(rng, 4)), mean(Eigen::VectorXd::Constant(4, 0.01)), 0.01);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Degenerate);
    }
}

TEST(Mv, MatchesConstrainedMinimizer) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd sigma = oracle::random_spd(rng, 5);
        const Eigen::VectorXd mu = random_mu(rng, 5);
        auto w = mv_weights(precision(sigma.inverse()), mean(mu), 0.01);
        EXPECT_NEAR(w.weights().sum(), 1.0, 1e-10);
        EXPECT_NEAR(w.weights().dot(mu), 0.01, 1e-8);
        EXPECT_LT((w.weights() - oracle::mean_variance(sigma, mu, 0.01)).cwiseAbs().maxCoeff(), 1e-6) << trial;
    }
}

TEST(Msr, EqualMeansAndScaleInvariance) {
    auto w = msr_weights(precision(Eigen::MatrixXd::Identity(3, 3)), mean(Eigen::VectorXd::Constant(3, 0.02)));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(w.weights()(i), 1.0 / 3.0, 1e-15);
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd g = oracle::random_spd(rng, 5);
    const Eigen::VectorXd mu = random_mu(rng, 5);
    auto a = msr_weights(precision(g), mean(mu)), b = msr_weights(precision(g), mean(2.5 * mu));
    EXPECT_LT((a.weights() - b.weights()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::VectorXd zero(2);
    zero << 0.01, -0.01;
    EXPECT_THROW(msr_weights(precision(Eigen::MatrixXd::Identity(2, 2)), mean(zero)), Error);
}

TEST(Msr, MatchesRatioMaximizer) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd sigma = oracle::random_spd(rng, 5);
        const Eigen::VectorXd mu = random_mu(rng, 5);
        auto w = msr_weights(precision(sigma.inverse()), mean(mu));
        EXPECT_LT((w.weights() - oracle::max_sharpe(sigma, mu)).cwiseAbs().maxCoeff(), 1e-6) << trial;
    }
}

TEST(Msr, BeatsRandomUnitSumPortfolios) {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd sigma = oracle::random_spd(rng, 5);
    const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(5, 0.004, 0.015);
    const Eigen::VectorXd w = msr_weights(precision(sigma.inverse()), mean(mu)).weights();
    ASSERT_GT(w.dot(mu), 0.0);
    const double best = sharpe(w, mu, sigma);
    std::normal_distribution<double> nd(0.2, 0.5);
    for (int i = 0; i < 100000; ++i) {
        Eigen::VectorXd v(5);
        for (int j = 0; j < 5; ++j) v(j) = nd(rng);
        v /= v.sum();
        ASSERT_LE(sharpe(v, mu, sigma), best + 1e-12);
    }
}

TEST(Weights, NodewiseEstimatesAreSymmetrized) {
    Eigen::MatrixXd g(2, 2);
    g << 2, -1, 0, 2;  // asymmetric
    auto w = gmv_weights(precision(g, PrecisionMethod::Nodewise));
    // symmetric part [[2,-.5],[-.5,2]] has equal row sums
    EXPECT_NEAR(w.weights()(0), 0.5, 1e-15);
    auto raw = gmv_weights(precision(g, PrecisionMethod::Poet));
    EXPECT_NE(raw.weights()(0), 0.5);
    for (auto o : {Objective::Gmv, Objective::Mv, Objective::Msr}) {
        Eigen::VectorXd mu(2);
        mu << 0.01, 0.02;
        EXPECT_NEAR(portfolio_weights(o, precision(Eigen::MatrixXd::Identity(2, 2)), mean(mu), 0.01).weights().sum(),
                    1.0, 1e-10);
    }
}

TEST(Weights, ValidationAndOutput) {
    EXPECT_THROW(WeightVector(names(2), Eigen::Vector2d(0.3, 0.3)), Error);
    EXPECT_THROW(WeightVector(names(3), Eigen::Vector2d(0.5, 0.5)), Error);
    EXPECT_THROW(mv_weights(precision(Eigen::MatrixXd::Identity(2, 2)), MeanEstimate{{"X", "Y"}, Eigen::Vector2d(0, 1)}),
                 Error);
    WeightVector w(names(2), Eigen::Vector2d(1.5, -0.5));
    std::ostringstream out;
    write_weights_header(out);
    write_weights(out, Month(2024, 1), w);
    EXPECT_EQ(out.str(), "date,asset,weight\n2024-01,A0,1.5\n2024-01,A1,-0.5\n");
    EXPECT_EQ(parse_objective("msr"), Objective::Msr);
    EXPECT_THROW(parse_objective("maxret"), Error);
}

TEST(LongShort, EqualAndValueLegs) {
    SignalSet s(Month(2024, 1), {{"A", Signal::Buy}, {"B", Signal::Buy}, {"C", Signal::Sell}, {"D", Signal::Hold}});
    auto eq = long_short_portfolio(s, LegWeighting::Equal);
    EXPECT_EQ(eq.assets(), (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_DOUBLE_EQ(eq.weights()(0), 0.25);
    EXPECT_DOUBLE_EQ(eq.weights()(2), -0.5);
    auto vw = long_short_portfolio(s, LegWeighting::Value, {{"A", 3.0}, {"B", 1.0}, {"C", 2.0}});
    EXPECT_DOUBLE_EQ(vw.weights()(0), 0.375);
    EXPECT_THROW(long_short_portfolio(s, LegWeighting::Value, {{"A", 1.0}}), Error);
    EXPECT_THROW(long_short_portfolio(SignalSet(Month(2024, 1), {{"A", Signal::Buy}}), LegWeighting::Equal), Error);
}
