#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include <corrheston/analytics.hpp>
#include <corrheston/errors.hpp>

using namespace corrheston;

TEST(Ols, ExactLine) {
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(0.01 * i - 0.2);
        y.push_back(0.3 - 1.7 * x.back());
    }
    const RrBetaEstimate e = ols_fit(x, y);
    EXPECT_NEAR(e.beta_rr, -1.7, 1e-12);
    EXPECT_NEAR(e.intercept, 0.3, 1e-12);
    EXPECT_NEAR(e.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(e.corr, -1.0, 1e-12);
    EXPECT_EQ(e.n, 50u);
}

TEST(Ols, RejectsDegenerateInput) {
    std::vector<double> few(10, 1.0);
    EXPECT_THROW((void)ols_fit(few, few), Error);
    std::vector<double> flat(40, 2.0);
    std::vector<double> y(40);
    for (int i = 0; i < 40; ++i) y[i] = i;
    EXPECT_THROW((void)ols_fit(flat, y), DomainError);
}

TEST(RrBeta, EtaRoundTrip) {
    for (double eta : {0.05, 0.2, 0.4, 0.6}) {
        const double beta = model_rr_beta(0.037, 0.3, eta, 0.01);
        EXPECT_NEAR(estimate_eta(beta, 0.037, 0.3, 0.01), eta, 1e-12);
    }
    EXPECT_EQ(model_rr_beta(0.037, 0.3, 0.0, 0.01), 0.0);
    EXPECT_THROW((void)estimate_eta(-0.1, 0.037, 0.3, 0.01), Error);
}

TEST(KTau, StableUnderBumpHalving) {
    const ModelParams p = symmetric_params(0.01, 0.3, 2.0, 0.0, 0.4);
    const double a = model_k_tau(p, 1.0, 0.25, 0.01);
    const double b = model_k_tau(p, 1.0, 0.25, 0.005);
    EXPECT_NEAR(b / a, 1.0, 1e-3);
    EXPECT_GT(a, 0.0);
}

TEST(KTau, UndefinedWithoutCorrelationRange) {
    const ModelParams p = symmetric_params(0.01, 0.3, 2.0, 0.0, 0.0);
    EXPECT_THROW((void)model_k_tau(p, 1.0, 0.25), DomainError);
}

TEST(KTau, ImpliedBetaMatchesClosedForm) {
    const ModelParams p = symmetric_params(0.01, 0.3, 2.0, 0.0, 0.4);
    const double k = model_k_tau(p, 1.0, 0.25);
    EXPECT_NEAR(model_rr_beta(k, 0.3, 0.4, 0.01), k * 0.3 * 0.16 / 0.01, 1e-15);
}

TEST(MarketSeries, ParsesAndDropsBadRows) {
    std::istringstream in(
        "date,spot,rr\n"
        "2024-01-02,1.10,0.50\n"
        "2024-01-03,1.11,0.55\n"
        "not-a-date,1.12,0.60\n"
        "2024-01-05,,0.60\n"
        "2024-01-08,1.09,nan\n"
        "2024-01-09,1.08,0.40\n");
    const MarketSeries s = read_market_series(in);
    ASSERT_EQ(s.spot.size(), 3u);
    EXPECT_EQ(s.dropped_rows, 3u);
    EXPECT_NEAR(s.rr[1], 0.0055, 1e-15);  // vol points to vol units
    EXPECT_EQ(s.dates[2], std::chrono::year_month_day{std::chrono::year{2024} / 1 / 9});
}

TEST(MarketSeries, RejectsWrongHeader) {
    std::istringstream in("day,price,rr\n2024-01-02,1.1,0.5\n");
    EXPECT_THROW((void)read_market_series(in), Error);
}

TEST(MarketSeries, RegressionRecoversSlope) {
    std::ostringstream csv;
    csv << "date,spot,rr\n";
    double spot = 1.0;
    double rr = 0.5;
    auto day = std::chrono::sys_days{std::chrono::year{2020} / 1 / 1};
    for (int i = 0; i < 200; ++i) {
        const double x = 0.004 * std::sin(1.7 * i);
        spot *= std::exp(x);
        rr += 100.0 * 0.16 * x;
        const std::chrono::year_month_day ymd{day};
        csv << static_cast<int>(ymd.year()) << '-' << (static_cast<unsigned>(ymd.month()) < 10 ? "0" : "")
            << static_cast<unsigned>(ymd.month()) << '-'
            << (static_cast<unsigned>(ymd.day()) < 10 ? "0" : "") << static_cast<unsigned>(ymd.day())
            << ',' << spot << ',' << rr << '\n';
        day += std::chrono::days{1};
    }
    std::istringstream in(csv.str());
    const RrBetaEstimate e = estimate_rr_beta(read_market_series(in));
    EXPECT_NEAR(e.beta_rr, 0.16, 1e-3);
}
