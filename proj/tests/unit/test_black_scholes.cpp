#include <cmath>

#include <gtest/gtest.h>

#include <corrheston/black_scholes.hpp>
#include <corrheston/errors.hpp>

using namespace corrheston;

TEST(BlackScholes, TextbookValues) {
    // S=42, K=40, r=10%, sigma=20%, T=6m: call 4.7594, put 0.8086 (4 d.p.).
    EXPECT_NEAR(bs_price(42.0, 40.0, 0.2, 0.5, 0.1, 0.0, OptionSide::Call), 4.7594, 5e-5);
    EXPECT_NEAR(bs_price(42.0, 40.0, 0.2, 0.5, 0.1, 0.0, OptionSide::Put), 0.8086, 5e-5);
}

TEST(BlackScholes, PutCallParity) {
    for (double k : {0.8, 1.0, 1.3}) {
        const double c = bs_price(1.05, k, 0.12, 0.7, 0.03, 0.01, OptionSide::Call);
        const double p = bs_price(1.05, k, 0.12, 0.7, 0.03, 0.01, OptionSide::Put);
        EXPECT_NEAR(c - p, 1.05 * std::exp(-0.01 * 0.7) - k * std::exp(-0.03 * 0.7), 1e-14);
    }
}

TEST(BlackScholes, NormalQuantileInvertsCdf) {
    for (double p : {1e-12, 1e-5, 0.025, 0.3, 0.5, 0.9, 1.0 - 1e-9}) {
        EXPECT_NEAR(norm_cdf(norm_inv(p)) / p, 1.0, 1e-12);
    }
}

TEST(BlackScholes, ImpliedVolRoundTrip) {
    for (double vol : {0.01, 0.08, 0.3, 1.5}) {
        for (double k : {0.6, 0.95, 1.0, 1.1, 1.8}) {
            for (OptionSide side : {OptionSide::Call, OptionSide::Put}) {
                // Skip cases where the time value is lost to rounding.
                const double fwd = forward_price(1.0, 0.5, 0.02, 0.01);
                const OptionSide otm = k >= fwd ? OptionSide::Call : OptionSide::Put;
                if (bs_price(1.0, k, vol, 0.5, 0.02, 0.01, otm) < 1e-10) continue;
                const double price = bs_price(1.0, k, vol, 0.5, 0.02, 0.01, side);
                EXPECT_NEAR(implied_vol(price, 1.0, k, 0.5, 0.02, 0.01, side), vol, 1e-8)
                    << "vol " << vol << " k " << k;
            }
        }
    }
}

TEST(BlackScholes, ImpliedVolRejectsArbitrage) {
    EXPECT_THROW((void)implied_vol(1.5, 1.0, 1.0, 0.5, 0.0, 0.0, OptionSide::Call), Error);
    EXPECT_THROW((void)implied_vol(-0.1, 1.0, 1.0, 0.5, 0.0, 0.0, OptionSide::Put), Error);
}

TEST(BlackScholes, DeltaStrikeRoundTrip) {
    for (DeltaConvention conv : {DeltaConvention::Spot, DeltaConvention::Forward}) {
        for (double d : {0.1, 0.25, 0.4}) {
            const double kc = strike_from_delta(d, 1.0, 0.09, 0.25, 0.02, 0.01, OptionSide::Call, conv);
            EXPECT_NEAR(bs_delta(1.0, kc, 0.09, 0.25, 0.02, 0.01, OptionSide::Call, conv), d, 1e-12);
            const double kp = strike_from_delta(-d, 1.0, 0.09, 0.25, 0.02, 0.01, OptionSide::Put, conv);
            EXPECT_NEAR(bs_delta(1.0, kp, 0.09, 0.25, 0.02, 0.01, OptionSide::Put, conv), -d, 1e-12);
            EXPECT_LT(kp, kc);
        }
    }
}

TEST(BlackScholes, AtmStrikeIsForward) {
    const double k = atm_strike(1.0, 0.25, 0.03, 0.01);
    EXPECT_NEAR(k, std::exp(0.02 * 0.25), 1e-15);
    EXPECT_NEAR(bs_price(1.0, k, 0.08, 0.25, 0.03, 0.01, OptionSide::Call),
                bs_price(1.0, k, 0.08, 0.25, 0.03, 0.01, OptionSide::Put), 1e-15);
}

TEST(BlackScholes, SmileQuoteRoundTrip) {
    const SmileQuote q{0.25, 0.08, 0.01, 0.005};
    const SmileVols v = smile_vols(q);
    EXPECT_NEAR(v.call25 - v.put25, 0.01, 1e-15);
    EXPECT_NEAR(0.5 * (v.call25 + v.put25) - v.atm, 0.005, 1e-15);
    const SmileQuote back = quote_from_vols(0.25, v);
    EXPECT_NEAR(back.rr25, q.rr25, 1e-15);
    EXPECT_NEAR(back.bf25, q.bf25, 1e-15);
    EXPECT_NEAR(back.atm_vol, q.atm_vol, 1e-15);
}

TEST(BlackScholes, VegaMatchesFiniteDifference) {
    const double h = 1e-5;
    const double fd = (bs_price(1.0, 1.05, 0.1 + h, 0.5, 0.01, 0.0, OptionSide::Call) -
                       bs_price(1.0, 1.05, 0.1 - h, 0.5, 0.01, 0.0, OptionSide::Call)) /
                      (2.0 * h);
    EXPECT_NEAR(bs_vega(1.0, 1.05, 0.1, 0.5, 0.01, 0.0), fd, 1e-8);
}
