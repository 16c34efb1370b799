#pragma once

// Black-Scholes pricing and FX smile conventions.
//
// Conventions used throughout the library unless a DeltaConvention is passed:
//   * delta is premium-excluded spot delta, e^{-q tau} N(d1) for calls;
//   * the ATM strike is the forward S e^{(r - q) tau};
//   * the 25-delta butterfly is the smile butterfly (average wing vol less ATM).

namespace corrheston {

enum class OptionSide { Call, Put };

enum class DeltaConvention {
    Spot,     // e^{-q tau} N(d1)
    Forward,  // N(d1)
};

/// Market smile at one tenor in volatility units (0.01 = 1 vol point).
struct SmileQuote {
    double tenor = 0.25;
    double atm_vol = 0.08;
    double rr25 = 0.0;
    double bf25 = 0.0;

    void validate() const;
};

struct VanillaOption {
    double strike = 100.0;
    double expiry = 0.25;
    OptionSide side = OptionSide::Call;

    void validate() const;
};

struct SmileVols {
    double put25 = 0.0;
    double atm = 0.0;
    double call25 = 0.0;
};

[[nodiscard]] double norm_cdf(double x);
[[nodiscard]] double norm_pdf(double x);
[[nodiscard]] double norm_inv(double p);

[[nodiscard]] double forward_price(double spot, double tau, double r, double q);

/// Black-Scholes price. vol = 0 or tau = 0 give the discounted intrinsic value
/// on the forward.
[[nodiscard]] double bs_price(double spot, double strike, double vol, double tau, double r,
                              double q, OptionSide side);

[[nodiscard]] double bs_delta(double spot, double strike, double vol, double tau, double r,
                              double q, OptionSide side,
                              DeltaConvention convention = DeltaConvention::Spot);

/// dPrice/dVol.
[[nodiscard]] double bs_vega(double spot, double strike, double vol, double tau, double r,
                             double q);

/// Black-Scholes volatility reproducing price. Safeguarded Newton/bisection on
/// [0, 5]; returns 0 at the lower no-arbitrage bound. Throws NoSolutionError
/// when the price lies outside the band or needs a volatility above 5.
[[nodiscard]] double implied_vol(double price, double spot, double strike, double tau, double r,
                                 double q, OptionSide side);

/// Strike whose Black-Scholes delta at vol equals delta_target. Calls need
/// delta_target in (0, 1), puts in (-1, 0); unattainable targets throw
/// NoSolutionError.
[[nodiscard]] double strike_from_delta(double delta_target, double spot, double vol, double tau,
                                       double r, double q, OptionSide side,
                                       DeltaConvention convention = DeltaConvention::Spot);

/// Forward ATM strike.
[[nodiscard]] double atm_strike(double spot, double tau, double r, double q);

/// Wing and ATM vols from (ATM, RR25, BF25):
///   call25 = atm + bf25 + rr25 / 2,  put25 = atm + bf25 - rr25 / 2.
[[nodiscard]] SmileVols smile_vols(const SmileQuote& quote);

/// Inverse of smile_vols.
[[nodiscard]] SmileQuote quote_from_vols(double tenor, const SmileVols& vols);

}  // namespace corrheston
