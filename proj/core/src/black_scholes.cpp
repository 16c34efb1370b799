#include "corrheston/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "corrheston/errors.hpp"

namespace corrheston {
namespace {

constexpr double kMaxVol = 5.0;

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(what);
}

double delta_scale(double tau, double q, DeltaConvention convention) {
    return convention == DeltaConvention::Spot ? std::exp(-q * tau) : 1.0;
}

}  // namespace

void SmileQuote::validate() const {
    require_positive(tenor, "tenor must be positive");
    require_positive(atm_vol, "atm_vol must be positive");
    if (!std::isfinite(rr25) || !std::isfinite(bf25)) throw ValidationError("quote must be finite");
    if (!(atm_vol + bf25 - std::abs(rr25) / 2.0 > 0.0)) {
        throw ValidationError("25-delta wing vols must be positive");
    }
}

void VanillaOption::validate() const {
    require_positive(strike, "strike must be positive");
    require_positive(expiry, "expiry must be positive");
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double norm_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_inv needs p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double forward_price(double spot, double tau, double r, double q) {
    return spot * std::exp((r - q) * tau);
}

double bs_price(double spot, double strike, double vol, double tau, double r, double q,
                OptionSide side) {
    require_positive(spot, "spot must be positive");
    require_positive(strike, "strike must be positive");
    if (!(vol >= 0.0) || !(tau >= 0.0)) throw ValidationError("vol and tau must be non-negative");

    const double df = std::exp(-r * tau);
    const double fwd = forward_price(spot, tau, r, q);
    const double sd = vol * std::sqrt(tau);
    if (sd == 0.0) {
        const double intrinsic = side == OptionSide::Call ? fwd - strike : strike - fwd;
        return df * std::max(intrinsic, 0.0);
    }
    const double d1 = std::log(fwd / strike) / sd + 0.5 * sd;
    const double d2 = d1 - sd;
    if (side == OptionSide::Call) return df * (fwd * norm_cdf(d1) - strike * norm_cdf(d2));
    return df * (strike * norm_cdf(-d2) - fwd * norm_cdf(-d1));
}

double bs_delta(double spot, double strike, double vol, double tau, double r, double q,
                OptionSide side, DeltaConvention convention) {
    require_positive(spot, "spot must be positive");
    require_positive(strike, "strike must be positive");
    require_positive(vol, "vol must be positive");
    require_positive(tau, "tau must be positive");
    const double sd = vol * std::sqrt(tau);
    const double d1 = std::log(forward_price(spot, tau, r, q) / strike) / sd + 0.5 * sd;
    const double scale = delta_scale(tau, q, convention);
    return side == OptionSide::Call ? scale * norm_cdf(d1) : -scale * norm_cdf(-d1);
}

double bs_vega(double spot, double strike, double vol, double tau, double r, double q) {
    const double sd = vol * std::sqrt(tau);
    if (!(sd > 0.0)) return 0.0;
    const double fwd = forward_price(spot, tau, r, q);
    const double d1 = std::log(fwd / strike) / sd + 0.5 * sd;
    return std::exp(-r * tau) * fwd * norm_pdf(d1) * std::sqrt(tau);
}

double implied_vol(double price, double spot, double strike, double tau, double r, double q,
                   OptionSide side) {
    require_positive(spot, "spot must be positive");
    require_positive(strike, "strike must be positive");
    require_positive(tau, "tau must be positive");
    if (!std::isfinite(price)) throw NoSolutionError("price is not finite");

    const double df = std::exp(-r * tau);
    const double fwd = forward_price(spot, tau, r, q);

    // Work with the out-of-the-money side: same vol, no cancellation against intrinsic.
    const OptionSide otm = strike >= fwd ? OptionSide::Call : OptionSide::Put;
    double target = price;
    if (otm != side) {
        const double parity = df * (fwd - strike);
        target = side == OptionSide::Call ? price - parity : price + parity;
    }
    const double upper = otm == OptionSide::Call ? df * fwd : df * strike;
    const double scale = df * std::max(fwd, strike);
    const double zero_tol = 1e-15 * scale;

    if (target < -zero_tol) throw NoSolutionError("price below the no-arbitrage lower bound");
    if (target >= upper) throw NoSolutionError("price at or above the no-arbitrage upper bound");
    if (target <= zero_tol) return 0.0;

    double lo = 0.0;
    double hi = kMaxVol;
    if (bs_price(spot, strike, hi, tau, r, q, otm) < target) {
        throw NoSolutionError("implied volatility above the search bracket");
    }
    // Brenner-Subrahmanyam starting point, clipped into the bracket.
    double vol = std::clamp(std::sqrt(2.0 * std::numbers::pi / tau) * target / (df * fwd), 1e-4, 1.0);
    for (int iter = 0; iter < 200; ++iter) {
        const double diff = bs_price(spot, strike, vol, tau, r, q, otm) - target;
        if (diff > 0.0) {
            hi = vol;
        } else {
            lo = vol;
        }
        if (std::abs(diff) <= 1e-15 * scale || hi - lo <= 1e-16) break;
        const double vega = bs_vega(spot, strike, vol, tau, r, q);
        double next = vega > 0.0 ? vol - diff / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        vol = next;
    }
    return vol;
}

double strike_from_delta(double delta_target, double spot, double vol, double tau, double r,
                         double q, OptionSide side, DeltaConvention convention) {
    require_positive(spot, "spot must be positive");
    require_positive(vol, "vol must be positive");
    require_positive(tau, "tau must be positive");
    const double scale = delta_scale(tau, q, convention);
    double d1 = 0.0;
    if (side == OptionSide::Call) {
        if (!(delta_target > 0.0 && delta_target < 1.0)) {
            throw NoSolutionError("call delta must lie in (0, 1)");
        }
        const double p = delta_target / scale;
        if (!(p < 1.0)) throw NoSolutionError("call delta not attainable under this convention");
        d1 = norm_inv(p);
    } else {
        if (!(delta_target < 0.0 && delta_target > -1.0)) {
            throw NoSolutionError("put delta must lie in (-1, 0)");
        }
        const double p = -delta_target / scale;
        if (!(p < 1.0)) throw NoSolutionError("put delta not attainable under this convention");
        d1 = -norm_inv(p);
    }
    const double sd = vol * std::sqrt(tau);
    return forward_price(spot, tau, r, q) * std::exp(-d1 * sd + 0.5 * sd * sd);
}

double atm_strike(double spot, double tau, double r, double q) {
    return forward_price(spot, tau, r, q);
}

SmileVols smile_vols(const SmileQuote& quote) {
    quote.validate();
    SmileVols v;
    v.atm = quote.atm_vol;
    v.call25 = quote.atm_vol + quote.bf25 + 0.5 * quote.rr25;
    v.put25 = quote.atm_vol + quote.bf25 - 0.5 * quote.rr25;
    return v;
}

SmileQuote quote_from_vols(double tenor, const SmileVols& vols) {
    SmileQuote q;
    q.tenor = tenor;
    q.atm_vol = vols.atm;
    q.rr25 = vols.call25 - vols.put25;
    q.bf25 = 0.5 * (vols.call25 + vols.put25) - vols.atm;
    q.validate();
    return q;
}

}  // namespace corrheston
