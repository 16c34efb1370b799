#include "heston_oracle.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {
namespace {

using cd = std::complex<double>;

// E[exp(i u ln S_T)] under the measure selected by j (1: share, 2: money market),
// following the textbook P_j parameterisation.
cd f_j(int j, double u, double x, double tau, const HestonParams& p) {
    const cd i(0.0, 1.0);
    const double uj = j == 1 ? 0.5 : -0.5;
    const double bj = j == 1 ? p.kappa - p.rho * p.sigma : p.kappa;
    const double a = p.kappa * p.theta;
    const double s2 = p.sigma * p.sigma;
    const cd rsu = p.rho * p.sigma * u * i;
    const cd d = std::sqrt((rsu - bj) * (rsu - bj) - s2 * (2.0 * uj * u * i - u * u));
    const cd gm = bj - rsu - d;
    const cd gp = bj - rsu + d;
    const cd c = gm / gp;
    const cd e = std::exp(-d * tau);
    const cd D = gm / s2 * (1.0 - e) / (1.0 - c * e);
    const cd C = (p.r - p.q) * u * i * tau +
                 a / s2 * (gm * tau - 2.0 * std::log((1.0 - c * e) / (1.0 - c)));
    return std::exp(C + D * p.v0 + i * u * x);
}

double prob(int j, double spot, double strike, double tau, const HestonParams& p) {
    const double x = std::log(spot);
    const double lk = std::log(strike);
    auto integrand = [&](double u) {
        if (u == 0.0) u = 1e-12;
        const cd v = std::exp(cd(0.0, -u * lk)) * f_j(j, u, x, tau, p) / cd(0.0, u);
        return v.real();
    };
    // Panels of width 10 until the integrand and the panel contribution are negligible;
    // the integrand decays like exp(-c u) for any v0 > 0.
    using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
    double tail = 0.0;
    for (double lo = 0.0; lo < 1e5; lo += 10.0) {
        const double piece = gk::integrate(integrand, lo, lo + 10.0, 8, 1e-12);
        tail += piece;
        if (lo > 0.0 && std::abs(piece) < 1e-17 && std::abs(integrand(lo + 10.0)) < 1e-17) break;
    }
    return 0.5 + tail / std::numbers::pi;
}

}  // namespace

double heston_call(double spot, double strike, double tau, const HestonParams& p) {
    const double p1 = prob(1, spot, strike, tau, p);
    const double p2 = prob(2, spot, strike, tau, p);
    return spot * std::exp(-p.q * tau) * p1 - strike * std::exp(-p.r * tau) * p2;
}

double heston_put(double spot, double strike, double tau, const HestonParams& p) {
    const double p1 = prob(1, spot, strike, tau, p);
    const double p2 = prob(2, spot, strike, tau, p);
    return strike * std::exp(-p.r * tau) * (1.0 - p2) - spot * std::exp(-p.q * tau) * (1.0 - p1);
}

}  // namespace oracle
