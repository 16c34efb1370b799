#include "corrheston/charfn.hpp"

#include <cmath>

#include "corrheston/errors.hpp"

namespace corrheston {
namespace {

constexpr Complex kI{0.0, 1.0};

struct FactorTerms {
    Complex b_coef;      // B(tau)
    Complex integral;    // integral of B over [0, tau]
};

// Solves B' = alpha^2 B^2 / 2 - b B - (xi^2 + i xi) / 2, B(0) = 0, together
// with its time integral, for one sub-variance factor.
FactorTerms solve_factor(Complex b, Complex d, Complex g, double alpha2, double tau) {
    const Complex e = std::exp(-d * tau);
    const Complex one_minus_ge = 1.0 - g * e;
    FactorTerms t;
    t.b_coef = (b - d) / alpha2 * (1.0 - e) / one_minus_ge;
    t.integral = ((b - d) * tau - 2.0 * std::log(one_minus_ge / (1.0 - g))) / alpha2;
    return t;
}

}  // namespace

CfIntermediates cf_intermediates(Complex xi, const ModelParams& params) {
    CfIntermediates c;
    const double alpha = params.alpha;
    const Complex quad = alpha * alpha * (xi * xi + kI * xi);
    const std::array<double, 2> rho{params.rho_plus(), params.rho_minus()};
    for (std::size_t j = 0; j < 2; ++j) {
        const Complex b = params.beta - kI * xi * alpha * rho[j];
        Complex d = std::sqrt(b * b + quad);
        if (d.real() < 0.0) d = -d;
        c.b[j] = b;
        c.d[j] = d;
        c.g[j] = (b - d) / (b + d);
    }
    return c;
}

RiccatiSolution riccati_closed_form(Complex xi, double tau, const ModelParams& params) {
    if (!(tau >= 0.0)) throw ValidationError("tau must be non-negative");
    if (!(params.alpha > 0.0)) {
        throw ValidationError("closed-form Riccati solution requires alpha > 0");
    }
    RiccatiSolution s;
    if (tau == 0.0 || xi == Complex{}) return s;

    const double alpha2 = params.alpha * params.alpha;
    const CfIntermediates c = cf_intermediates(xi, params);
    const FactorTerms plus = solve_factor(c.b[0], c.d[0], c.g[0], alpha2, tau);
    const FactorTerms minus = solve_factor(c.b[1], c.d[1], c.g[1], alpha2, tau);

    s.b_plus = plus.b_coef;
    s.b_minus = minus.b_coef;
    s.a = kI * xi * (params.r - params.q) * tau +
          params.beta * (params.theta_plus * plus.integral + params.theta_minus * minus.integral);
    return s;
}

Complex log_return_char_fn(Complex xi, double tau, const ModelParams& params) {
    return evaluate_char_fn(riccati_closed_form(xi, tau, params), params.v0_plus,
                            params.v0_minus);
}

Complex char_fn(Complex xi, double tau, double spot, const ModelParams& params) {
    if (!(spot > 0.0)) throw ValidationError("spot must be positive");
    const RiccatiSolution s = riccati_closed_form(xi, tau, params);
    return std::exp(s.a + s.b_plus * params.v0_plus + s.b_minus * params.v0_minus +
                    kI * xi * std::log(spot));
}

}  // namespace corrheston
