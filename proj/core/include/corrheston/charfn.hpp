#pragma once

#include <array>
#include <complex>

#include "corrheston/model.hpp"

namespace corrheston {

using Complex = std::complex<double>;

/// Exponent coefficients of the affine characteristic function
///   Phi = exp(A + B+ v+ + B- v- + i xi ln S).
struct RiccatiSolution {
    Complex a{};
    Complex b_plus{};
    Complex b_minus{};
};

/// Per-factor constants; index 0 is the + factor (rho_bar + eta), 1 the - factor.
///   b = beta - i xi alpha rho,  d = sqrt(b^2 + alpha^2 (xi^2 + i xi)),  g = (b - d) / (b + d)
/// d is taken on the branch with Re(d) >= 0.
struct CfIntermediates {
    std::array<Complex, 2> b{};
    std::array<Complex, 2> d{};
    std::array<Complex, 2> g{};
};

[[nodiscard]] CfIntermediates cf_intermediates(Complex xi, const ModelParams& params);

/// Closed-form A, B+, B- at Fourier argument xi and time to expiry tau.
///
/// Uses the exp(-d tau) formulation, which keeps the logarithm in A on its
/// principal branch for Re(d) >= 0. Throws ValidationError for tau < 0 or
/// alpha = 0 (the closed form divides by alpha^2; price that case with
/// Black-Scholes instead).
[[nodiscard]] RiccatiSolution riccati_closed_form(Complex xi, double tau, const ModelParams& params);

/// E[exp(i xi ln S_T)] given spot and the initial sub-variances in params.
[[nodiscard]] Complex char_fn(Complex xi, double tau, double spot, const ModelParams& params);

/// Characteristic function of ln(S_T / S_0); char_fn with spot = 1.
[[nodiscard]] Complex log_return_char_fn(Complex xi, double tau, const ModelParams& params);

/// exp(A + B+ v+ + B- v-) for an arbitrary sub-variance state, reusing a
/// precomputed Riccati solution.
[[nodiscard]] inline Complex evaluate_char_fn(const RiccatiSolution& s, double v_plus,
                                              double v_minus) {
    return std::exp(s.a + s.b_plus * v_plus + s.b_minus * v_minus);
}

}  // namespace corrheston
