#pragma once

// Parameter sets of the two-factor stochastic-correlation Heston model and the
// instantaneous correlation formulas derived from them.
//
// State: ln S, and two CIR sub-variances v+ and v- sharing mean reversion beta
// and vol-of-vol alpha. v+ correlates with spot at rho_bar + eta, v- at
// rho_bar - eta, so the effective spot/vol correlation moves inside
// [rho_bar - eta, rho_bar + eta] as the variance mix changes.

namespace corrheston {

/// Correlation range checks absorb floating-point drift of this size.
inline constexpr double kCorrelationTolerance = 1e-12;

/// Total variance below this is treated as zero when forming ratios.
inline constexpr double kMinTotalVariance = 1e-12;

/// Raw SDE parameters.
struct ModelParams {
    double beta = 2.0;          // mean reversion rate, 1/years
    double alpha = 0.3;         // vol of vol
    double theta_plus = 0.005;  // long-run level of v+
    double theta_minus = 0.005; // long-run level of v-
    double rho_bar = 0.0;       // center of the correlation range
    double eta = 0.0;           // half-width of the correlation range
    double v0_plus = 0.005;
    double v0_minus = 0.005;
    double r = 0.0;             // domestic rate
    double q = 0.0;             // foreign rate / dividend yield

    [[nodiscard]] double theta() const noexcept { return theta_plus + theta_minus; }
    [[nodiscard]] double v0() const noexcept { return v0_plus + v0_minus; }
    [[nodiscard]] double rho_plus() const noexcept { return rho_bar + eta; }
    [[nodiscard]] double rho_minus() const noexcept { return rho_bar - eta; }

    /// Throws ValidationError when an invariant is violated. eta = 0 is valid.
    void validate() const;
};

/// Parameterization in terms of total levels and correlations.
struct NaturalParams {
    double theta = 0.01;  // theta_plus + theta_minus
    double rho_a = 0.0;   // long-run correlation
    double rho_0 = 0.0;   // initial correlation
    double v0 = 0.01;     // v0_plus + v0_minus
    double beta = 2.0;
    double alpha = 0.3;
    double eta = 0.0;
    double r = 0.0;
    double q = 0.0;
};

/// Splits total levels into sub-variances so that the long-run and initial
/// correlations equal rho_a and rho_0.
///
/// Throws RangeError if a correlation lies outside [rho_bar - eta, rho_bar + eta]
/// and ValidationError if eta = 0 with rho_a or rho_0 different from rho_bar.
/// With eta = 0 the split is unidentified and is taken to be equal.
[[nodiscard]] ModelParams to_raw(const NaturalParams& natural, double rho_bar);

/// Inverse of to_raw. Requires theta > 0 and v0 > 0.
[[nodiscard]] NaturalParams to_natural(const ModelParams& params);

/// Convenience for single-tenor calibration: rho_a = rho_0 = rho_bar and
/// v0 = theta, giving theta_plus = theta_minus = v0_plus = v0_minus = theta / 2.
[[nodiscard]] ModelParams symmetric_params(double theta, double alpha, double beta,
                                           double rho_bar, double eta, double r = 0.0,
                                           double q = 0.0);

/// Instantaneous spot/vol correlation rho_bar + eta (v+ - v-) / (v+ + v-).
/// Throws DomainError when v+ + v- is below kMinTotalVariance.
[[nodiscard]] double rho_t(double v_plus, double v_minus, double rho_bar, double eta);

/// Correlation between moves in ln S and moves in rho_t:
/// sqrt(eta^2 - (rho_bar - rho_t)^2). Throws RangeError outside the range.
[[nodiscard]] double rho_cs(double rho_t, double rho_bar, double eta);

struct RhoSdeCoefficients {
    double drift;      // 1/years
    double diffusion;  // 1/sqrt(years)
};

/// Drift and diffusion of d rho_t at total variance v:
///   drift     = beta (theta / v) (rho_a - rho_t)
///   diffusion = (alpha / sqrt(v)) sqrt(eta^2 - (rho_t - rho_bar)^2)
/// rho_a and theta are taken from params. Throws DomainError for v <= 0.
[[nodiscard]] RhoSdeCoefficients rho_sde_coefficients(double v, double rho_t,
                                                      const ModelParams& params);

/// Long-run correlation rho_bar + eta (theta+ - theta-) / theta.
[[nodiscard]] double long_run_correlation(const ModelParams& params);

/// Initial correlation rho_bar + eta (v0+ - v0-) / v0.
[[nodiscard]] double initial_correlation(const ModelParams& params);

/// Returns a copy with the initial correlation moved to rho_0, keeping v0 and
/// all long-run quantities fixed.
[[nodiscard]] ModelParams with_initial_correlation(const ModelParams& params, double rho_0);

/// Feller ratio alpha^2 / (2 beta theta) of the total variance.
[[nodiscard]] double feller_ratio(const ModelParams& params);

}  // namespace corrheston
