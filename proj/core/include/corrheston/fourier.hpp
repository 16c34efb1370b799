#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "corrheston/black_scholes.hpp"
#include "corrheston/charfn.hpp"
#include "corrheston/model.hpp"

namespace corrheston {

/// Settings of the damped Fourier inversion.
///
/// The out-of-the-money option is always integrated directly: calls with
/// damping `damping`, puts with damping -(1 + damping). The in-the-money side
/// follows from put-call parity, so deep wings never cancel against intrinsic.
struct QuadratureConfig {
    double damping = 0.75;
    /// Upper integration limit. Unset: chosen where the integrand modulus
    /// drops below 1e-14 per unit spot.
    std::optional<double> truncation;
    /// Initial node count (composite 16-point Gauss-Legendre).
    std::size_t nodes = 512;
    /// Node doubling stops once successive estimates agree to this (per unit spot).
    double refine_tolerance = 1e-13;
    /// Accuracy contract: if doubling up to max_nodes still changes the price by
    /// more than this (per unit spot) the pricer throws AccuracyError.
    double tolerance = 1e-8;
    std::size_t max_nodes = 1u << 15;

    void validate() const;
};

/// European vanilla price under the model.
[[nodiscard]] double price_vanilla(const VanillaOption& option, double spot,
                                   const ModelParams& params, const QuadratureConfig& cfg = {});

/// Price of a call (damping > 0) or put (damping < -1) by a single damped
/// inversion with the given damping. Exposed so parity can be checked between
/// two independent integrations.
[[nodiscard]] double price_with_damping(double strike, double expiry, double spot,
                                        const ModelParams& params, double damping,
                                        const QuadratureConfig& cfg = {});

/// Risk-neutral probability that S_T ends above (Call) or below (Put) strike.
[[nodiscard]] double exercise_probability(double strike, double expiry, double spot,
                                          const ModelParams& params, OptionSide side,
                                          const QuadratureConfig& cfg = {});

/// Cash-or-nothing digital paying 1 at expiry; e^{-rT} times exercise_probability.
[[nodiscard]] double price_digital(double strike, double expiry, double spot,
                                   const ModelParams& params, OptionSide side,
                                   const QuadratureConfig& cfg = {});

/// Model implied vols at the given strikes (positive, sorted ascending).
[[nodiscard]] std::vector<double> smile_from_model(const ModelParams& params, double spot,
                                                   double tau, std::span<const double> strikes,
                                                   const QuadratureConfig& cfg = {});

/// Model implied vol at one strike, computed from the out-of-the-money option.
[[nodiscard]] double model_implied_vol(const ModelParams& params, double spot, double tau,
                                       double strike, const QuadratureConfig& cfg = {});

/// A strike together with the model implied vol at that strike.
struct StrikeVol {
    double strike = 0.0;
    double vol = 0.0;
};

/// Strike whose Black-Scholes delta, evaluated with the model implied vol at
/// that same strike, equals delta_target. Solved by fixed-point iteration.
[[nodiscard]] StrikeVol model_delta_strike(const ModelParams& params, double spot, double tau,
                                           double delta_target, OptionSide side,
                                           DeltaConvention convention = DeltaConvention::Spot,
                                           const QuadratureConfig& cfg = {});

/// Model ATM vol, 25-delta risk reversal and butterfly at tenor tau.
[[nodiscard]] SmileQuote model_smile_quote(const ModelParams& params, double spot, double tau,
                                           DeltaConvention convention = DeltaConvention::Spot,
                                           const QuadratureConfig& cfg = {});

/// Fourier pricer with the Riccati solution cached on a fixed node set.
///
/// Everything except the initial sub-variances is frozen at construction, so
/// repricing at a new (v+, v-) state costs one complex exponential per node.
/// Used where many states share a tenor (simulated risk reversals).
class PreparedFourierPricer {
public:
    PreparedFourierPricer(const ModelParams& params, double tau, std::size_t nodes,
                          double truncation, double damping = 0.75);

    /// Price per unit spot of the out-of-the-money option at ln(K / S) =
    /// log_moneyness, converted to `side` by parity.
    [[nodiscard]] double price(double log_moneyness, double v_plus, double v_minus,
                               OptionSide side) const;

    /// Black-Scholes implied vol at ln(K / S) = log_moneyness.
    [[nodiscard]] double implied_vol(double log_moneyness, double v_plus, double v_minus) const;

    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }

private:
    struct Node {
        double u;
        double weight;
        RiccatiSolution call;  // at u - (damping + 1) i
        RiccatiSolution put;   // at u + damping i
        Complex call_denominator;
        Complex put_denominator;
    };

    ModelParams params_;
    double tau_;
    double damping_;
    std::vector<Node> nodes_;
};

/// Node count and truncation that price_vanilla settles on for this strike;
/// useful for sizing a PreparedFourierPricer.
struct QuadraturePlan {
    std::size_t nodes = 0;
    double truncation = 0.0;
};

[[nodiscard]] QuadraturePlan plan_quadrature(double strike, double expiry, double spot,
                                             const ModelParams& params,
                                             const QuadratureConfig& cfg = {});

}  // namespace corrheston
