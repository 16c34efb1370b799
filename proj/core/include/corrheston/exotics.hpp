#pragma once

// Monte Carlo prices of one touches, out-of-the-money knockouts and
// volatility swaps, and their differences to the eta = 0 (Heston) model.
//
// Barrier products are monitored continuously: each step multiplies the
// path's survival probability by 1 - p, where p is the log-space Brownian
// bridge crossing probability with the step's trapezoid variance. One touches
// pay 1 at expiry and use the European digital struck at the barrier as a
// control variate; knockouts use their underlying vanilla. Control-variate
// coefficients are regression estimates from the same run.

#include <cstddef>
#include <span>
#include <vector>

#include "corrheston/black_scholes.hpp"
#include "corrheston/calibration.hpp"
#include "corrheston/fourier.hpp"
#include "corrheston/model.hpp"
#include "corrheston/montecarlo.hpp"

namespace corrheston {

enum class BarrierKind { OneTouch, DownAndOutCall, UpAndOutPut };

struct BarrierProduct {
    BarrierKind kind = BarrierKind::OneTouch;
    double barrier = 1.0;
    /// Ignored for one touches.
    double strike = 1.0;
    double expiry = 0.25;

    void validate() const;
};

struct VolSwapSpec {
    double expiry = 0.25;
    double fixings_per_year = 250.0;
    /// Number of returns N; 0 means round(fixings_per_year * expiry).
    std::size_t num_returns = 0;

    [[nodiscard]] std::size_t returns() const;
    void validate() const;
};

struct McPrice {
    double value = 0.0;
    double std_error = 0.0;
    double cv_beta = 0.0;
    /// Standard error of the same estimate without the control variate.
    double plain_std_error = 0.0;
};

/// Several barrier products sharing an expiry, priced under several models on
/// common random numbers.
class BarrierBatch {
public:
    /// prices()[product][model]
    [[nodiscard]] const std::vector<std::vector<McPrice>>& prices() const noexcept {
        return prices_;
    }

    /// price(model_a) - price(model_b) for one product, with the standard
    /// error of the difference under common random numbers.
    [[nodiscard]] McPrice difference(std::size_t product, std::size_t model_a,
                                     std::size_t model_b) const;

    [[nodiscard]] const SimulationInfo& info() const noexcept { return info_; }

private:
    friend BarrierBatch price_barrier_batch(std::span<const BarrierProduct>, double,
                                            std::span<const ModelParams>, const McConfig&,
                                            const QuadratureConfig&);

    std::size_t models_ = 0;
    std::vector<std::vector<McPrice>> prices_;
    std::vector<MomentAccumulator> moments_;    // per product, (Y_m, X_m) pairs
    std::vector<std::vector<double>> control_;  // per product, exact E[X_m]
    std::vector<bool> exact_;                   // product settled at time zero
    SimulationInfo info_{};
};

[[nodiscard]] BarrierBatch price_barrier_batch(std::span<const BarrierProduct> products,
                                               double spot, std::span<const ModelParams> models,
                                               const McConfig& cfg,
                                               const QuadratureConfig& quad = {});

[[nodiscard]] McPrice price_one_touch(const BarrierProduct& product, double spot,
                                      const ModelParams& params, const McConfig& cfg,
                                      const QuadratureConfig& quad = {});

[[nodiscard]] McPrice price_knockout(const BarrierProduct& product, double spot,
                                     const ModelParams& params, const McConfig& cfg,
                                     const QuadratureConfig& quad = {});

/// Fair volatility swap strikes and realised-variance estimates per model,
/// evolved on common random numbers with one time step per fixing.
struct VolSwapBatch {
    std::vector<McPrice> fair_strike;
    /// E[N_d / N * sum R_i^2], the discretely sampled variance swap strike.
    std::vector<McPrice> variance_strike;
    MomentAccumulator moments;  // sigma_r per model
    SimulationInfo info{};

    [[nodiscard]] McPrice difference(std::size_t model_a, std::size_t model_b) const;
};

[[nodiscard]] VolSwapBatch price_vol_swap_batch(const VolSwapSpec& spec, double spot,
                                                std::span<const ModelParams> models,
                                                const McConfig& cfg);

/// Fair strike E[sigma_r] with sigma_r = sqrt(N_d / N * sum ln(S_i / S_{i-1})^2).
[[nodiscard]] McPrice price_vol_swap_strike(const VolSwapSpec& spec, double spot,
                                            const ModelParams& params, const McConfig& cfg);

struct HestonDifference {
    CalibrationResult model;
    CalibrationResult heston;
    McPrice model_price;
    McPrice heston_price;
    /// model_price - heston_price with its common-random-number standard error.
    McPrice difference;
};

/// Calibrates eta and eta = 0 to the same quote and prices the product under
/// both on common random numbers.
[[nodiscard]] HestonDifference heston_difference(const BarrierProduct& product,
                                                 const SmileQuote& quote, double spot,
                                                 double beta, double eta, double r, double q,
                                                 const McConfig& cfg,
                                                 const CalibrationConfig& calib = {});

[[nodiscard]] HestonDifference heston_difference(const VolSwapSpec& spec,
                                                 const SmileQuote& quote, double spot,
                                                 double beta, double eta, double r, double q,
                                                 const McConfig& cfg,
                                                 const CalibrationConfig& calib = {});

/// Black-Scholes one touch paying 1 at expiry if the barrier trades before
/// expiry, discounted at r.
[[nodiscard]] double bs_one_touch_price(double spot, double barrier, double vol, double tau,
                                        double r, double q);

/// Barrier on the given side of spot (Call = above, Put = below) whose
/// Black-Scholes one touch price equals target. Bisection in log barrier.
[[nodiscard]] double bs_one_touch_barrier(double target, double spot, double vol, double tau,
                                          double r, double q, OptionSide side);

}  // namespace corrheston
