#pragma once

// Risk reversal beta: the slope of daily risk reversal changes regressed on
// daily spot log returns, measured empirically or implied by the model.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <vector>

#include "corrheston/black_scholes.hpp"
#include "corrheston/calibration.hpp"
#include "corrheston/fourier.hpp"
#include "corrheston/model.hpp"
#include "corrheston/montecarlo.hpp"

namespace corrheston {

/// Daily closes of spot and one tenor's 25-delta risk reversal (vol units).
struct MarketSeries {
    std::vector<std::chrono::year_month_day> dates;
    std::vector<double> spot;
    std::vector<double> rr;
    /// Rows skipped while reading because a field was missing or unparseable.
    std::size_t dropped_rows = 0;

    void validate() const;
};

/// Reads CSV with header `date,spot,rr`: ISO dates, risk reversals in vol
/// points (0.85 means 0.85%). Incomplete rows are dropped and counted.
[[nodiscard]] MarketSeries read_market_series(std::istream& in);
[[nodiscard]] MarketSeries read_market_series(const std::filesystem::path& path);

struct RrBetaEstimate {
    double beta_rr = 0.0;
    double r_squared = 0.0;
    /// sqrt(r_squared) with the sign of the slope.
    double corr = 0.0;
    double intercept = 0.0;
    double beta_std_error = 0.0;
    std::size_t n = 0;
};

/// OLS of y on x with intercept. Needs at least 30 points and a non-constant x.
[[nodiscard]] RrBetaEstimate ols_fit(std::span<const double> x, std::span<const double> y);

/// Regression of daily risk reversal changes on daily spot log returns.
[[nodiscard]] RrBetaEstimate estimate_rr_beta(const MarketSeries& series);

/// dRR / d rho_0 at tenor tau by central difference, re-splitting the initial
/// variance to move rho_0. The bump is halved until rho_0 +- bump stays inside
/// (rho_bar - eta, rho_bar + eta).
[[nodiscard]] double model_k_tau(const ModelParams& params, double spot, double tau,
                                 double bump = 0.01,
                                 DeltaConvention convention = DeltaConvention::Spot,
                                 const QuadratureConfig& quad = {});

/// Calibrates (beta, eta) to the quote, then measures k at tau.
[[nodiscard]] double model_k_tau(const SmileQuote& quote, double spot, double beta, double eta,
                                 double r, double q, double tau, double bump = 0.01,
                                 const CalibrationConfig& calib = {});

/// beta_rr = k alpha eta^2 / theta.
[[nodiscard]] double model_rr_beta(double k_tau, double alpha, double eta, double theta);

/// Inverse of model_rr_beta in eta.
[[nodiscard]] double estimate_eta(double beta_rr, double k_tau, double alpha, double theta);

/// Simulates the model for horizon_days daily steps, reprices the model
/// 25-delta risk reversal at a constant tenor tau in every simulated state and
/// regresses its daily changes on the simulated log returns (pooled).
[[nodiscard]] RrBetaEstimate mc_rr_beta(const ModelParams& params, double spot, double tau,
                                        std::size_t horizon_days, const McConfig& cfg,
                                        DeltaConvention convention = DeltaConvention::Spot);

}  // namespace corrheston
