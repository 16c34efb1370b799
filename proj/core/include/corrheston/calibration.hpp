#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "corrheston/black_scholes.hpp"
#include "corrheston/errors.hpp"
#include "corrheston/fourier.hpp"
#include "corrheston/model.hpp"

namespace corrheston {

/// Calibrated quantities: theta (= v0), alpha, rho_bar (= rho_a = rho_0).
struct CalibrationGuess {
    double theta = 0.0;
    double alpha = 0.0;
    double rho_bar = 0.0;
};

struct CalibrationConfig {
    DeltaConvention convention = DeltaConvention::Spot;
    /// Solver stops once the max-norm vol residual is below this.
    double solver_tolerance = 1e-9;
    /// Residual max-norm that counts as success.
    double acceptance = 1e-6;
    std::size_t max_iterations = 60;
    /// Relative finite-difference step of the Jacobian.
    double fd_step = 1e-5;
    QuadratureConfig quadrature{};
};

/// Strikes the calibration matches vols at.
struct CalibrationStrikes {
    double put25 = 0.0;
    double atm = 0.0;
    double call25 = 0.0;
};

struct CalibrationResult {
    ModelParams params{};
    /// Model minus market vol at (25-delta put, ATM, 25-delta call).
    std::array<double, 3> residuals{};
    std::size_t iterations = 0;
    /// alpha^2 / (2 beta theta)
    double feller_ratio = 0.0;
    CalibrationStrikes strikes{};
    /// rho_bar ended on its projection bound.
    bool rho_at_boundary = false;

    [[nodiscard]] double max_residual() const;
};

/// Calibration did not reach the acceptance threshold; carries the best point found.
class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, CalibrationResult best)
        : Error(what), best_(best) {}
    [[nodiscard]] const CalibrationResult& best() const noexcept { return best_; }

private:
    CalibrationResult best_;
};

/// Heuristic starting point: theta = atm^2,
/// alpha = 8 bf25 sqrt(beta) / sqrt(tenor) capped to [0.05, 2],
/// rho_bar = 25 rr25 capped inside the admissible range.
[[nodiscard]] CalibrationGuess initial_guess(const SmileQuote& quote, double beta, double eta);

/// Fits (theta, alpha, rho_bar) to one tenor's ATM / RR25 / BF25 with beta and
/// eta fixed, using Levenberg-Marquardt on the three vol residuals.
///
/// Strikes come from the quote's own vols under market delta conventions and
/// stay fixed inside the solver; an outer pass recomputes them from the model
/// smile and re-solves until they stop moving.
[[nodiscard]] CalibrationResult calibrate(const SmileQuote& quote, double spot, double beta,
                                          double eta, double r, double q,
                                          std::optional<CalibrationGuess> init = std::nullopt,
                                          const CalibrationConfig& cfg = {});

}  // namespace corrheston
