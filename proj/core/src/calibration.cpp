#include "corrheston/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace corrheston {
namespace {

constexpr double kThetaMin = 1e-6;
constexpr double kThetaMax = 4.0;
constexpr double kAlphaMin = 1e-4;
constexpr double kAlphaMax = 5.0;
constexpr double kRhoMargin = 1e-4;
constexpr int kMaxStrikePasses = 5;
constexpr double kStallRatio = 1e-3;  // relative cost decrease counted as no progress
constexpr int kMaxStalled = 3;

using Vec3 = Eigen::Vector3d;

struct Bounds {
    Vec3 lo;
    Vec3 hi;
};

Bounds parameter_bounds(double eta) {
    const double rho_max = (1.0 - eta) - kRhoMargin;
    return {Vec3(kThetaMin, kAlphaMin, -rho_max), Vec3(kThetaMax, kAlphaMax, rho_max)};
}

Vec3 project(const Vec3& x, const Bounds& b) { return x.cwiseMax(b.lo).cwiseMin(b.hi); }

struct Problem {
    SmileQuote quote;
    SmileVols target;
    double spot;
    double beta;
    double eta;
    double r;
    double q;
    CalibrationStrikes strikes;
    const CalibrationConfig* cfg;

    [[nodiscard]] ModelParams params_at(const Vec3& x) const {
        return symmetric_params(x[0], x[1], beta, x[2], eta, r, q);
    }

    [[nodiscard]] Vec3 residuals(const Vec3& x) const {
        const ModelParams p = params_at(x);
        const double tau = quote.tenor;
        const QuadratureConfig& qc = cfg->quadrature;
        return Vec3(model_implied_vol(p, spot, tau, strikes.put25, qc) - target.put25,
                    model_implied_vol(p, spot, tau, strikes.atm, qc) - target.atm,
                    model_implied_vol(p, spot, tau, strikes.call25, qc) - target.call25);
    }
};

CalibrationStrikes strikes_from_vols(const SmileQuote& quote, const SmileVols& vols, double spot,
                                     double r, double q, DeltaConvention conv) {
    const double tau = quote.tenor;
    CalibrationStrikes k;
    k.atm = atm_strike(spot, tau, r, q);
    k.call25 = strike_from_delta(0.25, spot, vols.call25, tau, r, q, OptionSide::Call, conv);
    k.put25 = strike_from_delta(-0.25, spot, vols.put25, tau, r, q, OptionSide::Put, conv);
    return k;
}

struct SolveOutcome {
    Vec3 x;
    Vec3 res;
    std::size_t iterations;
};

// Levenberg-Marquardt on the square 3x3 system with a forward-difference Jacobian.
SolveOutcome solve(const Problem& prob, Vec3 x, const Bounds& bounds) {
    const CalibrationConfig& cfg = *prob.cfg;
    x = project(x, bounds);
    Vec3 res = prob.residuals(x);
    double cost = res.squaredNorm();
    double lambda = 1e-3;
    int stalled = 0;
    std::size_t iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        if (res.cwiseAbs().maxCoeff() <= cfg.solver_tolerance) break;

        Eigen::Matrix3d jac;
        for (int j = 0; j < 3; ++j) {
            Vec3 xh = x;
            double h = cfg.fd_step * std::max(std::abs(x[j]), 1e-2);
            if (xh[j] + h > bounds.hi[j]) h = -h;
            xh[j] += h;
            jac.col(j) = (prob.residuals(xh) - res) / h;
        }
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Vec3 grad = jac.transpose() * res;

        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Eigen::Matrix3d lhs = jtj;
            lhs.diagonal() += lambda * jtj.diagonal();
            const Vec3 step = lhs.ldlt().solve(-grad);
            const Vec3 trial = project(x + step, bounds);
            Vec3 trial_res;
            try {
                trial_res = prob.residuals(trial);
            } catch (const Error&) {
                lambda *= 10.0;
                continue;
            }
            const double trial_cost = trial_res.squaredNorm();
            if (trial_cost < cost) {
                stalled = trial_cost > (1.0 - kStallRatio) * cost ? stalled + 1 : 0;
                x = trial;
                res = trial_res;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
            } else {
                lambda *= 10.0;
            }
        }
        // Stuck against a bound or in a flat valley: stop rather than creep.
        if (!accepted || stalled >= kMaxStalled) break;
    }
    return {x, res, iter};
}

CalibrationResult make_result(const Problem& prob, const SolveOutcome& out, const Bounds& bounds,
                              std::size_t iterations) {
    CalibrationResult result;
    result.params = prob.params_at(out.x);
    result.residuals = {out.res[0], out.res[1], out.res[2]};
    result.iterations = iterations;
    result.feller_ratio = feller_ratio(result.params);
    result.strikes = prob.strikes;
    result.rho_at_boundary = out.x[2] <= bounds.lo[2] + 1e-12 || out.x[2] >= bounds.hi[2] - 1e-12;
    return result;
}

}  // namespace

double CalibrationResult::max_residual() const {
    return std::max({std::abs(residuals[0]), std::abs(residuals[1]), std::abs(residuals[2])});
}

CalibrationGuess initial_guess(const SmileQuote& quote, double beta, double eta) {
    quote.validate();
    CalibrationGuess g;
    g.theta = quote.atm_vol * quote.atm_vol;
    g.alpha = std::clamp(8.0 * quote.bf25 * std::sqrt(beta) / std::sqrt(quote.tenor), 0.05, 2.0);
    const double rho_max = (1.0 - eta) - kRhoMargin;
    g.rho_bar = std::clamp(25.0 * quote.rr25, -rho_max, rho_max);
    return g;
}

CalibrationResult calibrate(const SmileQuote& quote, double spot, double beta, double eta,
                            double r, double q, std::optional<CalibrationGuess> init,
                            const CalibrationConfig& cfg) {
    quote.validate();
    cfg.quadrature.validate();
    if (!(spot > 0.0)) throw ValidationError("spot must be positive");
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    if (!(eta >= 0.0) || !(eta < 1.0 - kRhoMargin)) {
        throw ValidationError("eta must lie in [0, 1) with room for rho_bar");
    }

    Problem prob{quote, smile_vols(quote), spot, beta, eta, r, q, {}, &cfg};
    prob.strikes = strikes_from_vols(quote, prob.target, spot, r, q, cfg.convention);
    const Bounds bounds = parameter_bounds(eta);

    const CalibrationGuess g = init.value_or(initial_guess(quote, beta, eta));
    Vec3 x(g.theta, g.alpha, g.rho_bar);

    SolveOutcome out{};
    std::size_t total_iterations = 0;
    for (int pass = 0; pass < kMaxStrikePasses; ++pass) {
        out = solve(prob, x, bounds);
        total_iterations += out.iterations;
        x = out.x;
        // Moving the strikes cannot rescue a pass that did not converge.
        if (!(out.res.cwiseAbs().maxCoeff() <= cfg.acceptance)) break;

        // Re-place the wing strikes using the model's own vols at the current
        // strikes; at a solution these coincide with the quoted vols.
        const ModelParams p = prob.params_at(x);
        SmileVols model_vols;
        model_vols.atm = prob.target.atm;
        model_vols.call25 = model_implied_vol(p, spot, quote.tenor, prob.strikes.call25, cfg.quadrature);
        model_vols.put25 = model_implied_vol(p, spot, quote.tenor, prob.strikes.put25, cfg.quadrature);
        const CalibrationStrikes next =
            strikes_from_vols(quote, model_vols, spot, r, q, cfg.convention);
        const double moved = std::max(std::abs(next.call25 / prob.strikes.call25 - 1.0),
                                      std::abs(next.put25 / prob.strikes.put25 - 1.0));
        if (moved <= 1e-12) break;
        prob.strikes = next;
    }

    CalibrationResult result = make_result(prob, out, bounds, total_iterations);
    if (!(result.max_residual() <= cfg.acceptance)) {
        throw CalibrationError("calibration did not reach the residual tolerance", result);
    }
    return result;
}

}  // namespace corrheston
