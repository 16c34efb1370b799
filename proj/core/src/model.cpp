#include "corrheston/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "corrheston/errors.hpp"

namespace corrheston {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
}

// Weight (x - rho_bar) / eta of a correlation inside the admissible range,
// clamped to [-1, 1] after the tolerance check.
double split_weight(double rho, double rho_bar, double eta, const char* name) {
    const double offset = rho - rho_bar;
    if (eta == 0.0) {
        if (std::abs(offset) > kCorrelationTolerance) {
            std::ostringstream os;
            os << name << " = " << rho << " differs from rho_bar = " << rho_bar
               << " although eta = 0";
            throw ValidationError(os.str());
        }
        return 0.0;
    }
    if (std::abs(offset) > eta + kCorrelationTolerance) {
        std::ostringstream os;
        os << name << " = " << rho << " outside [" << rho_bar - eta << ", " << rho_bar + eta
           << "]";
        throw RangeError(os.str());
    }
    return std::clamp(offset / eta, -1.0, 1.0);
}

}  // namespace

void ModelParams::validate() const {
    require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be non-negative");
    require(theta_plus >= 0.0 && theta_minus >= 0.0, "theta_plus, theta_minus must be non-negative");
    require(v0_plus >= 0.0 && v0_minus >= 0.0, "v0_plus, v0_minus must be non-negative");
    require(std::isfinite(eta) && eta >= 0.0, "eta must be non-negative");
    require(std::isfinite(rho_bar), "rho_bar must be finite");
    require(rho_bar - eta > -1.0 && rho_bar + eta < 1.0,
            "correlations rho_bar +/- eta must lie in (-1, 1)");
    require(std::isfinite(r) && std::isfinite(q), "rates must be finite");
}

ModelParams to_raw(const NaturalParams& natural, double rho_bar) {
    require(natural.theta > 0.0, "theta must be positive");
    require(natural.v0 > 0.0, "v0 must be positive");

    const double w_long = split_weight(natural.rho_a, rho_bar, natural.eta, "rho_a");
    const double w_init = split_weight(natural.rho_0, rho_bar, natural.eta, "rho_0");

    ModelParams p;
    p.beta = natural.beta;
    p.alpha = natural.alpha;
    p.rho_bar = rho_bar;
    p.eta = natural.eta;
    p.r = natural.r;
    p.q = natural.q;
    p.theta_plus = 0.5 * natural.theta * (1.0 + w_long);
    p.theta_minus = 0.5 * natural.theta * (1.0 - w_long);
    p.v0_plus = 0.5 * natural.v0 * (1.0 + w_init);
    p.v0_minus = 0.5 * natural.v0 * (1.0 - w_init);
    p.validate();
    return p;
}

NaturalParams to_natural(const ModelParams& params) {
    params.validate();
    require(params.theta() > 0.0, "theta must be positive");
    require(params.v0() > 0.0, "v0 must be positive");
    NaturalParams n;
    n.theta = params.theta();
    n.v0 = params.v0();
    n.rho_a = long_run_correlation(params);
    n.rho_0 = initial_correlation(params);
    n.beta = params.beta;
    n.alpha = params.alpha;
    n.eta = params.eta;
    n.r = params.r;
    n.q = params.q;
    return n;
}

ModelParams symmetric_params(double theta, double alpha, double beta, double rho_bar, double eta,
                             double r, double q) {
    NaturalParams n;
    n.theta = theta;
    n.v0 = theta;
    n.rho_a = rho_bar;
    n.rho_0 = rho_bar;
    n.alpha = alpha;
    n.beta = beta;
    n.eta = eta;
    n.r = r;
    n.q = q;
    return to_raw(n, rho_bar);
}

double rho_t(double v_plus, double v_minus, double rho_bar, double eta) {
    const double total = v_plus + v_minus;
    if (!(total >= kMinTotalVariance)) {
        throw DomainError("rho_t undefined: total variance is zero");
    }
    const double r = rho_bar + eta * (v_plus - v_minus) / total;
    return std::clamp(r, rho_bar - eta, rho_bar + eta);
}

double rho_cs(double rho_t, double rho_bar, double eta) {
    const double offset = rho_t - rho_bar;
    if (std::abs(offset) > eta + kCorrelationTolerance) {
        throw RangeError("rho_t outside [rho_bar - eta, rho_bar + eta]");
    }
    return std::sqrt(std::max(0.0, eta * eta - offset * offset));
}

RhoSdeCoefficients rho_sde_coefficients(double v, double rho_t_value, const ModelParams& params) {
    if (!(v > 0.0)) throw DomainError("rho SDE coefficients need positive total variance");
    const double offset = rho_t_value - params.rho_bar;
    if (std::abs(offset) > params.eta + kCorrelationTolerance) {
        throw RangeError("rho_t outside [rho_bar - eta, rho_bar + eta]");
    }
    const double theta = params.theta();
    const double rho_a = theta > 0.0 ? long_run_correlation(params) : params.rho_bar;
    RhoSdeCoefficients c;
    c.drift = params.beta * (theta / v) * (rho_a - rho_t_value);
    const double range = params.eta * params.eta - offset * offset;
    c.diffusion = range > 0.0 ? params.alpha / std::sqrt(v) * std::sqrt(range) : 0.0;
    return c;
}

double long_run_correlation(const ModelParams& params) {
    const double theta = params.theta();
    if (!(theta > 0.0)) throw DomainError("long-run correlation undefined for theta = 0");
    return params.rho_bar + params.eta * (params.theta_plus - params.theta_minus) / theta;
}

double initial_correlation(const ModelParams& params) {
    return rho_t(params.v0_plus, params.v0_minus, params.rho_bar, params.eta);
}

ModelParams with_initial_correlation(const ModelParams& params, double rho_0) {
    const double w = split_weight(rho_0, params.rho_bar, params.eta, "rho_0");
    ModelParams p = params;
    const double v0 = params.v0();
    p.v0_plus = 0.5 * v0 * (1.0 + w);
    p.v0_minus = 0.5 * v0 * (1.0 - w);
    return p;
}

double feller_ratio(const ModelParams& params) {
    const double theta = params.theta();
    if (!(theta > 0.0)) throw DomainError("Feller ratio needs theta > 0");
    return params.alpha * params.alpha / (2.0 * params.beta * theta);
}

}  // namespace corrheston
