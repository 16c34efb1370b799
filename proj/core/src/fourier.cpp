#include "corrheston/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "corrheston/errors.hpp"

namespace corrheston {
namespace {

constexpr Complex kI{0.0, 1.0};
constexpr std::size_t kPanelPoints = 16;
constexpr double kEnvelopeCutoff = 1e-14;
constexpr double kMaxTruncation = 1e5;

using GaussRule = boost::math::quadrature::gauss<double, kPanelPoints>;

struct Grid {
    std::vector<double> u;
    std::vector<double> w;
};

// Composite Gauss-Legendre nodes on [0, upper].
Grid make_grid(std::size_t nodes, double upper) {
    const std::size_t panels = std::max<std::size_t>(1, nodes / kPanelPoints);
    const auto& x = GaussRule::abscissa();
    const auto& wt = GaussRule::weights();
    const double h = upper / static_cast<double>(panels);
    Grid g;
    g.u.reserve(panels * kPanelPoints);
    g.w.reserve(panels * kPanelPoints);
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = (static_cast<double>(p) + 0.5) * h;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double off = 0.5 * h * x[j];
            const double wj = 0.5 * h * wt[j];
            if (x[j] == 0.0) {
                g.u.push_back(mid);
                g.w.push_back(wj);
                continue;
            }
            g.u.push_back(mid - off);
            g.w.push_back(wj);
            g.u.push_back(mid + off);
            g.w.push_back(wj);
        }
    }
    return g;
}

template <class Integrand>
double integrate(const Grid& g, const Integrand& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.u.size(); ++i) sum += g.w[i] * f(g.u[i]);
    return sum;
}

// Smallest power-of-two multiple of a base step beyond which the envelope stays negligible.
template <class Envelope>
double find_truncation(const Envelope& envelope) {
    double u = 8.0;
    while (u < kMaxTruncation) {
        if (envelope(u) < kEnvelopeCutoff && envelope(1.5 * u) < kEnvelopeCutoff) return u;
        u *= 1.5;
    }
    throw AccuracyError("Fourier integrand does not decay; cannot choose truncation");
}

struct Integration {
    double value = 0.0;
    std::size_t nodes = 0;
    double truncation = 0.0;
};

// Integrates f on [0, U] with node doubling until two estimates agree.
// `scale` converts the raw integral to price per unit spot for tolerance checks.
template <class Integrand, class Envelope>
Integration integrate_adaptive(const Integrand& f, const Envelope& envelope, double scale,
                               const QuadratureConfig& cfg) {
    Integration out;
    out.truncation = cfg.truncation ? *cfg.truncation : find_truncation(envelope);
    std::size_t n = cfg.nodes;
    double prev = integrate(make_grid(n, out.truncation), f);
    double diff = 0.0;
    while (true) {
        const std::size_t next = 2 * n;
        const double cur = integrate(make_grid(next, out.truncation), f);
        diff = std::abs(cur - prev) * scale;
        prev = cur;
        n = next;
        if (!std::isfinite(cur)) throw AccuracyError("Fourier integral is not finite");
        if (diff <= cfg.refine_tolerance || 2 * n > cfg.max_nodes) break;
    }
    if (diff > cfg.tolerance) {
        throw AccuracyError("Fourier quadrature did not converge under node doubling");
    }
    out.value = prev;
    out.nodes = n;
    return out;
}

Complex damped_denominator(double u, double damping) {
    return Complex(damping * damping + damping - u * u, (2.0 * damping + 1.0) * u);
}

struct DampedIntegral {
    Integration integration;
    double price_per_spot = 0.0;
};

// Price per unit spot by damped inversion: a call for damping > 0, a put for damping < -1.
DampedIntegral damped_price(double log_moneyness, double expiry, const ModelParams& params,
                            double damping, const QuadratureConfig& cfg) {
    const double df = std::exp(-params.r * expiry);
    const double k = log_moneyness;
    const double prefactor = std::exp(-damping * k) / std::numbers::pi;

    auto psi = [&](double u) {
        const Complex xi(u, -(damping + 1.0));
        return df * log_return_char_fn(xi, expiry, params) / damped_denominator(u, damping);
    };
    auto integrand = [&](double u) { return (std::exp(-kI * u * k) * psi(u)).real(); };
    auto envelope = [&](double u) { return prefactor * std::abs(psi(u)); };

    DampedIntegral out;
    out.integration = integrate_adaptive(integrand, envelope, prefactor, cfg);
    out.price_per_spot = prefactor * out.integration.value;
    return out;
}

void require_option_inputs(double strike, double expiry, double spot) {
    if (!(strike > 0.0)) throw ValidationError("strike must be positive");
    if (!(expiry > 0.0)) throw ValidationError("expiry must be positive");
    if (!(spot > 0.0)) throw ValidationError("spot must be positive");
}

}  // namespace

void QuadratureConfig::validate() const {
    if (!(damping > 0.0)) throw ValidationError("damping must be positive");
    if (truncation && !(*truncation > 0.0)) throw ValidationError("truncation must be positive");
    if (nodes < 64) throw ValidationError("nodes must be at least 64");
    if (max_nodes < 2 * nodes) throw ValidationError("max_nodes must allow one doubling");
    if (!(tolerance > 0.0) || !(refine_tolerance > 0.0)) {
        throw ValidationError("tolerances must be positive");
    }
}

double price_with_damping(double strike, double expiry, double spot, const ModelParams& params,
                          double damping, const QuadratureConfig& cfg) {
    require_option_inputs(strike, expiry, spot);
    if (!(damping > 0.0 || damping < -1.0)) {
        throw ValidationError("damping must be > 0 (call) or < -1 (put)");
    }
    return spot * damped_price(std::log(strike / spot), expiry, params, damping, cfg).price_per_spot;
}

double price_vanilla(const VanillaOption& option, double spot, const ModelParams& params,
                     const QuadratureConfig& cfg) {
    option.validate();
    cfg.validate();
    params.validate();
    require_option_inputs(option.strike, option.expiry, spot);

    const double tau = option.expiry;
    const double df_r = std::exp(-params.r * tau);
    const double fwd = forward_price(spot, tau, params.r, params.q);
    const OptionSide otm = option.strike >= fwd ? OptionSide::Call : OptionSide::Put;
    const double damping = otm == OptionSide::Call ? cfg.damping : -(1.0 + cfg.damping);

    const double otm_price =
        std::max(0.0, spot * damped_price(std::log(option.strike / spot), tau, params, damping, cfg)
                                 .price_per_spot);
    if (otm == option.side) return otm_price;
    const double parity = df_r * (fwd - option.strike);  // C - P
    return option.side == OptionSide::Call ? otm_price + parity : otm_price - parity;
}

QuadraturePlan plan_quadrature(double strike, double expiry, double spot, const ModelParams& params,
                               const QuadratureConfig& cfg) {
    require_option_inputs(strike, expiry, spot);
    cfg.validate();
    const double fwd = forward_price(spot, expiry, params.r, params.q);
    const double damping = strike >= fwd ? cfg.damping : -(1.0 + cfg.damping);
    const DampedIntegral d = damped_price(std::log(strike / spot), expiry, params, damping, cfg);
    return {d.integration.nodes, d.integration.truncation};
}

double exercise_probability(double strike, double expiry, double spot, const ModelParams& params,
                            OptionSide side, const QuadratureConfig& cfg) {
    require_option_inputs(strike, expiry, spot);
    cfg.validate();
    params.validate();
    const double k = std::log(strike / spot);
    auto integrand = [&](double u) {
        const Complex phi = log_return_char_fn(Complex(u, 0.0), expiry, params);
        return (std::exp(-kI * u * k) * phi / (kI * u)).real();
    };
    auto envelope = [&](double u) {
        return std::abs(log_return_char_fn(Complex(u, 0.0), expiry, params)) /
               (std::numbers::pi * u);
    };
    const Integration in = integrate_adaptive(integrand, envelope, 1.0 / std::numbers::pi, cfg);
    const double above = std::clamp(0.5 + in.value / std::numbers::pi, 0.0, 1.0);
    return side == OptionSide::Call ? above : 1.0 - above;
}

double price_digital(double strike, double expiry, double spot, const ModelParams& params,
                     OptionSide side, const QuadratureConfig& cfg) {
    return std::exp(-params.r * expiry) *
           exercise_probability(strike, expiry, spot, params, side, cfg);
}

double model_implied_vol(const ModelParams& params, double spot, double tau, double strike,
                         const QuadratureConfig& cfg) {
    const double fwd = forward_price(spot, tau, params.r, params.q);
    const OptionSide otm = strike >= fwd ? OptionSide::Call : OptionSide::Put;
    const double price = price_vanilla({strike, tau, otm}, spot, params, cfg);
    return implied_vol(price, spot, strike, tau, params.r, params.q, otm);
}

std::vector<double> smile_from_model(const ModelParams& params, double spot, double tau,
                                     std::span<const double> strikes, const QuadratureConfig& cfg) {
    if (!std::is_sorted(strikes.begin(), strikes.end())) {
        throw ValidationError("strikes must be sorted ascending");
    }
    std::vector<double> vols;
    vols.reserve(strikes.size());
    for (double k : strikes) {
        if (!(k > 0.0)) throw ValidationError("strikes must be positive");
        vols.push_back(model_implied_vol(params, spot, tau, k, cfg));
    }
    return vols;
}

StrikeVol model_delta_strike(const ModelParams& params, double spot, double tau,
                             double delta_target, OptionSide side, DeltaConvention convention,
                             const QuadratureConfig& cfg) {
    StrikeVol sv;
    sv.strike = atm_strike(spot, tau, params.r, params.q);
    sv.vol = model_implied_vol(params, spot, tau, sv.strike, cfg);
    for (int iter = 0; iter < 100; ++iter) {
        const double k =
            strike_from_delta(delta_target, spot, sv.vol, tau, params.r, params.q, side, convention);
        const double vol = model_implied_vol(params, spot, tau, k, cfg);
        const bool done = std::abs(k - sv.strike) <= 1e-13 * k;
        sv.strike = k;
        sv.vol = vol;
        if (done) return sv;
    }
    throw NoSolutionError("delta strike fixed point did not converge");
}

SmileQuote model_smile_quote(const ModelParams& params, double spot, double tau,
                             DeltaConvention convention, const QuadratureConfig& cfg) {
    SmileVols v;
    v.atm = model_implied_vol(params, spot, tau, atm_strike(spot, tau, params.r, params.q), cfg);
    v.call25 = model_delta_strike(params, spot, tau, 0.25, OptionSide::Call, convention, cfg).vol;
    v.put25 = model_delta_strike(params, spot, tau, -0.25, OptionSide::Put, convention, cfg).vol;
    return quote_from_vols(tau, v);
}

PreparedFourierPricer::PreparedFourierPricer(const ModelParams& params, double tau,
                                             std::size_t nodes, double truncation, double damping)
    : params_(params), tau_(tau), damping_(damping) {
    params_.validate();
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (!(damping > 0.0)) throw ValidationError("damping must be positive");
    if (!(truncation > 0.0) || nodes < 64) throw ValidationError("invalid quadrature grid");
    const Grid g = make_grid(nodes, truncation);
    const double put_damping = -(1.0 + damping);
    nodes_.reserve(g.u.size());
    for (std::size_t i = 0; i < g.u.size(); ++i) {
        const double u = g.u[i];
        Node n;
        n.u = u;
        n.weight = g.w[i];
        n.call = riccati_closed_form(Complex(u, -(damping + 1.0)), tau, params_);
        n.put = riccati_closed_form(Complex(u, -(put_damping + 1.0)), tau, params_);
        n.call_denominator = damped_denominator(u, damping);
        n.put_denominator = damped_denominator(u, put_damping);
        nodes_.push_back(n);
    }
}

double PreparedFourierPricer::price(double log_moneyness, double v_plus, double v_minus,
                                    OptionSide side) const {
    const double k = log_moneyness;
    const double df_r = std::exp(-params_.r * tau_);
    const double fwd_over_spot = std::exp((params_.r - params_.q) * tau_);
    const double strike_over_spot = std::exp(k);
    const OptionSide otm = strike_over_spot >= fwd_over_spot ? OptionSide::Call : OptionSide::Put;
    const double a = otm == OptionSide::Call ? damping_ : -(1.0 + damping_);

    double sum = 0.0;
    for (const Node& n : nodes_) {
        const RiccatiSolution& s = otm == OptionSide::Call ? n.call : n.put;
        const Complex& den = otm == OptionSide::Call ? n.call_denominator : n.put_denominator;
        const Complex psi = evaluate_char_fn(s, v_plus, v_minus) / den;
        sum += n.weight * (std::exp(-kI * n.u * k) * psi).real();
    }
    const double otm_price = std::max(0.0, df_r * std::exp(-a * k) / std::numbers::pi * sum);
    if (otm == side) return otm_price;
    const double parity = df_r * (fwd_over_spot - strike_over_spot);
    return side == OptionSide::Call ? otm_price + parity : otm_price - parity;
}

double PreparedFourierPricer::implied_vol(double log_moneyness, double v_plus,
                                          double v_minus) const {
    const double strike = std::exp(log_moneyness);
    const OptionSide otm =
        strike >= std::exp((params_.r - params_.q) * tau_) ? OptionSide::Call : OptionSide::Put;
    const double p = price(log_moneyness, v_plus, v_minus, otm);
    return corrheston::implied_vol(p, 1.0, strike, tau_, params_.r, params_.q, otm);
}

}  // namespace corrheston
