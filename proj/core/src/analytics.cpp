#include "corrheston/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "corrheston/errors.hpp"

namespace corrheston {
namespace {

constexpr std::size_t kMinObservations = 30;
constexpr double kDaysPerYear = 252.0;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, int& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_date(std::string_view s, std::chrono::year_month_day& out) {
    s = trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y = 0;
    int m = 0;
    int d = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
        !parse_int(s.substr(8, 2), d)) {
        return false;
    }
    out = std::chrono::year_month_day{std::chrono::year{y},
                                      std::chrono::month{static_cast<unsigned>(m)},
                                      std::chrono::day{static_cast<unsigned>(d)}};
    return out.ok();
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Risk reversal (25-delta call vol less put vol) of the model state, with
// strikes located by the same delta fixed point as the calibration smile.
class StateRiskReversal {
public:
    StateRiskReversal(const ModelParams& params, double tau, DeltaConvention convention)
        : params_(params), tau_(tau), convention_(convention),
          pricer_(make_pricer(params, tau)) {}

    [[nodiscard]] double operator()(double v_plus, double v_minus) const {
        return wing_vol(v_plus, v_minus, OptionSide::Call) -
               wing_vol(v_plus, v_minus, OptionSide::Put);
    }

private:
    static PreparedFourierPricer make_pricer(const ModelParams& params, double tau) {
        // Size the grid for a low-variance state: its characteristic function
        // decays slowest.
        ModelParams low = params;
        low.v0_plus *= 0.25;
        low.v0_minus *= 0.25;
        const QuadraturePlan plan =
            plan_quadrature(forward_price(1.0, tau, params.r, params.q), tau, 1.0, low);
        return PreparedFourierPricer(params, tau, 2 * plan.nodes, plan.truncation);
    }

    [[nodiscard]] double wing_vol(double v_plus, double v_minus, OptionSide side) const {
        const double target = side == OptionSide::Call ? 0.25 : -0.25;
        double vol = std::sqrt(std::max(v_plus + v_minus, 1e-8));
        double x = 0.0;
        for (int i = 0; i < 100; ++i) {
            x = std::log(strike_from_delta(target, 1.0, vol, tau_, params_.r, params_.q, side,
                                           convention_));
            const double next = pricer_.implied_vol(x, v_plus, v_minus);
            const bool done = std::abs(next - vol) <= 1e-12;
            vol = next;
            if (done) break;
        }
        return vol;
    }

    ModelParams params_;
    double tau_;
    DeltaConvention convention_;
    PreparedFourierPricer pricer_;
};

// Keeps (log spot, v+, v-) after every step of model 0, path by path.
class TrajectoryObserver : public PathObserver {
public:
    explicit TrajectoryObserver(std::size_t steps) : steps_(steps) {}

    [[nodiscard]] std::unique_ptr<PathObserver> clone_empty() const override {
        return std::make_unique<TrajectoryObserver>(steps_);
    }

    void begin_path(std::size_t, std::span<const PathState> initial) override {
        record(initial[0]);
    }

    void on_step(const StepContext&, std::span<const PathState>, std::span<const PathState> after,
                 std::span<const double>) override {
        record(after[0]);
    }

    void end_path(std::span<const PathState>) override {}

    void merge(const PathObserver& other) override {
        const auto& o = dynamic_cast<const TrajectoryObserver&>(other);
        data_.insert(data_.end(), o.data_.begin(), o.data_.end());
    }

    /// Three values per point, steps + 1 points per path.
    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

private:
    void record(const PathState& s) {
        data_.push_back(s.log_spot);
        data_.push_back(s.v_plus);
        data_.push_back(s.v_minus);
    }

    std::size_t steps_;
    std::vector<double> data_;
};

}  // namespace

void MarketSeries::validate() const {
    if (dates.size() != spot.size() || dates.size() != rr.size()) {
        throw ValidationError("market series columns differ in length");
    }
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (!(spot[i] > 0.0) || !std::isfinite(spot[i])) {
            throw ValidationError("market series spot must be positive");
        }
        if (!std::isfinite(rr[i])) throw ValidationError("market series risk reversal is not finite");
        if (i > 0 && !(dates[i - 1] < dates[i])) {
            throw ValidationError("market series dates must be strictly increasing");
        }
    }
}

MarketSeries read_market_series(std::istream& in) {
    MarketSeries series;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("market series file is empty");
    const auto header = split(line);
    if (header.size() != 3 || trim(header[0]) != "date" || trim(header[1]) != "spot" ||
        trim(header[2]) != "rr") {
        throw ValidationError("market series header must be date,spot,rr");
    }
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        std::chrono::year_month_day date;
        double spot = 0.0;
        double rr = 0.0;
        if (fields.size() != 3 || !parse_date(fields[0], date) || !parse_double(fields[1], spot) ||
            !parse_double(fields[2], rr) || !(spot > 0.0)) {
            ++series.dropped_rows;
            continue;
        }
        series.dates.push_back(date);
        series.spot.push_back(spot);
        series.rr.push_back(rr / 100.0);
    }
    series.validate();
    return series;
}

MarketSeries read_market_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open market series " + path.string());
    return read_market_series(in);
}

RrBetaEstimate ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("regression inputs differ in length");
    const std::size_t n = x.size();
    if (n < kMinObservations) throw ValidationError("regression needs at least 30 observations");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw DomainError("regressor has zero variance");

    RrBetaEstimate est;
    est.n = n;
    est.beta_rr = sxy / sxx;
    est.intercept = my - est.beta_rr * mx;
    est.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 0.0;
    est.corr = std::copysign(std::sqrt(est.r_squared), est.beta_rr);
    const double ssr = std::max(syy - est.beta_rr * sxy, 0.0);
    est.beta_std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    return est;
}

RrBetaEstimate estimate_rr_beta(const MarketSeries& series) {
    series.validate();
    if (series.spot.size() < kMinObservations + 1) {
        throw ValidationError("risk reversal beta needs at least 31 daily observations");
    }
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(series.spot.size() - 1);
    y.reserve(series.spot.size() - 1);
    for (std::size_t i = 1; i < series.spot.size(); ++i) {
        x.push_back(std::log(series.spot[i] / series.spot[i - 1]));
        y.push_back(series.rr[i] - series.rr[i - 1]);
    }
    return ols_fit(x, y);
}

double model_k_tau(const ModelParams& params, double spot, double tau, double bump,
                   DeltaConvention convention, const QuadratureConfig& quad) {
    params.validate();
    if (!(bump > 0.0)) throw ValidationError("bump must be positive");
    if (!(params.eta > 0.0)) {
        throw DomainError("eta = 0 leaves no room to move the initial correlation");
    }
    const double rho0 = initial_correlation(params);
    const double lo = params.rho_bar - params.eta;
    const double hi = params.rho_bar + params.eta;
    while (!(rho0 - bump > lo && rho0 + bump < hi)) {
        bump *= 0.5;
        if (bump < 1e-8) throw DomainError("initial correlation sits on its bound");
    }
    auto rr_at = [&](double rho) {
        return model_smile_quote(with_initial_correlation(params, rho), spot, tau, convention, quad)
            .rr25;
    };
    return (rr_at(rho0 + bump) - rr_at(rho0 - bump)) / (2.0 * bump);
}

double model_k_tau(const SmileQuote& quote, double spot, double beta, double eta, double r,
                   double q, double tau, double bump, const CalibrationConfig& calib) {
    const CalibrationResult fit = calibrate(quote, spot, beta, eta, r, q, std::nullopt, calib);
    return model_k_tau(fit.params, spot, tau, bump, calib.convention, calib.quadrature);
}

double model_rr_beta(double k_tau, double alpha, double eta, double theta) {
    if (!(theta > 0.0)) throw ValidationError("theta must be positive");
    return k_tau * alpha * eta * eta / theta;
}

double estimate_eta(double beta_rr, double k_tau, double alpha, double theta) {
    if (!(beta_rr >= 0.0) || !(k_tau > 0.0) || !(alpha > 0.0) || !(theta > 0.0)) {
        throw ValidationError("estimate_eta needs beta_rr >= 0 and positive k, alpha, theta");
    }
    return std::sqrt(theta * beta_rr / (k_tau * alpha));
}

RrBetaEstimate mc_rr_beta(const ModelParams& params, double spot, double tau,
                          std::size_t horizon_days, const McConfig& cfg,
                          DeltaConvention convention) {
    params.validate();
    if (horizon_days < 1) throw ValidationError("horizon must be at least one day");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");

    TrajectoryObserver observer(horizon_days);
    PathObserver* obs[] = {&observer};
    evolve_paths(params, spot, static_cast<double>(horizon_days) / kDaysPerYear, cfg, obs,
                 horizon_days);

    const StateRiskReversal rr(params, tau, convention);
    const double rr0 = rr(params.v0_plus, params.v0_minus);
    const std::vector<double>& data = observer.data();
    const std::size_t points = horizon_days + 1;
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(cfg.paths * horizon_days);
    y.reserve(cfg.paths * horizon_days);
    for (std::size_t path = 0; path < cfg.paths; ++path) {
        const double* p = data.data() + path * points * 3;
        double prev = rr0;
        for (std::size_t k = 1; k < points; ++k) {
            const double now = rr(p[3 * k + 1], p[3 * k + 2]);
            x.push_back(p[3 * k] - p[3 * (k - 1)]);
            y.push_back(now - prev);
            prev = now;
        }
    }
    return ols_fit(x, y);
}

}  // namespace corrheston
