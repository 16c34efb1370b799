#include "corrheston/exotics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <array>

#include "corrheston/errors.hpp"

namespace corrheston {
namespace {

// Bridge terms with 2 q above this contribute less than e^{-80}.
constexpr double kNegligibleBridge = 40.0;

bool is_up(const BarrierProduct& p, double spot) {
    switch (p.kind) {
        case BarrierKind::DownAndOutCall: return false;
        case BarrierKind::UpAndOutPut: return true;
        case BarrierKind::OneTouch: return p.barrier > spot;
    }
    return true;
}

bool touched_at_start(const BarrierProduct& p, double spot) {
    switch (p.kind) {
        case BarrierKind::DownAndOutCall: return p.barrier >= spot;
        case BarrierKind::UpAndOutPut: return p.barrier <= spot;
        case BarrierKind::OneTouch: return p.barrier == spot;
    }
    return false;
}

struct BatchSetup {
    std::size_t models = 0;
    bool bridge = true;
    std::vector<double> log_levels;
    std::vector<std::size_t> down_order;  // levels below spot, nearest first
    std::vector<std::size_t> up_order;    // levels above spot, nearest first
    struct Leg {
        BarrierKind kind;
        std::size_t level;
        double strike;
        double discount;
        bool up;
    };
    std::vector<Leg> legs;
};

class BarrierObserver : public PathObserver {
public:
    explicit BarrierObserver(std::shared_ptr<const BatchSetup> setup)
        : setup_(std::move(setup)),
          survival_(setup_->log_levels.size() * setup_->models, 1.0),
          row_(2 * setup_->models, 0.0) {
        moments_.reserve(setup_->legs.size());
        for (std::size_t i = 0; i < setup_->legs.size(); ++i) {
            moments_.emplace_back(2 * setup_->models);
        }
    }

    [[nodiscard]] std::unique_ptr<PathObserver> clone_empty() const override {
        return std::make_unique<BarrierObserver>(setup_);
    }

    void begin_path(std::size_t, std::span<const PathState>) override {
        std::fill(survival_.begin(), survival_.end(), 1.0);
    }

    void on_step(const StepContext&, std::span<const PathState> before,
                 std::span<const PathState> after, std::span<const double> step_variance) override {
        const std::size_t n_models = setup_->models;
        for (std::size_t m = 0; m < n_models; ++m) {
            const double x0 = before[m].log_spot;
            const double x1 = after[m].log_spot;
            const double ev = step_variance[m];
            update(setup_->down_order, m, x0, x1, ev, false);
            update(setup_->up_order, m, x0, x1, ev, true);
        }
    }

    void end_path(std::span<const PathState> terminal) override {
        const std::size_t n_models = setup_->models;
        for (std::size_t j = 0; j < setup_->legs.size(); ++j) {
            const BatchSetup::Leg& leg = setup_->legs[j];
            const double level = std::exp(setup_->log_levels[leg.level]);
            for (std::size_t m = 0; m < n_models; ++m) {
                const double surv = survival_[leg.level * n_models + m];
                const double st = std::exp(terminal[m].log_spot);
                double y = 0.0;
                double x = 0.0;
                switch (leg.kind) {
                    case BarrierKind::OneTouch: {
                        y = leg.discount * (1.0 - surv);
                        x = leg.discount * ((leg.up ? st >= level : st <= level) ? 1.0 : 0.0);
                        break;
                    }
                    case BarrierKind::DownAndOutCall:
                        x = leg.discount * std::max(st - leg.strike, 0.0);
                        y = surv * x;
                        break;
                    case BarrierKind::UpAndOutPut:
                        x = leg.discount * std::max(leg.strike - st, 0.0);
                        y = surv * x;
                        break;
                }
                row_[2 * m] = y;
                row_[2 * m + 1] = x;
            }
            moments_[j].add(row_);
        }
    }

    void merge(const PathObserver& other) override {
        const auto& o = dynamic_cast<const BarrierObserver&>(other);
        for (std::size_t j = 0; j < moments_.size(); ++j) moments_[j].merge(o.moments_[j]);
    }

    [[nodiscard]] const std::vector<MomentAccumulator>& moments() const noexcept {
        return moments_;
    }

private:
    // Levels are visited nearest first, so once a level beyond both endpoints
    // has a negligible crossing probability every later one does too.
    void update(const std::vector<std::size_t>& order, std::size_t m, double x0, double x1,
                double ev, bool up) {
        const std::size_t n_models = setup_->models;
        for (std::size_t idx : order) {
            const double lb = setup_->log_levels[idx];
            double& s = survival_[idx * n_models + m];
            const double a = lb - x0;
            const double b = lb - x1;
            if (a * b <= 0.0) {
                s = 0.0;
                continue;
            }
            const bool beyond = up ? lb > std::max(x0, x1) : lb < std::min(x0, x1);
            if (!beyond) {
                s = 0.0;  // already on the far side, crossed earlier
                continue;
            }
            const double q = ev > 0.0 ? 2.0 * a * b / ev : HUGE_VAL;
            if (q > kNegligibleBridge) break;
            if (setup_->bridge && s > 0.0) s *= -std::expm1(-q);
        }
    }

    std::shared_ptr<const BatchSetup> setup_;
    std::vector<double> survival_;
    std::vector<double> row_;
    std::vector<MomentAccumulator> moments_;
};

McPrice control_variate_price(const MomentAccumulator& acc, std::size_t m, double control_mean,
                              std::size_t dim) {
    McPrice out;
    const double var_x = acc.covariance(2 * m + 1, 2 * m + 1);
    const double var_y = acc.covariance(2 * m, 2 * m);
    out.cv_beta = var_x > 0.0 && var_y > 0.0 ? acc.covariance(2 * m, 2 * m + 1) / var_x : 0.0;
    std::vector<double> w(dim, 0.0);
    w[2 * m] = 1.0;
    w[2 * m + 1] = -out.cv_beta;
    const auto est = acc.linear_combination(w);
    out.value = est.mean + out.cv_beta * control_mean;
    out.std_error = est.std_error;
    out.plain_std_error = std::sqrt(std::max(var_y, 0.0) / static_cast<double>(acc.count()));
    return out;
}

class VolSwapObserver : public PathObserver {
public:
    VolSwapObserver(std::size_t models, double annualizer)
        : models_(models), annualizer_(annualizer), moments_(2 * models), row_(2 * models) {}

    [[nodiscard]] std::unique_ptr<PathObserver> clone_empty() const override {
        return std::make_unique<VolSwapObserver>(models_, annualizer_);
    }

    void end_path(std::span<const PathState> terminal) override {
        for (std::size_t m = 0; m < models_; ++m) {
            const double var = annualizer_ * terminal[m].sum_sq_returns;
            row_[m] = std::sqrt(var);
            row_[models_ + m] = var;
        }
        moments_.add(row_);
    }

    void merge(const PathObserver& other) override {
        moments_.merge(dynamic_cast<const VolSwapObserver&>(other).moments_);
    }

    [[nodiscard]] const MomentAccumulator& moments() const noexcept { return moments_; }

private:
    std::size_t models_;
    double annualizer_;
    MomentAccumulator moments_;
    std::vector<double> row_;
};

McPrice plain_estimate(const MomentAccumulator& acc, std::size_t i) {
    std::vector<double> w(acc.dim(), 0.0);
    w[i] = 1.0;
    const auto est = acc.linear_combination(w);
    return {est.mean, est.std_error, 0.0, est.std_error};
}

}  // namespace

void BarrierProduct::validate() const {
    if (!(barrier > 0.0)) throw ValidationError("barrier must be positive");
    if (!(expiry > 0.0)) throw ValidationError("expiry must be positive");
    if (kind != BarrierKind::OneTouch && !(strike > 0.0)) {
        throw ValidationError("strike must be positive");
    }
    if (kind == BarrierKind::DownAndOutCall && !(barrier < strike)) {
        throw ValidationError("down-and-out call needs barrier below strike");
    }
    if (kind == BarrierKind::UpAndOutPut && !(barrier > strike)) {
        throw ValidationError("up-and-out put needs barrier above strike");
    }
}

std::size_t VolSwapSpec::returns() const {
    if (num_returns > 0) return num_returns;
    return static_cast<std::size_t>(std::max(1.0, std::round(fixings_per_year * expiry)));
}

void VolSwapSpec::validate() const {
    if (!(expiry > 0.0)) throw ValidationError("vol swap expiry must be positive");
    if (!(fixings_per_year > 0.0)) throw ValidationError("fixings_per_year must be positive");
}

McPrice BarrierBatch::difference(std::size_t product, std::size_t model_a,
                                 std::size_t model_b) const {
    const McPrice& a = prices_.at(product).at(model_a);
    const McPrice& b = prices_.at(product).at(model_b);
    McPrice out;
    out.value = a.value - b.value;
    if (exact_[product] || model_a == model_b) return out;
    std::vector<double> w(2 * models_, 0.0);
    w[2 * model_a] += 1.0;
    w[2 * model_a + 1] -= a.cv_beta;
    w[2 * model_b] -= 1.0;
    w[2 * model_b + 1] += b.cv_beta;
    out.std_error = moments_[product].linear_combination(w).std_error;
    std::vector<double> plain(2 * models_, 0.0);
    plain[2 * model_a] += 1.0;
    plain[2 * model_b] -= 1.0;
    out.plain_std_error = moments_[product].linear_combination(plain).std_error;
    return out;
}

BarrierBatch price_barrier_batch(std::span<const BarrierProduct> products, double spot,
                                 std::span<const ModelParams> models, const McConfig& cfg,
                                 const QuadratureConfig& quad) {
    if (products.empty()) throw ValidationError("no barrier products given");
    if (models.empty()) throw ValidationError("no models given");
    if (!(spot > 0.0)) throw ValidationError("spot must be positive");
    const double expiry = products.front().expiry;
    for (const BarrierProduct& p : products) {
        p.validate();
        if (p.expiry != expiry) throw ValidationError("batched products must share an expiry");
    }
    const std::size_t n_models = models.size();
    const double r = models.front().r;
    for (const ModelParams& p : models) {
        if (p.r != r) throw ValidationError("batched models must share the discount rate");
    }

    auto setup = std::make_shared<BatchSetup>();
    setup->models = n_models;
    setup->bridge = cfg.bridge_enabled;
    const double discount = std::exp(-r * expiry);

    BarrierBatch batch;
    batch.models_ = n_models;
    batch.prices_.assign(products.size(), std::vector<McPrice>(n_models));
    batch.control_.assign(products.size(), std::vector<double>(n_models, 0.0));
    batch.exact_.assign(products.size(), false);

    std::vector<std::size_t> live;
    for (std::size_t j = 0; j < products.size(); ++j) {
        const BarrierProduct& p = products[j];
        if (touched_at_start(p, spot)) {
            batch.exact_[j] = true;
            for (McPrice& price : batch.prices_[j]) {
                price.value = p.kind == BarrierKind::OneTouch ? discount : 0.0;
            }
            continue;
        }
        live.push_back(j);
        const double lb = std::log(p.barrier);
        auto it = std::find(setup->log_levels.begin(), setup->log_levels.end(), lb);
        std::size_t level = static_cast<std::size_t>(it - setup->log_levels.begin());
        if (it == setup->log_levels.end()) {
            setup->log_levels.push_back(lb);
            (is_up(p, spot) ? setup->up_order : setup->down_order).push_back(level);
        }
        setup->legs.push_back({p.kind, level, p.strike, discount, is_up(p, spot)});
        for (std::size_t m = 0; m < n_models; ++m) {
            double& ex = batch.control_[j][m];
            switch (p.kind) {
                case BarrierKind::OneTouch:
                    ex = price_digital(p.barrier, expiry, spot, models[m],
                                       is_up(p, spot) ? OptionSide::Call : OptionSide::Put, quad);
                    break;
                case BarrierKind::DownAndOutCall:
                    ex = price_vanilla({p.strike, expiry, OptionSide::Call}, spot, models[m], quad);
                    break;
                case BarrierKind::UpAndOutPut:
                    ex = price_vanilla({p.strike, expiry, OptionSide::Put}, spot, models[m], quad);
                    break;
            }
        }
    }
    const auto& levels = setup->log_levels;
    std::sort(setup->down_order.begin(), setup->down_order.end(),
              [&](std::size_t a, std::size_t b) { return levels[a] > levels[b]; });
    std::sort(setup->up_order.begin(), setup->up_order.end(),
              [&](std::size_t a, std::size_t b) { return levels[a] < levels[b]; });

    if (live.empty()) {
        batch.moments_.assign(products.size(), MomentAccumulator(2 * n_models));
        return batch;
    }

    BarrierObserver observer(setup);
    PathObserver* obs[] = {&observer};
    batch.info_ = evolve_paths(models, spot, expiry, cfg, obs);

    batch.moments_.assign(products.size(), MomentAccumulator(2 * n_models));
    for (std::size_t i = 0; i < live.size(); ++i) {
        const std::size_t j = live[i];
        batch.moments_[j] = observer.moments()[i];
        for (std::size_t m = 0; m < n_models; ++m) {
            batch.prices_[j][m] =
                control_variate_price(batch.moments_[j], m, batch.control_[j][m], 2 * n_models);
        }
    }
    return batch;
}

McPrice price_one_touch(const BarrierProduct& product, double spot, const ModelParams& params,
                        const McConfig& cfg, const QuadratureConfig& quad) {
    if (product.kind != BarrierKind::OneTouch) throw ValidationError("product is not a one touch");
    const BarrierBatch batch =
        price_barrier_batch(std::span(&product, 1), spot, std::span(&params, 1), cfg, quad);
    return batch.prices()[0][0];
}

McPrice price_knockout(const BarrierProduct& product, double spot, const ModelParams& params,
                       const McConfig& cfg, const QuadratureConfig& quad) {
    if (product.kind == BarrierKind::OneTouch) throw ValidationError("product is not a knockout");
    const BarrierBatch batch =
        price_barrier_batch(std::span(&product, 1), spot, std::span(&params, 1), cfg, quad);
    return batch.prices()[0][0];
}

McPrice VolSwapBatch::difference(std::size_t model_a, std::size_t model_b) const {
    std::vector<double> w(moments.dim(), 0.0);
    w[model_a] += 1.0;
    w[model_b] -= 1.0;
    const auto est = moments.linear_combination(w);
    return {est.mean, est.std_error, 0.0, est.std_error};
}

VolSwapBatch price_vol_swap_batch(const VolSwapSpec& spec, double spot,
                                  std::span<const ModelParams> models, const McConfig& cfg) {
    spec.validate();
    if (models.empty()) throw ValidationError("no models given");
    const std::size_t n = spec.returns();
    const std::size_t n_models = models.size();
    VolSwapObserver observer(n_models, spec.fixings_per_year / static_cast<double>(n));
    PathObserver* obs[] = {&observer};

    VolSwapBatch out;
    out.info = evolve_paths(models, spot, spec.expiry, cfg, obs, n);
    out.moments = observer.moments();
    for (std::size_t m = 0; m < n_models; ++m) {
        out.fair_strike.push_back(plain_estimate(out.moments, m));
        out.variance_strike.push_back(plain_estimate(out.moments, n_models + m));
    }
    return out;
}

McPrice price_vol_swap_strike(const VolSwapSpec& spec, double spot, const ModelParams& params,
                              const McConfig& cfg) {
    return price_vol_swap_batch(spec, spot, std::span(&params, 1), cfg).fair_strike[0];
}

namespace {

std::array<CalibrationResult, 2> calibrate_pair(const SmileQuote& quote, double spot, double beta,
                                                double eta, double r, double q,
                                                const CalibrationConfig& calib) {
    return {calibrate(quote, spot, beta, eta, r, q, std::nullopt, calib),
            calibrate(quote, spot, beta, 0.0, r, q, std::nullopt, calib)};
}

}  // namespace

HestonDifference heston_difference(const BarrierProduct& product, const SmileQuote& quote,
                                   double spot, double beta, double eta, double r, double q,
                                   const McConfig& cfg, const CalibrationConfig& calib) {
    const auto fits = calibrate_pair(quote, spot, beta, eta, r, q, calib);
    const ModelParams models[] = {fits[0].params, fits[1].params};
    const BarrierBatch batch =
        price_barrier_batch(std::span(&product, 1), spot, models, cfg, calib.quadrature);
    return {fits[0], fits[1], batch.prices()[0][0], batch.prices()[0][1], batch.difference(0, 0, 1)};
}

HestonDifference heston_difference(const VolSwapSpec& spec, const SmileQuote& quote, double spot,
                                   double beta, double eta, double r, double q,
                                   const McConfig& cfg, const CalibrationConfig& calib) {
    const auto fits = calibrate_pair(quote, spot, beta, eta, r, q, calib);
    const ModelParams models[] = {fits[0].params, fits[1].params};
    const VolSwapBatch batch = price_vol_swap_batch(spec, spot, models, cfg);
    return {fits[0], fits[1], batch.fair_strike[0], batch.fair_strike[1], batch.difference(0, 1)};
}

double bs_one_touch_price(double spot, double barrier, double vol, double tau, double r,
                          double q) {
    if (!(vol > 0.0)) throw ValidationError("vol must be positive");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (!(spot > 0.0) || !(barrier > 0.0)) throw ValidationError("spot and barrier must be positive");
    const double discount = std::exp(-r * tau);
    const double h = std::log(barrier / spot);
    if (h == 0.0) return discount;
    // First passage of X_t = nu t + vol W_t to h (reflection principle).
    const double nu = r - q - 0.5 * vol * vol;
    const double sd = vol * std::sqrt(tau);
    const double sign = h > 0.0 ? 1.0 : -1.0;
    const double p = norm_cdf(sign * (nu * tau - h) / sd) +
                     std::exp(2.0 * nu * h / (vol * vol)) * norm_cdf(-sign * (nu * tau + h) / sd);
    return discount * std::clamp(p, 0.0, 1.0);
}

double bs_one_touch_barrier(double target, double spot, double vol, double tau, double r,
                            double q, OptionSide side) {
    const double discount = std::exp(-r * tau);
    if (!(target > 0.0 && target < discount)) {
        throw NoSolutionError("one touch target price must lie in (0, discount factor)");
    }
    const double sign = side == OptionSide::Call ? 1.0 : -1.0;
    auto price_at = [&](double x) {
        return bs_one_touch_price(spot, spot * std::exp(sign * x), vol, tau, r, q);
    };
    double lo = 0.0;
    double hi = vol * std::sqrt(tau);
    while (price_at(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 50.0) throw NoSolutionError("no barrier attains the target one touch price");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (price_at(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return spot * std::exp(sign * 0.5 * (lo + hi));
}

}  // namespace corrheston
