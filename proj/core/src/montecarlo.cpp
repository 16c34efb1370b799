#include "corrheston/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "corrheston/black_scholes.hpp"
#include "corrheston/errors.hpp"

namespace corrheston {
namespace {

constexpr std::size_t kBlockPaths = 2048;
constexpr double kDeterministicAlpha = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::size_t path) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(path) + 1));
}

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// Step coefficients of one CIR factor for a fixed dt.
struct CirStep {
    double theta = 0.0;
    double decay = 1.0;      // e^{-beta dt}
    double var_from_v = 0.0; // alpha^2 e^{-beta dt} (1 - e^{-beta dt}) / beta
    double var_const = 0.0;  // theta alpha^2 (1 - e^{-beta dt})^2 / (2 beta)

    CirStep() = default;
    CirStep(double theta_star, double beta, double alpha, double dt) : theta(theta_star) {
        decay = std::exp(-beta * dt);
        const double one_minus = -std::expm1(-beta * dt);
        var_from_v = alpha * alpha * decay * one_minus / beta;
        var_const = theta_star * alpha * alpha * one_minus * one_minus / (2.0 * beta);
    }

    [[nodiscard]] QeMoments moments(double v) const {
        QeMoments m;
        m.mean = theta + (v - theta) * decay;
        m.variance = v * var_from_v + var_const;
        m.psi = m.mean > 0.0 ? m.variance / (m.mean * m.mean) : 0.0;
        return m;
    }
};

// Branch data of a QE draw, enough to sample and to evaluate E[exp(A v')].
struct QeBranch {
    bool quadratic = true;
    double a = 0.0;       // quadratic: v' = a (b + z)^2
    double b = 0.0;
    double p = 0.0;       // exponential: P(v' = 0)
    double rate = 0.0;    // exponential: rate of the continuous part
    bool degenerate = false;
    double mean = 0.0;
};

QeBranch qe_branch(const QeMoments& m, double psi_threshold) {
    QeBranch br;
    br.mean = m.mean;
    if (!(m.mean > 0.0) || !(m.variance > 0.0)) {
        br.degenerate = true;
        return br;
    }
    if (m.psi <= psi_threshold) {
        const double inv = 2.0 / m.psi;
        const double b2 = inv - 1.0 + std::sqrt(inv) * std::sqrt(inv - 1.0);
        br.quadratic = true;
        br.b = std::sqrt(b2);
        br.a = m.mean / (1.0 + b2);
    } else {
        br.quadratic = false;
        br.p = (m.psi - 1.0) / (m.psi + 1.0);
        br.rate = (1.0 - br.p) / m.mean;
    }
    return br;
}

double qe_sample(const QeBranch& br, double z) {
    if (br.degenerate) return std::max(br.mean, 0.0);
    if (br.quadratic) {
        const double x = br.b + z;
        return br.a * x * x;
    }
    // u = Phi(z); 1 - u is taken from the upper tail directly.
    const double tail = upper_tail(z);
    if (1.0 - tail <= br.p) return 0.0;
    return std::log((1.0 - br.p) / tail) / br.rate;
}

// log E[exp(A v')] under the QE distribution, or nullopt where it diverges.
std::optional<double> qe_log_mgf(const QeBranch& br, double A) {
    if (br.degenerate) return A * br.mean;
    if (br.quadratic) {
        const double s = 1.0 - 2.0 * A * br.a;
        if (!(s > 0.0)) return std::nullopt;
        return A * br.b * br.b * br.a / s - 0.5 * std::log(s);
    }
    if (!(A < br.rate)) return std::nullopt;
    return std::log(br.p + br.rate * (1.0 - br.p) / (br.rate - A));
}

// Per-model step data for a fixed dt.
class ModelStepper {
public:
    ModelStepper(const ModelParams& p, double dt, const McConfig& cfg)
        : dt_(dt), drift_((p.r - p.q) * dt), psi_threshold_(cfg.psi_threshold),
          correct_(cfg.martingale_correction), stochastic_(p.alpha > kDeterministicAlpha) {
        const double rho[2] = {p.rho_plus(), p.rho_minus()};
        const double theta[2] = {p.theta_plus, p.theta_minus};
        for (int j = 0; j < 2; ++j) {
            cir_[j] = CirStep(theta[j], p.beta, p.alpha, dt);
            if (!stochastic_) continue;
            const double g = 0.5 * dt;
            const double rb = rho[j] * p.beta / p.alpha;
            k0_[j] = -rho[j] * p.beta * theta[j] * dt / p.alpha;
            k1_[j] = g * (rb - 0.5) - rho[j] / p.alpha;
            k2_[j] = g * (rb - 0.5) + rho[j] / p.alpha;
            k3_[j] = g * (1.0 - rho[j] * rho[j]);
            k4_[j] = k3_[j];
        }
    }

    // Advances s in place; returns the trapezoid integral of total variance.
    double step(PathState& s, double z_plus, double z_minus, double z_spot) const {
        const double v[2] = {s.v_plus, s.v_minus};
        const double z[2] = {z_plus, z_minus};
        double v_next[2];
        QeBranch br[2];
        for (int j = 0; j < 2; ++j) {
            br[j] = qe_branch(cir_[j].moments(v[j]), psi_threshold_);
            v_next[j] = std::max(0.0, qe_sample(br[j], z[j]));
        }

        const double integrated = 0.5 * dt_ * (v[0] + v[1] + v_next[0] + v_next[1]);
        double dlog = drift_;
        if (stochastic_) {
            double k0 = k0_[0] + k0_[1];
            if (correct_) {
                double corrected = 0.0;
                bool ok = true;
                for (int j = 0; j < 2 && ok; ++j) {
                    const auto mgf = qe_log_mgf(br[j], k2_[j] + 0.5 * k4_[j]);
                    ok = mgf.has_value();
                    if (ok) corrected -= *mgf + (k1_[j] + 0.5 * k3_[j]) * v[j];
                }
                if (ok) k0 = corrected;
            }
            double var = 0.0;
            dlog += k0;
            for (int j = 0; j < 2; ++j) {
                dlog += k1_[j] * v[j] + k2_[j] * v_next[j];
                var += k3_[j] * v[j] + k4_[j] * v_next[j];
            }
            dlog += std::sqrt(std::max(var, 0.0)) * z_spot;
        } else {
            dlog += -0.5 * integrated + std::sqrt(integrated) * z_spot;
        }

        s.log_spot += dlog;
        s.sum_sq_returns += dlog * dlog;
        s.v_plus = v_next[0];
        s.v_minus = v_next[1];
        return integrated;
    }

private:
    double dt_;
    double drift_;
    double psi_threshold_;
    bool correct_;
    bool stochastic_;
    CirStep cir_[2];
    double k0_[2] = {0.0, 0.0};
    double k1_[2] = {0.0, 0.0};
    double k2_[2] = {0.0, 0.0};
    double k3_[2] = {0.0, 0.0};
    double k4_[2] = {0.0, 0.0};
};

}  // namespace

void McConfig::validate() const {
    if (paths < 1000) throw ValidationError("paths must be at least 1000");
    if (steps_per_year < 50) throw ValidationError("steps_per_year must be at least 50");
    if (!(psi_threshold >= 1.0 && psi_threshold <= 2.0)) {
        throw ValidationError("psi_threshold must lie in [1, 2]");
    }
    if (!(feller_refine_threshold > 0.0)) {
        throw ValidationError("feller_refine_threshold must be positive");
    }
}

QeMoments cir_step_moments(double v, double theta_star, double beta, double alpha, double dt) {
    return CirStep(theta_star, beta, alpha, dt).moments(v);
}

double qe_variance_step_normal(double v, double theta_star, double beta, double alpha, double dt,
                               double z, double psi_threshold) {
    if (!(v >= 0.0) || !(dt > 0.0)) throw ValidationError("QE step needs v >= 0 and dt > 0");
    const QeBranch br = qe_branch(cir_step_moments(v, theta_star, beta, alpha, dt), psi_threshold);
    return std::max(0.0, qe_sample(br, z));
}

double qe_variance_step(double v, double theta_star, double beta, double alpha, double dt,
                        double uniform_draw, double psi_threshold) {
    if (!(uniform_draw > 0.0 && uniform_draw < 1.0)) {
        throw ValidationError("uniform draw must lie in (0, 1)");
    }
    if (!(v >= 0.0) || !(dt > 0.0)) throw ValidationError("QE step needs v >= 0 and dt > 0");
    const QeBranch br = qe_branch(cir_step_moments(v, theta_star, beta, alpha, dt), psi_threshold);
    if (br.degenerate) return std::max(br.mean, 0.0);
    if (br.quadratic) {
        const double b = br.b + norm_inv(uniform_draw);
        return br.a * b * b;
    }
    if (uniform_draw <= br.p) return 0.0;
    return std::log((1.0 - br.p) / (1.0 - uniform_draw)) / br.rate;
}

double bridge_crossing_prob(double log_s0, double log_s1, double log_barrier,
                            double effective_variance) {
    const double a = log_barrier - log_s0;
    const double b = log_barrier - log_s1;
    if (a * b <= 0.0) return 1.0;
    if (!(effective_variance > 0.0)) return 0.0;
    return std::exp(-2.0 * a * b / effective_variance);
}

std::size_t effective_steps(const ModelParams& params, const McConfig& cfg, double horizon) {
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    const auto base = static_cast<std::size_t>(
        std::max(1.0, std::ceil(static_cast<double>(cfg.steps_per_year) * horizon - 1e-9)));
    const double ratio = params.theta() > 0.0 ? feller_ratio(params) : 0.0;
    const double mult = std::max(1.0, std::ceil(ratio / cfg.feller_refine_threshold - 1e-12));
    return base * static_cast<std::size_t>(mult);
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CORRHESTON_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SimulationInfo evolve_paths(std::span<const ModelParams> models, double spot, double horizon,
                            const McConfig& cfg, std::span<PathObserver* const> observers,
                            std::size_t steps, const KnockLevels& knock) {
    cfg.validate();
    if (models.empty()) throw ValidationError("at least one model is required");
    if (!(spot > 0.0)) throw ValidationError("spot must be positive");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    for (const ModelParams& p : models) p.validate();

    if (steps == 0) {
        for (const ModelParams& p : models) steps = std::max(steps, effective_steps(p, cfg, horizon));
    }
    const double dt = horizon / static_cast<double>(steps);
    const std::size_t n_models = models.size();

    std::vector<ModelStepper> steppers;
    steppers.reserve(n_models);
    for (const ModelParams& p : models) steppers.emplace_back(p, dt, cfg);

    const double log_spot0 = std::log(spot);
    const std::optional<double> log_lower =
        knock.lower ? std::optional<double>(std::log(*knock.lower)) : std::nullopt;
    const std::optional<double> log_upper =
        knock.upper ? std::optional<double>(std::log(*knock.upper)) : std::nullopt;

    const std::size_t n_blocks = (cfg.paths + kBlockPaths - 1) / kBlockPaths;
    std::vector<std::vector<std::unique_ptr<PathObserver>>> block_obs(n_blocks);

    auto run_block = [&](std::size_t block) {
        std::vector<std::unique_ptr<PathObserver>> local;
        local.reserve(observers.size());
        for (PathObserver* o : observers) local.push_back(o->clone_empty());

        std::vector<PathState> state(n_models);
        std::vector<PathState> before(n_models);
        std::vector<double> step_var(n_models);

        const std::size_t first = block * kBlockPaths;
        const std::size_t last = std::min(cfg.paths, first + kBlockPaths);
        for (std::size_t path = first; path < last; ++path) {
            std::mt19937_64 rng(path_seed(cfg.seed, path));
            boost::random::normal_distribution<double> normal;
            for (std::size_t m = 0; m < n_models; ++m) {
                state[m] = PathState{log_spot0, models[m].v0_plus, models[m].v0_minus, true, 0.0};
            }
            for (auto& o : local) o->begin_path(path, state);

            for (std::size_t k = 0; k < steps; ++k) {
                const double z_plus = normal(rng);
                const double z_minus = normal(rng);
                const double z_spot = normal(rng);
                before = state;
                for (std::size_t m = 0; m < n_models; ++m) {
                    step_var[m] = steppers[m].step(state[m], z_plus, z_minus, z_spot);
                    PathState& s = state[m];
                    if ((log_lower && s.log_spot <= *log_lower) ||
                        (log_upper && s.log_spot >= *log_upper)) {
                        s.alive = false;
                    }
                }
                const StepContext ctx{k, static_cast<double>(k) * dt,
                                      static_cast<double>(k + 1) * dt};
                for (auto& o : local) o->on_step(ctx, before, state, step_var);
            }
            for (const PathState& s : state) {
                if (!std::isfinite(s.log_spot)) {
                    throw EngineError("non-finite log spot in path " + std::to_string(path));
                }
            }
            for (auto& o : local) o->end_path(state);
        }
        block_obs[block] = std::move(local);
    };

    const unsigned n_threads =
        std::min<unsigned>(resolve_thread_count(cfg.threads), static_cast<unsigned>(n_blocks));
    if (n_threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t b = next++; b < n_blocks; b = next++) {
                    try {
                        run_block(b);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n_blocks;
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (std::size_t b = 0; b < n_blocks; ++b) {
        for (std::size_t i = 0; i < observers.size(); ++i) observers[i]->merge(*block_obs[b][i]);
    }
    return {cfg.paths, steps, dt, n_models};
}

SimulationInfo evolve_paths(const ModelParams& params, double spot, double horizon,
                            const McConfig& cfg, std::span<PathObserver* const> observers,
                            std::size_t steps, const KnockLevels& knock) {
    return evolve_paths(std::span<const ModelParams>(&params, 1), spot, horizon, cfg, observers,
                        steps, knock);
}

MomentAccumulator::MomentAccumulator(std::size_t dim)
    : dim_(dim), sum_(dim, 0.0), cross_(dim * dim, 0.0) {}

void MomentAccumulator::add(std::span<const double> x) {
    if (x.size() != dim_) throw ValidationError("sample dimension mismatch");
    ++count_;
    for (std::size_t i = 0; i < dim_; ++i) {
        sum_[i] += x[i];
        double* row = cross_.data() + i * dim_;
        for (std::size_t j = i; j < dim_; ++j) row[j] += x[i] * x[j];
    }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.count_ == 0) return;
    if (dim_ == 0 && count_ == 0) {
        *this = other;
        return;
    }
    if (other.dim_ != dim_) throw ValidationError("accumulator dimension mismatch");
    count_ += other.count_;
    for (std::size_t i = 0; i < dim_; ++i) sum_[i] += other.sum_[i];
    for (std::size_t i = 0; i < cross_.size(); ++i) cross_[i] += other.cross_[i];
}

double MomentAccumulator::mean(std::size_t i) const {
    if (count_ == 0) throw DomainError("no samples");
    return sum_.at(i) / static_cast<double>(count_);
}

double MomentAccumulator::covariance(std::size_t i, std::size_t j) const {
    if (count_ < 2) throw DomainError("covariance needs two samples");
    if (i > j) std::swap(i, j);
    const double n = static_cast<double>(count_);
    const double cross = cross_.at(i * dim_ + j);
    return (cross - sum_[i] * sum_[j] / n) / (n - 1.0);
}

MomentAccumulator::Estimate MomentAccumulator::linear_combination(
    std::span<const double> weights) const {
    if (weights.size() != dim_) throw ValidationError("weight dimension mismatch");
    Estimate e;
    double var = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (weights[i] == 0.0) continue;
        e.mean += weights[i] * mean(i);
        for (std::size_t j = 0; j < dim_; ++j) {
            if (weights[j] == 0.0) continue;
            var += weights[i] * weights[j] * covariance(i, j);
        }
    }
    e.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(count_));
    return e;
}

std::unique_ptr<PathObserver> TerminalStateCollector::clone_empty() const {
    return std::make_unique<TerminalStateCollector>(models_);
}

void TerminalStateCollector::end_path(std::span<const PathState> terminal) {
    states_.insert(states_.end(), terminal.begin(), terminal.end());
}

void TerminalStateCollector::merge(const PathObserver& other) {
    const auto& o = dynamic_cast<const TerminalStateCollector&>(other);
    states_.insert(states_.end(), o.states_.begin(), o.states_.end());
}

}  // namespace corrheston
