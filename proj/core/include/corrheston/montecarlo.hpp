#pragma once

// Path simulation of (ln S, v+, v-).
//
// Each sub-variance is advanced with Andersen's quadratic-exponential (QE)
// scheme from its own normal draw. The log-spot increment uses the
// three-factor decomposition
//
//   d ln S = (r - q - v/2) dt + rho+ sqrt(v+) dW+ + rho- sqrt(v-) dW-
//            + sqrt((1 - rho+^2) v+ + (1 - rho-^2) v-) dW0
//
// where each integral of sqrt(v_j) dW_j is recovered from the realised
// sub-variance move, (v_j' - v_j - beta theta_j dt + beta I_j) / alpha, and
// the time integrals I_j of v_j use the trapezoid rule. This is Andersen's
// central discretisation applied per factor.
//
// Draws are keyed by (seed, path index): every path consumes exactly three
// normals per step (z+, z-, z0) whatever branch QE takes, so several models
// evolved together share common random numbers path by path, and results do
// not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "corrheston/model.hpp"

namespace corrheston {

struct McConfig {
    std::size_t paths = 100'000;
    std::size_t steps_per_year = 252;
    std::uint64_t seed = 20'240'601;
    bool bridge_enabled = true;
    /// Steps are multiplied by ceil(feller_ratio / threshold) when the ratio exceeds it.
    double feller_refine_threshold = 1.0;
    /// QE switches to the exponential branch above this psi.
    double psi_threshold = 1.5;
    /// Adjust the log-spot drift so E[S_{t+dt} | state] is exact under QE.
    bool martingale_correction = false;
    /// Worker threads; 0 reads CORRHESTON_THREADS, else hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

struct PathState {
    double log_spot = 0.0;
    double v_plus = 0.0;
    double v_minus = 0.0;
    /// Cleared once a knock level (see KnockLevels) is crossed at a step end.
    bool alive = true;
    /// Sum of squared per-step log returns.
    double sum_sq_returns = 0.0;
};

/// Optional discretely monitored levels that clear PathState::alive.
struct KnockLevels {
    std::optional<double> lower;
    std::optional<double> upper;
};

/// Conditional moments of a CIR variance over one step and the QE branch data.
struct QeMoments {
    double mean = 0.0;
    double variance = 0.0;
    double psi = 0.0;
};

[[nodiscard]] QeMoments cir_step_moments(double v, double theta_star, double beta, double alpha,
                                         double dt);

/// One QE step from a uniform draw in (0, 1). Always returns a value >= 0.
/// alpha = 0 returns the deterministic mean exactly.
[[nodiscard]] double qe_variance_step(double v, double theta_star, double beta, double alpha,
                                      double dt, double uniform_draw, double psi_threshold = 1.5);

/// Same step driven by a standard normal: the quadratic branch uses z
/// directly, the exponential branch uses Phi(z).
[[nodiscard]] double qe_variance_step_normal(double v, double theta_star, double beta,
                                             double alpha, double dt, double z,
                                             double psi_threshold = 1.5);

/// Probability that a Brownian bridge in log space between log_s0 and log_s1
/// with total variance effective_variance touches log_barrier. Returns 1 when
/// the barrier lies between (or on) the endpoints.
[[nodiscard]] double bridge_crossing_prob(double log_s0, double log_s1, double log_barrier,
                                          double effective_variance);

/// Base steps ceil(steps_per_year * horizon) times
/// max(1, ceil(feller_ratio / feller_refine_threshold)).
[[nodiscard]] std::size_t effective_steps(const ModelParams& params, const McConfig& cfg,
                                          double horizon);

struct StepContext {
    std::size_t step = 0;  // 0-based index of the step just taken
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Receives every path of a simulation. The engine clones an empty observer
/// per block of paths and merges blocks back in path order, so merge() must be
/// associative for results to be deterministic.
class PathObserver {
public:
    virtual ~PathObserver() = default;

    [[nodiscard]] virtual std::unique_ptr<PathObserver> clone_empty() const = 0;

    virtual void begin_path(std::size_t path_index, std::span<const PathState> initial) {
        (void)path_index;
        (void)initial;
    }

    /// before/after hold one state per model; step_variance holds the
    /// trapezoid integral of total variance over the step, per model.
    virtual void on_step(const StepContext& ctx, std::span<const PathState> before,
                         std::span<const PathState> after, std::span<const double> step_variance) {
        (void)ctx;
        (void)before;
        (void)after;
        (void)step_variance;
    }

    virtual void end_path(std::span<const PathState> terminal) = 0;

    virtual void merge(const PathObserver& other) = 0;
};

struct SimulationInfo {
    std::size_t paths = 0;
    std::size_t steps = 0;
    double dt = 0.0;
    std::size_t models = 0;
};

/// Evolves all models on the same random draws. steps = 0 selects the max of
/// effective_steps over the models.
SimulationInfo evolve_paths(std::span<const ModelParams> models, double spot, double horizon,
                            const McConfig& cfg, std::span<PathObserver* const> observers,
                            std::size_t steps = 0, const KnockLevels& knock = {});

/// Single-model convenience overload.
SimulationInfo evolve_paths(const ModelParams& params, double spot, double horizon,
                            const McConfig& cfg, std::span<PathObserver* const> observers,
                            std::size_t steps = 0, const KnockLevels& knock = {});

/// Thread count after resolving McConfig::threads and CORRHESTON_THREADS.
[[nodiscard]] unsigned resolve_thread_count(unsigned requested);

/// Running sums and cross products of fixed-length sample vectors.
class MomentAccumulator {
public:
    MomentAccumulator() = default;
    explicit MomentAccumulator(std::size_t dim);

    void add(std::span<const double> x);
    void merge(const MomentAccumulator& other);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t count() const noexcept { return count_; }
    [[nodiscard]] double mean(std::size_t i) const;
    /// Sample covariance (n - 1 denominator).
    [[nodiscard]] double covariance(std::size_t i, std::size_t j) const;

    struct Estimate {
        double mean = 0.0;
        double std_error = 0.0;
    };

    /// Mean and standard error of sum_i w_i x_i.
    [[nodiscard]] Estimate linear_combination(std::span<const double> weights) const;

private:
    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    std::vector<double> sum_;
    std::vector<double> cross_;  // dim x dim, row major
};

/// Collects terminal states of every path (memory grows with paths x models).
class TerminalStateCollector : public PathObserver {
public:
    explicit TerminalStateCollector(std::size_t models) : models_(models) {}

    [[nodiscard]] std::unique_ptr<PathObserver> clone_empty() const override;
    void end_path(std::span<const PathState> terminal) override;
    void merge(const PathObserver& other) override;

    /// states()[path * models + model]
    [[nodiscard]] const std::vector<PathState>& states() const noexcept { return states_; }

private:
    std::size_t models_;
    std::vector<PathState> states_;
};

}  // namespace corrheston
