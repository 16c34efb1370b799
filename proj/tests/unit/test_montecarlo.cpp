#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <corrheston/black_scholes.hpp>
#include <corrheston/errors.hpp>
#include <corrheston/montecarlo.hpp>

using namespace corrheston;

namespace {

McConfig small_config(std::size_t paths = 4000) {
    McConfig cfg;
    cfg.paths = paths;
    cfg.steps_per_year = 100;
    cfg.seed = 99;
    return cfg;
}

std::vector<PathState> terminal_states(std::span<const ModelParams> models, const McConfig& cfg,
                                       double horizon) {
    TerminalStateCollector col(models.size());
    PathObserver* list[] = {&col};
    evolve_paths(models, 1.0, horizon, cfg, list);
    return col.states();
}

}  // namespace

TEST(QuadraticExponential, MatchesCirMoments) {
    // Both branches: small psi (quadratic) and large psi (exponential).
    for (double v : {0.01, 0.0005}) {
        const QeMoments m = cir_step_moments(v, 0.005, 2.0, 0.3, 0.05);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int n = 400'000;
        double s1 = 0.0;
        double s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = qe_variance_step(v, 0.005, 2.0, 0.3, 0.05, u(rng));
            ASSERT_GE(x, 0.0);
            s1 += x;
            s2 += x * x;
        }
        const double mean = s1 / n;
        const double var = s2 / n - mean * mean;
        EXPECT_NEAR(mean / m.mean, 1.0, 4.0 * std::sqrt(m.variance / n) / m.mean) << "v " << v;
        EXPECT_NEAR(var / m.variance, 1.0, 0.02) << "psi " << m.psi;
    }
}

TEST(QuadraticExponential, NormalAndUniformDriversAgree) {
    for (double z : {-2.0, -0.3, 0.0, 0.8, 2.5}) {
        const double a = qe_variance_step_normal(0.004, 0.005, 2.0, 0.3, 0.01, z);
        const double b = qe_variance_step(0.004, 0.005, 2.0, 0.3, 0.01, norm_cdf(z));
        EXPECT_NEAR(a, b, 1e-12 * (1.0 + b));
    }
}

TEST(MonteCarlo, ZeroVolOfVolIsDeterministic) {
    const ModelParams p = to_raw({0.01, 0.2, 0.2, 0.02, 2.0, 0.0, 0.3, 0.0, 0.0}, 0.0);
    const ModelParams models[] = {p};
    const auto states = terminal_states(models, small_config(2000), 0.5);
    const double expect = p.theta() + (p.v0() - p.theta()) * std::exp(-p.beta * 0.5);
    for (const PathState& s : states) {
        EXPECT_NEAR(s.v_plus + s.v_minus, expect, 1e-6);
    }
}

TEST(MonteCarlo, VarianceStaysNonNegative) {
    // Feller ratio 8: heavy use of the exponential branch.
    const ModelParams p = symmetric_params(0.01, 0.4, 0.5, -0.2, 0.5);
    const ModelParams models[] = {p};
    for (const PathState& s : terminal_states(models, small_config(), 1.0)) {
        EXPECT_GE(s.v_plus, 0.0);
        EXPECT_GE(s.v_minus, 0.0);
        EXPECT_TRUE(std::isfinite(s.log_spot));
    }
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
    const ModelParams models[] = {symmetric_params(0.01, 0.3, 2.0, 0.0, 0.0),
                                  symmetric_params(0.01, 0.3, 2.0, 0.1, 0.4)};
    McConfig cfg = small_config(5000);
    std::vector<PathState> ref;
    for (unsigned threads : {1u, 2u, 5u}) {
        cfg.threads = threads;
        const auto states = terminal_states(models, cfg, 0.25);
        if (ref.empty()) {
            ref = states;
            continue;
        }
        ASSERT_EQ(states.size(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ASSERT_EQ(states[i].log_spot, ref[i].log_spot) << "path " << i;
            ASSERT_EQ(states[i].v_plus, ref[i].v_plus);
            ASSERT_EQ(states[i].v_minus, ref[i].v_minus);
            ASSERT_EQ(states[i].sum_sq_returns, ref[i].sum_sq_returns);
        }
    }
}

TEST(MonteCarlo, SeedChangesPaths) {
    const ModelParams models[] = {symmetric_params(0.01, 0.3, 2.0, 0.0, 0.2)};
    McConfig a = small_config(1000);
    McConfig b = a;
    b.seed = a.seed + 1;
    EXPECT_NE(terminal_states(models, a, 0.1)[0].log_spot, terminal_states(models, b, 0.1)[0].log_spot);
}

TEST(MonteCarlo, CommonRandomNumbersAcrossModels) {
    // Identical models in one batch see identical paths.
    const ModelParams p = symmetric_params(0.01, 0.3, 2.0, 0.1, 0.3);
    const ModelParams models[] = {p, p};
    const auto states = terminal_states(models, small_config(1000), 0.25);
    for (std::size_t i = 0; i < states.size(); i += 2) {
        EXPECT_EQ(states[i].log_spot, states[i + 1].log_spot);
    }
}

TEST(MonteCarlo, EffectiveStepsRefinesForFellerViolation) {
    McConfig cfg;
    cfg.steps_per_year = 252;
    const ModelParams calm = symmetric_params(0.04, 0.3, 2.0, 0.0, 0.0);  // ratio 0.56
    const ModelParams wild = symmetric_params(0.004, 0.6, 1.0, 0.0, 0.0); // ratio 45
    EXPECT_EQ(effective_steps(calm, cfg, 1.0), 252u);
    EXPECT_GT(effective_steps(wild, cfg, 1.0), 252u);
    EXPECT_GE(effective_steps(calm, cfg, 0.01), 1u);
}

TEST(MonteCarlo, ConfigValidation) {
    McConfig cfg;
    cfg.paths = 10;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = McConfig{};
    cfg.psi_threshold = 2.5;
    EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(BrownianBridge, CrossingProbabilityMatchesSimulation) {
    // Driftless Brownian motion over [0, 1] with variance 0.04, from 0 to 0.05,
    // barrier at -0.1: P(min < -0.1 | endpoints) = exp(-2 * 0.1 * 0.15 / 0.04).
    const double exact = bridge_crossing_prob(0.0, 0.05, -0.1, 0.04);
    EXPECT_NEAR(exact, std::exp(-2.0 * 0.1 * 0.15 / 0.04), 1e-15);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    const int n = 20'000;
    const int m = 2000;
    const double sd = std::sqrt(0.04 / m);
    int hits = 0;
    std::vector<double> w(m + 1);
    for (int i = 0; i < n; ++i) {
        w[0] = 0.0;
        for (int k = 1; k <= m; ++k) w[k] = w[k - 1] + sd * z(rng);
        // Pin the path to the target endpoint.
        const double shift = 0.05 - w[m];
        bool hit = false;
        for (int k = 1; k <= m && !hit; ++k) hit = w[k] + shift * k / m < -0.1;
        hits += hit;
    }
    const double freq = static_cast<double>(hits) / n;
    // Discrete monitoring misses a little; allow for it plus 4 SE.
    EXPECT_NEAR(freq, exact, 0.02);
    EXPECT_LE(freq, exact + 4.0 * std::sqrt(exact * (1.0 - exact) / n));
}

TEST(BrownianBridge, EdgeCases) {
    EXPECT_EQ(bridge_crossing_prob(0.0, -0.2, -0.1, 0.04), 1.0);
    EXPECT_EQ(bridge_crossing_prob(0.0, 0.1, -0.1, 0.0), 0.0);
    EXPECT_NEAR(bridge_crossing_prob(0.0, 0.1, 0.2, 0.04), std::exp(-2.0 * 0.2 * 0.1 / 0.04), 1e-15);
}

TEST(MomentAccumulator, LinearCombinationAndMerge) {
    MomentAccumulator a(2);
    MomentAccumulator b(2);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    std::vector<double> xs, ys;
    for (int i = 0; i < 1000; ++i) {
        const double x = z(rng);
        const double y = 0.5 * x + z(rng);
        const double row[] = {x, y};
        (i % 3 == 0 ? a : b).add(row);
        xs.push_back(x);
        ys.push_back(y);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), 1000u);
    double md = 0.0;
    for (int i = 0; i < 1000; ++i) md += ys[i] - xs[i];
    md /= 1000.0;
    double vd = 0.0;
    for (int i = 0; i < 1000; ++i) vd += std::pow(ys[i] - xs[i] - md, 2);
    vd /= 999.0;
    const double w[] = {-1.0, 1.0};
    const auto e = a.linear_combination(w);
    EXPECT_NEAR(e.mean, md, 1e-12);
    EXPECT_NEAR(e.std_error / std::sqrt(vd / 1000.0), 1.0, 1e-3);
}
