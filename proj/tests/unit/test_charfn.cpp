#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <corrheston/charfn.hpp>

#include "riccati_ode.hpp"

using namespace corrheston;

namespace {

ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.beta = 0.5 + 4.5 * u(rng);
    p.alpha = 0.1 + 1.4 * u(rng);
    p.theta_plus = 0.002 + 0.05 * u(rng);
    p.theta_minus = 0.002 + 0.05 * u(rng);
    p.eta = 0.45 * u(rng);
    p.rho_bar = (1.0 - p.eta - 0.05) * (2.0 * u(rng) - 1.0);
    p.v0_plus = 0.002 + 0.05 * u(rng);
    p.v0_minus = 0.002 + 0.05 * u(rng);
    p.r = 0.05 * u(rng);
    p.q = 0.05 * u(rng);
    return p;
}

}  // namespace

TEST(CharFn, MatchesRiccatiOde) {
    std::mt19937_64 rng(3);
    for (int set = 0; set < 5; ++set) {
        const ModelParams p = random_params(rng);
        for (double tau : {0.02, 0.5, 3.0}) {
            for (double xi : {-60.0, -3.0, -0.5, 0.0, 0.7, 4.0, 25.0, 120.0}) {
                const RiccatiSolution cf = riccati_closed_form(xi, tau, p);
                const oracle::RiccatiValues ode = oracle::riccati_ode(xi, tau, p);
                EXPECT_LT(std::abs(cf.a - ode.a), 1e-9) << "xi " << xi << " tau " << tau;
                EXPECT_LT(std::abs(cf.b_plus - ode.b_plus), 1e-9);
                EXPECT_LT(std::abs(cf.b_minus - ode.b_minus), 1e-9);
            }
        }
    }
}

TEST(CharFn, UnitAtZero) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = random_params(rng);
        EXPECT_EQ(char_fn(0.0, 0.7, 1.3, p), Complex(1.0, 0.0));
    }
}

TEST(CharFn, ForwardIsMartingale) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = random_params(rng);
        for (double tau : {0.1, 1.0, 10.0}) {
            const Complex m = char_fn(Complex(0.0, -1.0), tau, 100.0, p);
            const double fwd = 100.0 * std::exp((p.r - p.q) * tau);
            EXPECT_NEAR(m.real() / fwd, 1.0, 1e-12);
            EXPECT_NEAR(m.imag() / fwd, 0.0, 1e-12);
        }
    }
}

TEST(CharFn, HermitianSymmetry) {
    std::mt19937_64 rng(13);
    const ModelParams p = random_params(rng);
    for (double xi : {0.1, 2.0, 33.0, 400.0}) {
        const Complex a = char_fn(xi, 1.0, 1.0, p);
        const Complex b = char_fn(-xi, 1.0, 1.0, p);
        EXPECT_NEAR(std::abs(b - std::conj(a)), 0.0, 1e-14);
    }
}

TEST(CharFn, BoundedOnRealLine) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 10; ++i) {
        const ModelParams p = random_params(rng);
        for (double xi = -500.0; xi <= 500.0; xi += 7.3) {
            EXPECT_LE(std::abs(log_return_char_fn(xi, 2.0, p)), 1.0 + 1e-12);
        }
    }
}

TEST(CharFn, LongMaturityStaysFinite) {
    ModelParams p;
    p.alpha = 1.2;
    p.eta = 0.3;
    p.rho_bar = -0.5;
    for (double xi : {0.5, 10.0, 200.0}) {
        const Complex v = log_return_char_fn(xi, 50.0, p);
        EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
    }
}

TEST(CharFn, ZeroEtaSplitIsIrrelevant) {
    // With eta = 0 only the total variance matters.
    ModelParams a = ModelParams{};
    a.rho_bar = -0.4;
    ModelParams b = a;
    b.v0_plus = 0.009;
    b.v0_minus = 0.001;
    b.theta_plus = 0.002;
    b.theta_minus = 0.008;
    for (double xi : {0.3, 5.0, 40.0}) {
        EXPECT_NEAR(std::abs(log_return_char_fn(xi, 1.0, a) - log_return_char_fn(xi, 1.0, b)), 0.0,
                    1e-14);
    }
}
