#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmvlab/closed_form.hpp"
#include "oracle_values.hpp"
#include "random_configs.hpp"

namespace mmv {
namespace {

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

ModelConfig piecewise_config() {
    ModelConfig cfg = baseline_config();
    cfg.horizon = 2.0;
    cfg.x0 = 5.0;
    cfg.theta = 0.5;
    cfg.market.r = Schedule::piecewise({0.0, 1.0}, {0.03, 0.05});
    cfg.market.mu = Schedule::piecewise({0.0, 0.5, 1.5}, {0.09, 0.12, 0.1});
    cfg.market.sigma = Schedule::constant(0.25);
    cfg.insurance = {0.2, 0.3};
    cfg.claims = ClaimModel(3.0, DiscreteSize{{0.5, 2.0}, {0.75, 0.25}});
    return cfg;
}

TEST(OdeCoefficients, TerminalConditions) {
    const auto cfg = baseline_config();
    const auto c = ode_coefficients(cfg, cfg.horizon);
    EXPECT_EQ(c.lambda_t, 1.0);
    EXPECT_EQ(c.theta_t, 1.0 / (2.0 * cfg.theta));
    EXPECT_EQ(c.psi_t, 0.0);
}

TEST(OdeCoefficients, BaselineAtZero) {
    const auto c = ode_coefficients(baseline_config(), 0.0);
    EXPECT_NEAR(c.lambda_t, oracle::baseline::lambda_0, 1e-14);
    EXPECT_NEAR(c.theta_t, oracle::baseline::theta_0, 1e-14);
    EXPECT_NEAR(c.psi_t, oracle::baseline::psi_0, 1e-14);
}

TEST(OdeCoefficients, EqualLoadingsKillPsi) {
    auto cfg = baseline_config();
    cfg.insurance.kappa = cfg.insurance.kappa_r;
    for (double t : {0.0, 1.0, 2.5}) EXPECT_EQ(ode_coefficients(cfg, t).psi_t, 0.0);
}

TEST(OdeCoefficients, PiecewiseOracle) {
    const auto c = ode_coefficients(piecewise_config(), 0.0);
    EXPECT_NEAR(c.lambda_t, oracle::piecewise::lambda_0, 1e-13);
    EXPECT_NEAR(c.theta_t, oracle::piecewise::theta_0, 1e-13);
    EXPECT_NEAR(c.psi_t, oracle::piecewise::psi_0, 1e-11);
}

// Central differences of the coefficients satisfy the linear ODEs to O(h^2).
TEST(OdeCoefficients, FiniteDifferenceResidual) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        const ModelConfig cfg = testing::random_config(rng, false);
        const double r = cfg.market.r(0.0);
        const double rh = rho(cfg, 0.0);
        const double drift = cfg.claims.mu0() * (cfg.insurance.kappa - cfg.insurance.kappa_r);
        const double t = 0.4 * cfg.horizon;
        double previous = 0.0;
        for (double h : {1e-2, 5e-3}) {
            const auto lo = ode_coefficients(cfg, t - h), mid = ode_coefficients(cfg, t), hi = ode_coefficients(cfg, t + h);
            const double d_lambda = (hi.lambda_t - lo.lambda_t) / (2 * h);
            const double d_theta = (hi.theta_t - lo.theta_t) / (2 * h);
            const double d_psi = (hi.psi_t - lo.psi_t) / (2 * h);
            const double residual = std::abs(d_lambda + r * mid.lambda_t) / mid.lambda_t +
                                    std::abs(d_theta + rh * mid.theta_t) / mid.theta_t +
                                    std::abs(d_psi + drift * mid.lambda_t) / (std::abs(drift) * mid.lambda_t + 1e-300);
            EXPECT_LT(residual, 10.0 * h * h);
            if (previous > 1e-12) EXPECT_LT(residual, previous / 3.0);
            previous = residual;
        }
    }
}

TEST(ValueFunction, Examples) {
    const auto cfg = baseline_config();
    EXPECT_DOUBLE_EQ(value_function(cfg, cfg.horizon, 1.7, 0.6), 1.7 * 0.6 + 0.36 / 4.0);
    EXPECT_EQ(value_function(cfg, 1.0, 3.0, 0.0), 0.0);
    EXPECT_NEAR(value_function(cfg, 0.0, 1.0, 1.0), oracle::baseline::phi_start, 1e-14);
}

TEST(MmvValue, BaselineAndPiecewise) {
    EXPECT_NEAR(mmv_value(baseline_config()), oracle::baseline::mmv_value, 1e-14);
    EXPECT_NEAR(mmv_value(piecewise_config()), oracle::piecewise::mmv_value, 1e-11);
}

TEST(MmvValue, RisklessOnlyMarket) {
    auto cfg = baseline_config();
    cfg.insurance.kappa = cfg.insurance.kappa_r;
    cfg.market.investment = false;
    cfg.claims = ClaimModel(0.0, ExponentialSize{10.0});
    EXPECT_NEAR(mmv_value(cfg), cfg.x0 * std::exp(0.24), 1e-14);
}

TEST(MmvValue, InfiniteRiskAversionLimit) {
    auto cfg = baseline_config();
    cfg.theta = 1e12;
    EXPECT_NEAR(mmv_value(cfg), riskless_wealth(cfg, cfg.horizon), 1e-11);
    EXPECT_NEAR(expected_wealth_optimal(cfg, 1.5), riskless_wealth(cfg, 1.5), 1e-11);
}

TEST(MmvValue, StrictlyDecreasingInTheta) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        ModelConfig cfg = testing::random_config(rng);
        if (!(integral_rho(cfg, 0.0, cfg.horizon) > 0.0)) continue;
        double last = mmv_value(cfg);
        for (double scale : {1.5, 2.0, 4.0}) {
            ModelConfig c = cfg;
            c.theta = cfg.theta * scale;
            const double v = mmv_value(c);
            EXPECT_LT(v, last);
            last = v;
        }
    }
}

TEST(MmvValue, NonPositiveThetaIsADomainError) {
    auto cfg = baseline_config();
    cfg.theta = 0.0;
    EXPECT_THROW(mmv_value(cfg), std::domain_error);
    EXPECT_THROW(saddle_feedback(cfg, 0.0, 1.0, 1.0), std::domain_error);
    EXPECT_THROW(frontier_from_theta(cfg), std::domain_error);
    EXPECT_EQ(zero_strategy_mean(cfg), riskless_wealth(cfg, cfg.horizon));
}

TEST(SaddleFeedback, BaselineValues) {
    const auto cfg = baseline_config();
    const auto s = saddle_feedback(cfg, 0.0, 1.0, 1.0);
    EXPECT_NEAR(s.pi_hat, oracle::baseline::pi_hat, 1e-14);
    EXPECT_NEAR(s.u_hat, oracle::baseline::u_hat, 1e-14);
    EXPECT_DOUBLE_EQ(s.p_hat, -0.35);
    EXPECT_TRUE(s.q_hat.affine());
    EXPECT_DOUBLE_EQ(s.q_hat(2.0), 1.5);
    for (double t : {0.5, 2.9}) EXPECT_DOUBLE_EQ(saddle_feedback(cfg, t, 1.0, 2.0).p_hat, -0.35);
}

TEST(SaddleFeedback, ZeroDensityMeansNoRisk) {
    const auto s = saddle_feedback(baseline_config(), 1.0, 4.0, 0.0);
    EXPECT_EQ(s.pi_hat, 0.0);
    EXPECT_EQ(s.u_hat, 0.0);
    EXPECT_DOUBLE_EQ(s.p_hat, -0.35);
}

TEST(SaddleFeedback, PiecewiseOracle) {
    const auto s = saddle_feedback(piecewise_config(), 0.0, 5.0, 1.0);
    EXPECT_NEAR(s.pi_hat, oracle::piecewise::pi_hat, 1e-13);
    EXPECT_NEAR(s.u_hat, oracle::piecewise::u_hat, 1e-13);
}

TEST(Benchmark, BracketAndEqualityAtStart) {
    const auto cfg = baseline_config();
    EXPECT_NEAR(benchmark_gap(cfg, 0.0, 1.0, {0.0, 1.0, 1.0}), oracle::baseline::bracket, 1e-14);
    const auto b = optimal_strategy_benchmark(cfg, 0.0, 1.0, {0.0, 1.0, 1.0});
    EXPECT_NEAR(b.pi, oracle::baseline::pi_hat, 1e-14);
    EXPECT_NEAR(b.u, oracle::baseline::u_hat, 1e-14);
}

TEST(Benchmark, ZeroGapMeansZeroStrategy) {
    const auto cfg = baseline_config();
    const PathStart start{0.5, 2.0, 1.5};
    const double t = 1.7;
    const double x = 2.0 + benchmark_gap(cfg, t, 2.0, start);
    const auto b = optimal_strategy_benchmark(cfg, t, x, start);
    EXPECT_NEAR(b.pi, 0.0, 1e-14);
    EXPECT_NEAR(b.u, 0.0, 1e-14);
}

TEST(Moments, Examples) {
    const auto cfg = baseline_config();
    EXPECT_EQ(riskless_wealth(cfg, 0.0), cfg.x0);
    EXPECT_NEAR(riskless_wealth(cfg, 3.0), oracle::baseline::riskless, 1e-14);
    EXPECT_NEAR(expected_wealth_optimal(cfg, 0.0), cfg.x0, 1e-15);
    EXPECT_NEAR(expected_wealth_optimal(cfg, 3.0), oracle::baseline::mean, 1e-14);
    EXPECT_EQ(y_second_moment(cfg, 0.0), 1.0);
    EXPECT_NEAR(y_second_moment(cfg, 3.0), oracle::baseline::y_second_moment, 1e-14);

    auto equal = cfg;
    equal.insurance.kappa = equal.insurance.kappa_r;
    EXPECT_NEAR(riskless_wealth(equal, 2.0), std::exp(0.16), 1e-15);

    auto flat = cfg;
    flat.market.investment = false;
    flat.claims = ClaimModel(0.0, ExponentialSize{10.0});
    EXPECT_EQ(y_second_moment(flat, 2.0), 1.0);
}

TEST(Moments, NoInvestmentRisklessWealthIsLinear) {
    auto cfg = baseline_config();
    cfg.market.investment = false;
    cfg.market.r = Schedule::constant(0.0);
    cfg.market.mu = Schedule::constant(0.0);
    cfg.market.sigma = Schedule::constant(0.0);
    ASSERT_TRUE(validate_config(cfg).empty());
    EXPECT_NEAR(riskless_wealth(cfg, 3.0), 1.0 + 0.5 * (0.1 - 0.15) * 3.0, 1e-15);
}

TEST(Frontier, Baseline) {
    const auto cfg = baseline_config();
    const auto f = frontier_from_theta(cfg);
    EXPECT_EQ(f.theta, 2.0);
    EXPECT_NEAR(f.mean, oracle::baseline::mean, 1e-14);
    EXPECT_NEAR(f.variance, oracle::baseline::variance, 1e-14);
    EXPECT_EQ(frontier_variance_for_mean(cfg, oracle::baseline::riskless - 0.1), 0.0);
    EXPECT_EQ(frontier_variance_for_mean(cfg, riskless_wealth(cfg, cfg.horizon)), 0.0);
}

TEST(Frontier, ThetaForTargetMean) {
    const auto cfg = baseline_config();
    const double riskless = riskless_wealth(cfg, cfg.horizon);
    EXPECT_NEAR(theta_for_target_mean(cfg, riskless + std::expm1(oracle::baseline::int_rho)), 1.0, 1e-14);
    EXPECT_NEAR(theta_for_target_mean(cfg, oracle::baseline::mean), 2.0, 1e-12);
    try {
        theta_for_target_mean(cfg, riskless - 0.01);
        FAIL() << "expected the zero-strategy regime";
    } catch (const ZeroStrategyRegime& e) {
        EXPECT_EQ(e.riskless(), riskless);
        EXPECT_EQ(e.target(), riskless - 0.01);
    }
    EXPECT_THROW(theta_for_target_mean(cfg, riskless), ZeroStrategyRegime);
}

TEST(Frontier, ThetaRoundTrip) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        ModelConfig cfg = testing::random_config(rng);
        if (!(integral_rho(cfg, 0.0, cfg.horizon) > 0.0)) continue;
        const auto f = frontier_from_theta(cfg);
        ModelConfig back = cfg;
        back.theta = theta_for_target_mean(cfg, f.mean);
        EXPECT_NEAR(frontier_from_theta(back).mean, f.mean, 1e-9 * std::abs(f.mean));
    }
}

TEST(Annuity, MatchesQuadratureForPiecewiseRates) {
    const auto cfg = piecewise_config();
    const double exact = std::expm1(0.03) / 0.03 * std::exp(0.05) + std::expm1(0.05) / 0.05;
    EXPECT_NEAR(compounded_annuity(cfg, 0.0, 2.0), exact, 1e-11);
    EXPECT_EQ(compounded_annuity(cfg, 1.0, 1.0), 0.0);
}

// The four identities, each within 1e-9 relative, on random valid configs.
TEST(Identities, HoldOnRandomConfigs) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        const ModelConfig cfg = testing::random_config(rng);
        ASSERT_TRUE(validate_config(cfg).empty());
        const double T = cfg.horizon;
        const double phi = mmv_value(cfg);
        const double riskless = riskless_wealth(cfg, T);
        const auto f = frontier_from_theta(cfg);
        EXPECT_TRUE(rel_close(phi, riskless + std::expm1(integral_rho(cfg, 0.0, T)) / (2 * cfg.theta), 1e-9));
        EXPECT_TRUE(rel_close(phi, f.mean - 0.5 * cfg.theta * f.variance, 1e-9));
        EXPECT_TRUE(rel_close(f.variance * cfg.theta, f.mean - riskless, 1e-9));
        const double s = 0.3 * T, x = 1.3, y = 0.8;
        const auto b = optimal_strategy_benchmark(cfg, s, x, {s, x, y});
        const auto fb = saddle_feedback(cfg, s, x, y);
        EXPECT_TRUE(rel_close(b.pi, fb.pi_hat, 1e-9) || (b.pi == 0.0 && fb.pi_hat == 0.0));
        EXPECT_TRUE(rel_close(b.u, fb.u_hat, 1e-9) || (b.u == 0.0 && fb.u_hat == 0.0));
    }
}

}  // namespace
}  // namespace mmv
