#include "mmvlab/closed_form.hpp"

#include <cmath>
#include <string>

namespace mmv {

namespace {

void require_theta(const ModelConfig& cfg) {
    if (!(cfg.theta > 0.0)) {
        throw std::domain_error("theta must be positive for the closed-form strategy formulas");
    }
}

}  // namespace

ZeroStrategyRegime::ZeroStrategyRegime(double target, double riskless)
    : std::domain_error("target mean " + std::to_string(target) + " does not exceed riskless terminal wealth " +
                        std::to_string(riskless) + "; the efficient strategy is (0, 0)"),
      target_(target),
      riskless_(riskless) {}

double integral_r(const ModelConfig& cfg, double a, double b) { return cfg.market.r.integral(a, b); }

double integral_rho(const ModelConfig& cfg, double a, double b) {
    const auto bps = market_breakpoints(cfg);
    if (bps.empty()) return rho(cfg, 0.0) * (b - a);
    return rho_schedule(cfg).integral(a, b);
}

double compounded_annuity(const ModelConfig& cfg, double s, double t) {
    if (t <= s) return 0.0;
    const auto& r = cfg.market.r;
    if (r.is_constant()) {
        const double rate = r(0.0);
        const double len = t - s;
        return rate == 0.0 ? len : std::expm1(rate * len) / rate;
    }
    auto growth = [&](double v) { return std::exp(r.integral(v, t)); };
    return integrate(growth, s, t, 1e-12, r.breakpoints());
}

OdeCoefficients ode_coefficients(const ModelConfig& cfg, double t) {
    require_theta(cfg);
    const double T = cfg.horizon;
    OdeCoefficients c;
    c.lambda_t = std::exp(integral_r(cfg, t, T));
    c.theta_t = std::exp(integral_rho(cfg, t, T)) / (2.0 * cfg.theta);
    c.psi_t = cfg.claims.mu0() * (cfg.insurance.kappa - cfg.insurance.kappa_r) * compounded_annuity(cfg, t, T);
    return c;
}

double value_function(const ModelConfig& cfg, double t, double x, double y) {
    const auto c = ode_coefficients(cfg, t);
    return c.lambda_t * x * y + c.theta_t * y * y + c.psi_t * y;
}

double mmv_value(const ModelConfig& cfg) {
    return value_function(cfg, 0.0, cfg.x0, 1.0) - 1.0 / (2.0 * cfg.theta);
}

double zero_strategy_mean(const ModelConfig& cfg) { return riskless_wealth(cfg, cfg.horizon); }

double investment_scale(const ModelConfig& cfg, double t) {
    if (!cfg.market.investment) return 0.0;
    const double sigma = cfg.market.sigma(t);
    return (cfg.market.mu(t) - cfg.market.r(t)) / (sigma * sigma);
}

double reinsurance_scale(const ModelConfig& cfg) {
    if (!cfg.claims.active()) return 0.0;
    return cfg.claims.mu0() * cfg.insurance.kappa_r / cfg.claims.sigma0_sq();
}

SaddleControls saddle_feedback(const ModelConfig& cfg, double t, double /*x*/, double y) {
    require_theta(cfg);
    const double T = cfg.horizon;
    const double growth = std::exp(integral_rho(cfg, t, T) - integral_r(cfg, t, T));
    const double level = growth * y / cfg.theta;
    SaddleControls s;
    s.pi_hat = investment_scale(cfg, t) * level;
    s.u_hat = reinsurance_scale(cfg) * level;
    s.p_hat = cfg.market.investment ? -(cfg.market.mu(t) - cfg.market.r(t)) / cfg.market.sigma(t) : 0.0;
    s.q_hat = JumpMap{0.0, reinsurance_scale(cfg), {}};
    return s;
}

double benchmark_gap(const ModelConfig& cfg, double t, double current_x, const PathStart& start) {
    require_theta(cfg);
    const double T = cfg.horizon;
    const double drift = cfg.claims.mu0() * (cfg.insurance.kappa - cfg.insurance.kappa_r);
    const double grown = start.x * std::exp(integral_r(cfg, start.s, t)) + drift * compounded_annuity(cfg, start.s, t);
    const double anticipated =
        start.y * std::exp(integral_rho(cfg, start.s, T) - integral_r(cfg, t, T)) / cfg.theta;
    return grown - current_x + anticipated;
}

InsurerAction optimal_strategy_benchmark(const ModelConfig& cfg, double t, double current_x,
                                         const PathStart& start) {
    const double gap = benchmark_gap(cfg, t, current_x, start);
    return {investment_scale(cfg, t) * gap, reinsurance_scale(cfg) * gap};
}

double riskless_wealth(const ModelConfig& cfg, double t) {
    const double drift = cfg.claims.mu0() * (cfg.insurance.kappa - cfg.insurance.kappa_r);
    return cfg.x0 * std::exp(integral_r(cfg, 0.0, t)) + drift * compounded_annuity(cfg, 0.0, t);
}

double expected_wealth_optimal(const ModelConfig& cfg, double t) {
    require_theta(cfg);
    const double T = cfg.horizon;
    const double spread = std::exp(integral_rho(cfg, 0.0, T)) - std::exp(integral_rho(cfg, t, T));
    return riskless_wealth(cfg, t) + std::exp(-integral_r(cfg, t, T)) * spread / cfg.theta;
}

double y_second_moment(const ModelConfig& cfg, double t) { return std::exp(integral_rho(cfg, 0.0, t)); }

double frontier_variance_for_mean(const ModelConfig& cfg, double mean) {
    const double riskless = riskless_wealth(cfg, cfg.horizon);
    if (mean <= riskless) return 0.0;
    const double gap = mean - riskless;
    // exp(-R) / (1 - exp(-R)) == 1 / expm1(R)
    return gap * gap / std::expm1(integral_rho(cfg, 0.0, cfg.horizon));
}

FrontierPoint frontier_from_theta(const ModelConfig& cfg) {
    require_theta(cfg);
    const double mean = expected_wealth_optimal(cfg, cfg.horizon);
    return {cfg.theta, mean, frontier_variance_for_mean(cfg, mean)};
}

double theta_for_target_mean(const ModelConfig& cfg, double target_mean) {
    const double riskless = riskless_wealth(cfg, cfg.horizon);
    if (!(target_mean > riskless)) throw ZeroStrategyRegime(target_mean, riskless);
    return std::expm1(integral_rho(cfg, 0.0, cfg.horizon)) / (target_mean - riskless);
}

}  // namespace mmv
