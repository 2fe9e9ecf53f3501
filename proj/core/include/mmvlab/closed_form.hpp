#pragma once
// Explicit solution of the insurer/market game: value function, saddle
// feedback, optimal strategies in benchmark form, wealth moments and the
// mean-variance frontier. Every formula requires theta > 0 unless noted;
// theta <= 0 raises std::domain_error.

#include <functional>
#include <optional>
#include <stdexcept>

#include "mmvlab/model_params.hpp"

namespace mmv {

struct OdeCoefficients {
    double lambda_t = 1.0;  // compounding factor exp(int_t^T r)
    double theta_t = 0.0;   // exp(int_t^T rho) / (2 theta)
    double psi_t = 0.0;     // mu0 (kappa - kappa_r) int_t^T exp(int_s^T r) ds
};

// Affine-in-size jump control q(z) = intercept + slope * z, or an arbitrary
// map when `custom` is set.
struct JumpMap {
    double intercept = 0.0;
    double slope = 0.0;
    std::function<double(double)> custom;

    bool affine() const { return !custom; }
    double operator()(double z) const { return custom ? custom(z) : intercept + slope * z; }
};

struct InsurerAction {
    double pi = 0.0;  // amount held in the stock
    double u = 0.0;   // retention level
};

struct MarketAction {
    double p = 0.0;  // Brownian measure-change control
    JumpMap q;       // jump measure-change control
};

struct SaddleControls {
    double pi_hat = 0.0;
    double u_hat = 0.0;
    double p_hat = 0.0;
    JumpMap q_hat;

    InsurerAction insurer() const { return {pi_hat, u_hat}; }
    MarketAction market() const { return {p_hat, q_hat}; }
};

struct FrontierPoint {
    double theta = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

// Raised by theta_for_target_mean when the target mean does not exceed the
// riskless terminal wealth: the efficient strategy is then (0, 0).
class ZeroStrategyRegime : public std::domain_error {
public:
    ZeroStrategyRegime(double target, double riskless);
    double target() const { return target_; }
    double riskless() const { return riskless_; }

private:
    double target_;
    double riskless_;
};

double integral_r(const ModelConfig& cfg, double a, double b);
double integral_rho(const ModelConfig& cfg, double a, double b);

// int_s^t exp(int_v^t r) dv, the value at t of a unit cash flow paid
// continuously over [s, t] and compounded at the riskless rate.
double compounded_annuity(const ModelConfig& cfg, double s, double t);

OdeCoefficients ode_coefficients(const ModelConfig& cfg, double t);

// phi(t, x, y) = Lambda x y + Theta y^2 + Psi y.
double value_function(const ModelConfig& cfg, double t, double x, double y);

// Optimal value of the monotone mean-variance problem from (0, x0, 1).
double mmv_value(const ModelConfig& cfg);

// Value without risk penalty; used for theta == 0 where only the
// zero-strategy mean is reported.
double zero_strategy_mean(const ModelConfig& cfg);

SaddleControls saddle_feedback(const ModelConfig& cfg, double t, double x, double y);

// Market-price-of-risk scales: (mu - r) / sigma^2 and mu0 kappa_r / sigma0^2.
// Zero when the corresponding market is switched off.
double investment_scale(const ModelConfig& cfg, double t);
double reinsurance_scale(const ModelConfig& cfg);

struct PathStart {
    double s = 0.0;
    double x = 0.0;
    double y = 1.0;
};

// pi*, u* written against the insurer's benchmark wealth; no clamping.
InsurerAction optimal_strategy_benchmark(const ModelConfig& cfg, double t, double current_x,
                                         const PathStart& start);

// Bracket inside the benchmark form: benchmark wealth minus current wealth.
double benchmark_gap(const ModelConfig& cfg, double t, double current_x, const PathStart& start);

double riskless_wealth(const ModelConfig& cfg, double t);
double expected_wealth_optimal(const ModelConfig& cfg, double t);
double y_second_moment(const ModelConfig& cfg, double t);

FrontierPoint frontier_from_theta(const ModelConfig& cfg);
double theta_for_target_mean(const ModelConfig& cfg, double target_mean);

// Frontier variance for a target terminal mean; zero at or below the
// riskless terminal wealth.
double frontier_variance_for_mean(const ModelConfig& cfg, double mean);

}  // namespace mmv
