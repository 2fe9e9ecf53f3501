#pragma once
// Problem data for the insurer's investment-reinsurance problem: market
// coefficients, safety loadings and the compound-Poisson claim model,
// together with the time quadrature shared by the closed-form formulas.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mmv {

// Right-continuous piecewise-constant function of time. A constant is the
// one-piece special case. Piece i is active on [starts[i], starts[i+1]).
class Schedule {
public:
    Schedule() = default;

    static Schedule constant(double value);
    // starts[0] must be 0 and starts must be strictly increasing.
    static Schedule piecewise(std::vector<double> starts, std::vector<double> values);

    double operator()(double t) const;

    // Exact integral over [a, b]; negative when a > b.
    double integral(double a, double b) const;

    // Interior breakpoints (every start after the first).
    std::span<const double> breakpoints() const;
    std::span<const double> starts() const { return starts_; }
    std::span<const double> values() const { return values_; }

    bool is_constant() const { return values_.size() == 1; }

private:
    Schedule(std::vector<double> starts, std::vector<double> values);
    std::size_t piece_index(double t) const;
    double cumulative(double t) const;

    std::vector<double> starts_{0.0};
    std::vector<double> values_{0.0};
    std::vector<double> cumulative_{0.0};  // integral from 0 to starts_[i]
};

struct MarketParams {
    Schedule r = Schedule::constant(0.0);      // riskless rate, 1/year
    Schedule mu = Schedule::constant(0.0);     // stock drift, 1/year
    Schedule sigma = Schedule::constant(0.0);  // stock volatility, 1/sqrt(year)
    double sigma_floor = 1e-6;
    // When false the stock is unavailable: pi is forced to zero and the
    // capital-market premium drops out of rho.
    bool investment = true;
};

struct ExponentialSize {
    double rate = 1.0;
};

struct DiscreteSize {
    std::vector<double> atoms;
    std::vector<double> weights;
};

using SizeLaw = std::variant<ExponentialSize, DiscreteSize>;

struct ClaimMoments {
    double mu0 = 0.0;        // integral of z against the Levy measure
    double sigma0_sq = 0.0;  // integral of z^2 against the Levy measure
};

// Compound-Poisson claims with intensity lambda and i.i.d. sizes. The Levy
// measure is lambda * F(dz). lambda == 0 switches insurance off entirely.
class ClaimModel {
public:
    ClaimModel() = default;
    ClaimModel(double intensity, SizeLaw size_law);

    double intensity() const { return intensity_; }
    const SizeLaw& size_law() const { return size_law_; }
    bool active() const { return intensity_ > 0.0; }

    double mu0() const { return moments_.mu0; }
    double sigma0_sq() const { return moments_.sigma0_sq; }
    const ClaimMoments& moments() const { return moments_; }

    // E[f(Z)] under the size law (not scaled by the intensity). Exact sum
    // for discrete laws, adaptive exp-sinh quadrature for the exponential.
    double expect(const std::function<double(double)>& f, double tol = 1e-10) const;

    double sample_size(std::mt19937_64& rng) const;

private:
    double intensity_ = 0.0;
    SizeLaw size_law_ = ExponentialSize{};
    ClaimMoments moments_{};
};

struct InsuranceParams {
    double kappa = 0.0;    // insurer safety loading
    double kappa_r = 0.0;  // reinsurer safety loading
};

struct ModelConfig {
    double horizon = 1.0;  // T, years
    double x0 = 0.0;
    double theta = 1.0;    // risk aversion, 1/currency
    double s0 = 10.0;      // initial stock price, only used for plotting
    MarketParams market;
    InsuranceParams insurance;
    ClaimModel claims;
};

struct Violation {
    std::string field;
    std::string message;
};

std::vector<Violation> validate_config(const ModelConfig& cfg);

// Adaptive composite Simpson over [a, b], split at the given breakpoints.
// On each piece the right end is sampled one ulp inside so right-continuous
// piecewise-constant integrands are integrated exactly.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                 std::span<const double> breakpoints = {});

ClaimMoments claim_moments(const ClaimModel& claims);

// Premium earned per unit of risk carried: reinsurance term plus the
// squared Sharpe ratio of the stock.
double rho(const ModelConfig& cfg, double t);

// rho as a piecewise-constant schedule on the union of market breakpoints.
Schedule rho_schedule(const ModelConfig& cfg);

// Sorted union of all market-schedule breakpoints inside (0, horizon).
std::vector<double> market_breakpoints(const ModelConfig& cfg);

// The configuration used throughout the examples: T=3, mu=0.15, r=0.08,
// sigma=0.2, x0=1, lambda=5, exponential claims with rate 10, kappa=0.1,
// kappa_r=0.15, theta=2.
ModelConfig baseline_config();

}  // namespace mmv
