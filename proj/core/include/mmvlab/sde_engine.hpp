#pragma once
// Seeded Monte Carlo for the controlled wealth / density pair (X, Y).
//
// Claims arrive as an exact compound-Poisson stream whose arrival times are
// inserted into the uniform time grid. Between grid nodes the wealth uses an
// exponential Euler step (the linear riskless drift is integrated exactly,
// the stock noise is Euler, plus the Milstein term when the strategy
// exposes its holding sensitivity) and the density uses the exact
// stochastic exponential for frozen controls, so Y stays nonnegative. Controls are
// re-evaluated at every node and held over the following step; jump
// controls are evaluated at the pre-jump state.
//
// Every path draws from its own substreams keyed by (seed, path index), so
// estimates do not depend on the thread count and strategies compared on
// the same (seed, dt) share Brownian increments and claims.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmvlab/closed_form.hpp"
#include "mmvlab/model_params.hpp"

namespace mmv {

enum class StrategyKind { equilibrium, zero, custom };

// Partial derivatives of the feedback stock holding.
struct HoldingSensitivity {
    double dpi_dx = 0.0;
    double dpi_dy = 0.0;
};

struct FeedbackStrategy {
    StrategyKind kind = StrategyKind::custom;
    std::string name;
    std::function<InsurerAction(double t, double x, double y)> insurer;
    std::function<MarketAction(double t, double x, double y)> market;
    // Optional. When present the stock noise of X gets the Milstein
    // correction (strong order one between claims); otherwise plain Euler.
    std::function<HoldingSensitivity(double t, double x, double y)> holding_sensitivity;
};

// Saddle feedback of the game: pi, u proportional to y; p and q(z)
// deterministic.
FeedbackStrategy equilibrium_strategy(const ModelConfig& cfg);
// pi = u = 0 for the insurer and P itself for the market.
FeedbackStrategy zero_strategy();

enum class ClaimDynamics { compound_poisson, diffusion_approximation };

struct NoiseJump {
    double time = 0.0;
    double size = 0.0;
    double w = 0.0;   // W at the jump time (Brownian bridge)
    double w0 = 0.0;  // W0 at the jump time
};

// One path's worth of randomness on a fine uniform grid: claim arrivals
// for compound Poisson dynamics, a second Brownian motion W0 for the
// diffusion approximation. A simulation with
// step dt = horizon / n can use any noise whose fine grid refines n.
class PathNoise {
public:
    void fill(const ModelConfig& cfg, std::uint64_t seed, std::uint64_t path_index, std::size_t fine_steps,
              ClaimDynamics dynamics);

    static PathNoise generate(const ModelConfig& cfg, std::uint64_t seed, std::uint64_t path_index,
                              std::size_t fine_steps, ClaimDynamics dynamics);

    std::size_t fine_steps() const { return fine_steps_; }
    double horizon() const { return horizon_; }
    const std::vector<double>& w() const { return w_; }
    const std::vector<double>& w0() const { return w0_; }
    const std::vector<NoiseJump>& jumps() const { return jumps_; }

private:
    double horizon_ = 0.0;
    std::size_t fine_steps_ = 0;
    std::vector<double> w_;
    std::vector<double> w0_;
    std::vector<NoiseJump> jumps_;
};

struct AppliedControls {
    double pi = 0.0;
    double u = 0.0;
    double p = 0.0;
};

struct JumpRecord {
    double time = 0.0;
    double size = 0.0;
    double x_before = 0.0;
    double y_before = 0.0;
    double u_applied = 0.0;  // retention used for this claim
};

struct PathRecord {
    StrategyKind kind = StrategyKind::custom;
    ClaimDynamics dynamics = ClaimDynamics::compound_poisson;
    double x0 = 0.0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> stock;  // geometric Brownian stock driven by the same W
    std::vector<AppliedControls> controls;  // evaluated at each node's (post-jump) state
    std::vector<JumpRecord> jumps;
    std::size_t clamp_count = 0;
    std::size_t steps = 0;
};

struct Terminal {
    double x = 0.0;
    double y = 0.0;
    std::size_t clamps = 0;
    std::size_t steps = 0;
};

// Number of uniform steps for a requested dt: ceil(horizon / dt).
std::size_t uniform_steps(double horizon, double dt);

PathRecord simulate_path(const ModelConfig& cfg, const FeedbackStrategy& strategy, std::uint64_t seed, double dt,
                         ClaimDynamics dynamics = ClaimDynamics::compound_poisson, std::uint64_t path_index = 0);

// Simulates on every `stride`-th node of the noise's fine grid.
PathRecord simulate_path(const ModelConfig& cfg, const FeedbackStrategy& strategy, const PathNoise& noise,
                         std::size_t stride, ClaimDynamics dynamics);

Terminal simulate_terminal(const ModelConfig& cfg, const FeedbackStrategy& strategy, const PathNoise& noise,
                           std::size_t stride, ClaimDynamics dynamics);

PathRecord simulate_diffusion_approx(const ModelConfig& cfg, const FeedbackStrategy& strategy,
                                     std::uint64_t seed, double dt, std::uint64_t path_index = 0);

struct McOptions {
    ClaimDynamics dynamics = ClaimDynamics::compound_poisson;
    unsigned threads = 0;  // 0 = hardware concurrency
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

struct GameEstimate {
    McEstimate j;  // E[X(T) Y(T) + Y(T)^2 / (2 theta)]
    McEstimate i;  // j - 1 / (2 theta)
};

struct TerminalStats {
    McEstimate mean_x;
    McEstimate var_x;
    McEstimate mean_y;
    McEstimate second_moment_y;
};

std::vector<Terminal> simulate_terminals(const ModelConfig& cfg, const FeedbackStrategy& strategy,
                                         std::size_t n_paths, std::uint64_t seed, double dt,
                                         const McOptions& opts = {});

// Sample mean with standard error sample_std / sqrt(n).
McEstimate estimate_mean(const std::vector<double>& samples, std::uint64_t seed);

std::vector<double> game_payoffs(const std::vector<Terminal>& terminals, double theta);
GameEstimate game_estimate(const std::vector<Terminal>& terminals, double theta, std::uint64_t seed);
TerminalStats terminal_stats(const std::vector<Terminal>& terminals, std::uint64_t seed);

GameEstimate mc_game_objective(const ModelConfig& cfg, const FeedbackStrategy& strategy, std::size_t n_paths,
                               std::uint64_t seed, double dt, const McOptions& opts = {});

TerminalStats mc_terminal_stats(const ModelConfig& cfg, const FeedbackStrategy& strategy, std::size_t n_paths,
                                std::uint64_t seed, double dt, const McOptions& opts = {});

struct RetentionJump {
    double time = 0.0;
    double size = 0.0;
    double u_before = 0.0;  // retention at the pre-claim state
    double u_after = 0.0;   // retention at the post-claim state
};

// Retention levels on both sides of every recorded claim.
std::vector<RetentionJump> retention_jumps(const PathRecord& path);

// Largest deviation along the path from the affine relation between X and
// Y that holds under the equilibrium from (0, x0, 1). Throws
// std::invalid_argument for paths not simulated under the equilibrium.
double pathwise_identity_residual(const PathRecord& path, const ModelConfig& cfg);

}  // namespace mmv
