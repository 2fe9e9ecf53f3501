#pragma once
// Checks of the HJBI structure around the candidate value function
// phi = Lambda x y + Theta y^2 + Psi y: generator residual at the saddle,
// one-sided inequalities under control perturbations, and a paired Monte
// Carlo comparison of strategy deviations.

#include <cstdint>
#include <string>
#include <vector>

#include "mmvlab/closed_form.hpp"
#include "mmvlab/model_params.hpp"
#include "mmvlab/sde_engine.hpp"

namespace mmv {

struct GeneratorInput {
    double t = 0.0;
    double x = 0.0;
    double y = 1.0;
    InsurerAction insurer;
    MarketAction market;
};

enum class JumpIntegral {
    automatic,   // exact for affine q, quadrature otherwise
    exact,       // moments of the Levy measure; q must be affine
    quadrature,  // numerical integration against the claim-size law
};

// Generator of (X, Y) under constant controls applied to phi.
double apply_generator(const ModelConfig& cfg, const GeneratorInput& input,
                       JumpIntegral mode = JumpIntegral::automatic);

// Minimiser over (p, q) of the generator for a fixed insurer action.
MarketAction market_best_response(const ModelConfig& cfg, double t, double x, double y,
                                  const InsurerAction& insurer);

struct ScanGrids {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> deltas;
};

struct ScanOptions {
    double tolerance = 1e-8;
    // Multiplies the saddle retention before the scan; 1 leaves it exact.
    // Anything else demonstrates that the checks catch a wrong control.
    double u_error_factor = 1.0;
};

struct ScanRow {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    std::string control;  // saddle, pi, u, pi_br, u_br, p, q
    double delta = 0.0;
    double generator_value = 0.0;
};

struct SaddleReport {
    std::vector<ScanRow> rows;
    std::size_t grid_points = 0;
    double max_abs_residual_at_saddle = 0.0;
    double min_over_b_deviations = 0.0;
    double max_over_a_deviations = 0.0;
    std::string deviation_sets;
    double tolerance = 1e-8;
    ScanRow worst;  // row with the largest violation (or largest saddle residual)

    bool passed() const;
};

// Insurer rows: "pi", "u" keep the market at the saddle; "pi_br", "u_br"
// let the market best-respond. Market rows: "p" shifts p, "q" shifts the
// slope of q(z). Retentions pushed below zero are skipped.
SaddleReport hjbi_scan(const ModelConfig& cfg, const ScanGrids& grids, const ScanOptions& options = {});

ScanGrids default_scan_grids();

enum class Player { insurer, market };

struct StrategyEdit {
    enum class Kind { none, pi_scale, u_scale, p_shift, q_scale };
    std::string name;
    Player side = Player::insurer;
    Kind kind = Kind::none;
    double amount = 0.0;
};

// pi x1.5, pi x0.5, u x1.5, p +0.2, p -0.2, q slope x1.5.
std::vector<StrategyEdit> canonical_deviations();

// Throws std::invalid_argument when the edit leaves the admissible set.
FeedbackStrategy apply_edit(const FeedbackStrategy& base, const StrategyEdit& edit);

struct SaddleCheckRow {
    StrategyEdit deviation;
    double delta_j = 0.0;
    double std_error = 0.0;
    bool consistent = false;
};

// Paired (common random numbers) estimates of J(deviation) - J(equilibrium).
// Insurer deviations are consistent when delta_j <= 3 s.e., market
// deviations when delta_j >= -3 s.e.
std::vector<SaddleCheckRow> mc_saddle_check(const ModelConfig& cfg, const std::vector<StrategyEdit>& deviations,
                                            std::size_t n_paths, std::uint64_t seed, double dt,
                                            const McOptions& opts = {});

}  // namespace mmv
