#include "mmvlab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mmv {

namespace {

struct Candidate {
    OdeCoefficients c;
    double dlambda, dtheta, dpsi;  // time derivatives

    double phi(double x, double y) const { return c.lambda_t * x * y + c.theta_t * y * y + c.psi_t * y; }
    double phi_x(double y) const { return c.lambda_t * y; }
    double phi_y(double x, double y) const { return c.lambda_t * x + 2.0 * c.theta_t * y + c.psi_t; }
};

Candidate candidate_at(const ModelConfig& cfg, double t) {
    Candidate k;
    k.c = ode_coefficients(cfg, t);
    const double loading_drift = cfg.claims.mu0() * (cfg.insurance.kappa - cfg.insurance.kappa_r);
    k.dlambda = -cfg.market.r(t) * k.c.lambda_t;
    k.dtheta = -rho(cfg, t) * k.c.theta_t;
    k.dpsi = -loading_drift * k.c.lambda_t;
    return k;
}

}  // namespace

double apply_generator(const ModelConfig& cfg, const GeneratorInput& in, JumpIntegral mode) {
    if (!(in.y > 0.0)) throw std::invalid_argument("generator needs y > 0");
    if (!(in.insurer.u >= 0.0)) throw std::invalid_argument("generator needs u >= 0");

    const Candidate k = candidate_at(cfg, in.t);
    const double t = in.t, x = in.x, y = in.y;
    const double pi = in.insurer.pi, u = in.insurer.u, p = in.market.p;
    const auto& m = cfg.market;
    const double r = m.r(t);
    const double excess = m.investment ? m.mu(t) - r : 0.0;
    const double sigma = m.investment ? m.sigma(t) : 0.0;
    const double mu0 = cfg.claims.mu0();

    const double phi_t = k.dlambda * x * y + k.dtheta * y * y + k.dpsi * y;
    const double drift = r * x + pi * excess + mu0 * cfg.insurance.kappa_r * u +
                         mu0 * (cfg.insurance.kappa - cfg.insurance.kappa_r);
    // phi_xx = 0, phi_yy = 2 Theta, phi_xy = Lambda
    double value = phi_t + drift * k.phi_x(y) + 0.5 * y * y * p * p * (2.0 * k.c.theta_t) +
                   y * pi * sigma * p * k.c.lambda_t;

    if (!cfg.claims.active()) return value;

    const double base = k.phi(x, y);
    const double slope_x = k.phi_x(y);
    const double slope_y = k.phi_y(x, y);
    const JumpMap& q = in.market.q;
    auto integrand = [&](double z) {
        const double qz = q(z);
        return k.phi(x - u * z, y + y * qz) - base + u * z * slope_x - y * qz * slope_y;
    };

    const bool use_exact = mode == JumpIntegral::exact || (mode == JumpIntegral::automatic && q.affine());
    if (use_exact) {
        if (!q.affine()) throw std::invalid_argument("exact jump integral needs an affine q(z)");
        // The integrand is a quadratic polynomial in z for affine q; recover
        // its coefficients from three samples and integrate against the
        // Levy measure's moments (lambda, mu0, sigma0^2).
        const double f0 = integrand(0.0), f1 = integrand(1.0), f2 = integrand(2.0);
        const double c2 = 0.5 * (f2 - 2.0 * f1 + f0);
        const double c1 = f1 - f0 - c2;
        value += cfg.claims.intensity() * f0 + mu0 * c1 + cfg.claims.sigma0_sq() * c2;
    } else {
        value += cfg.claims.intensity() * cfg.claims.expect(integrand, 1e-12);
    }
    return value;
}

MarketAction market_best_response(const ModelConfig& cfg, double t, double /*x*/, double y,
                                  const InsurerAction& insurer) {
    if (!(y > 0.0)) throw std::invalid_argument("best response needs y > 0");
    const auto c = ode_coefficients(cfg, t);
    const double ratio = c.lambda_t / (2.0 * y * c.theta_t);
    const double sigma = cfg.market.investment ? cfg.market.sigma(t) : 0.0;
    MarketAction b;
    b.p = -ratio * insurer.pi * sigma;
    b.q = JumpMap{0.0, cfg.claims.active() ? ratio * insurer.u : 0.0, {}};
    return b;
}

// ------------------------------------------------------------------- scan

bool SaddleReport::passed() const {
    return max_abs_residual_at_saddle <= tolerance && min_over_b_deviations >= -tolerance &&
           max_over_a_deviations <= tolerance;
}

ScanGrids default_scan_grids() {
    return {{0.0, 1.0, 2.0, 2.9}, {0.5, 1.0, 2.0}, {0.5, 1.0, 2.0}, {-0.5, -0.1, -0.01, 0.01, 0.1, 0.5}};
}

SaddleReport hjbi_scan(const ModelConfig& cfg, const ScanGrids& g, const ScanOptions& options) {
    if (g.t.empty() || g.x.empty() || g.y.empty() || g.deltas.empty()) {
        throw std::invalid_argument("hjbi_scan: degenerate grids (every grid must be nonempty)");
    }
    for (double t : g.t) {
        if (!(t >= 0.0 && t < cfg.horizon)) throw std::invalid_argument("hjbi_scan: t grid must lie in [0, T)");
    }
    for (double y : g.y) {
        if (!(y > 0.0)) throw std::invalid_argument("hjbi_scan: y grid must be positive");
    }

    SaddleReport rep;
    rep.tolerance = options.tolerance;
    rep.min_over_b_deviations = std::numeric_limits<double>::infinity();
    rep.max_over_a_deviations = -std::numeric_limits<double>::infinity();
    double worst_violation = -std::numeric_limits<double>::infinity();

    auto record = [&](const ScanRow& row, double violation) {
        rep.rows.push_back(row);
        if (violation > worst_violation) {
            worst_violation = violation;
            rep.worst = row;
        }
    };

    for (double t : g.t) {
        for (double x : g.x) {
            for (double y : g.y) {
                ++rep.grid_points;
                const SaddleControls s = saddle_feedback(cfg, t, x, y);
                InsurerAction a_hat = s.insurer();
                a_hat.u *= options.u_error_factor;
                const MarketAction b_hat = market_best_response(cfg, t, x, y, a_hat);

                const double saddle = apply_generator(cfg, {t, x, y, a_hat, b_hat});
                rep.max_abs_residual_at_saddle = std::max(rep.max_abs_residual_at_saddle, std::abs(saddle));
                record({t, x, y, "saddle", 0.0, saddle}, std::abs(saddle) - options.tolerance);

                auto insurer_row = [&](const char* name, double delta, const InsurerAction& a, const MarketAction& b) {
                    const double v = apply_generator(cfg, {t, x, y, a, b});
                    rep.max_over_a_deviations = std::max(rep.max_over_a_deviations, v);
                    record({t, x, y, name, delta, v}, v - options.tolerance);
                };
                auto market_row = [&](const char* name, double delta, const MarketAction& b) {
                    const double v = apply_generator(cfg, {t, x, y, a_hat, b});
                    rep.min_over_b_deviations = std::min(rep.min_over_b_deviations, v);
                    record({t, x, y, name, delta, v}, -v - options.tolerance);
                };

                for (double d : g.deltas) {
                    const InsurerAction a_pi{a_hat.pi + d, a_hat.u};
                    insurer_row("pi", d, a_pi, b_hat);
                    insurer_row("pi_br", d, a_pi, market_best_response(cfg, t, x, y, a_pi));
                    if (a_hat.u + d >= 0.0) {
                        const InsurerAction a_u{a_hat.pi, a_hat.u + d};
                        insurer_row("u", d, a_u, b_hat);
                        insurer_row("u_br", d, a_u, market_best_response(cfg, t, x, y, a_u));
                    }
                    MarketAction b_p = b_hat;
                    b_p.p += d;
                    market_row("p", d, b_p);
                    MarketAction b_q = b_hat;
                    b_q.q.slope += d;
                    market_row("q", d, b_q);
                }
            }
        }
    }

    std::ostringstream sets;
    sets << "additive delta on pi, u (u + delta >= 0 only), p; q(z) = (slope + delta) z; deltas = {";
    for (std::size_t i = 0; i < g.deltas.size(); ++i) sets << (i ? ", " : "") << g.deltas[i];
    sets << "}";
    rep.deviation_sets = sets.str();
    return rep;
}

// ------------------------------------------------------------ MC saddle

std::vector<StrategyEdit> canonical_deviations() {
    using K = StrategyEdit::Kind;
    return {
        {"pi x1.5", Player::insurer, K::pi_scale, 1.5}, {"pi x0.5", Player::insurer, K::pi_scale, 0.5},
        {"u x1.5", Player::insurer, K::u_scale, 1.5},   {"p +0.2", Player::market, K::p_shift, 0.2},
        {"p -0.2", Player::market, K::p_shift, -0.2},   {"q x1.5", Player::market, K::q_scale, 1.5},
    };
}

FeedbackStrategy apply_edit(const FeedbackStrategy& base, const StrategyEdit& edit) {
    using K = StrategyEdit::Kind;
    const bool insurer_kind = edit.kind == K::pi_scale || edit.kind == K::u_scale;
    const bool market_kind = edit.kind == K::p_shift || edit.kind == K::q_scale;
    if ((insurer_kind && edit.side != Player::insurer) || (market_kind && edit.side != Player::market)) {
        throw std::invalid_argument("deviation '" + edit.name + "' edits the other player's controls");
    }
    if (!std::isfinite(edit.amount)) throw std::invalid_argument("deviation amount must be finite");
    if (edit.kind == K::u_scale && edit.amount < 0.0) {
        throw std::invalid_argument("deviation '" + edit.name + "' makes the retention negative");
    }
    if (edit.kind == K::q_scale && edit.amount < 0.0) {
        throw std::invalid_argument("deviation '" + edit.name + "' allows 1 + q(z) < 0");
    }

    FeedbackStrategy s = base;
    if (edit.kind == K::none) return s;
    s.kind = StrategyKind::custom;
    s.name = base.name + " [" + edit.name + "]";
    const double amount = edit.amount;
    auto insurer = base.insurer;
    auto market = base.market;
    switch (edit.kind) {
        case K::pi_scale:
            s.insurer = [insurer, amount](double t, double x, double y) {
                auto a = insurer(t, x, y);
                a.pi *= amount;
                return a;
            };
            if (base.holding_sensitivity) {
                s.holding_sensitivity = [sens = base.holding_sensitivity, amount](double t, double x, double y) {
                    auto d = sens(t, x, y);
                    d.dpi_dx *= amount;
                    d.dpi_dy *= amount;
                    return d;
                };
            }
            break;
        case K::u_scale:
            s.insurer = [insurer, amount](double t, double x, double y) {
                auto a = insurer(t, x, y);
                a.u *= amount;
                return a;
            };
            break;
        case K::p_shift:
            s.market = [market, amount](double t, double x, double y) {
                auto b = market(t, x, y);
                b.p += amount;
                return b;
            };
            break;
        case K::q_scale:
            s.market = [market, amount](double t, double x, double y) {
                auto b = market(t, x, y);
                b.q.intercept *= amount;
                b.q.slope *= amount;
                if (b.q.custom) {
                    auto inner = b.q.custom;
                    b.q.custom = [inner, amount](double z) { return amount * inner(z); };
                }
                return b;
            };
            break;
        case K::none:
            break;
    }
    return s;
}

std::vector<SaddleCheckRow> mc_saddle_check(const ModelConfig& cfg, const std::vector<StrategyEdit>& deviations,
                                            std::size_t n_paths, std::uint64_t seed, double dt,
                                            const McOptions& opts) {
    const FeedbackStrategy eq = equilibrium_strategy(cfg);
    std::vector<FeedbackStrategy> edited;
    edited.reserve(deviations.size());
    for (const auto& d : deviations) edited.push_back(apply_edit(eq, d));

    const auto base = game_payoffs(simulate_terminals(cfg, eq, n_paths, seed, dt, opts), cfg.theta);
    std::vector<SaddleCheckRow> out;
    for (std::size_t k = 0; k < deviations.size(); ++k) {
        const auto dev = game_payoffs(simulate_terminals(cfg, edited[k], n_paths, seed, dt, opts), cfg.theta);
        std::vector<double> diff(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) diff[i] = dev[i] - base[i];
        const McEstimate est = estimate_mean(diff, seed);
        SaddleCheckRow row;
        row.deviation = deviations[k];
        row.delta_j = est.mean;
        row.std_error = est.std_error;
        row.consistent = deviations[k].side == Player::insurer ? est.mean <= 3.0 * est.std_error
                                                               : est.mean >= -3.0 * est.std_error;
        out.push_back(row);
    }
    return out;
}

}  // namespace mmv
