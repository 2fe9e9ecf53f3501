#include "mmvlab/sde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include <boost/random/normal_distribution.hpp>

namespace mmv {

namespace {

enum class Stream : std::uint32_t { brownian = 1, claims = 2, claim_diffusion = 3 };

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

void fill_brownian(std::vector<double>& w, std::size_t steps, double h, std::mt19937_64 rng) {
    boost::random::normal_distribution<double> normal;
    const double scale = std::sqrt(h);
    w.resize(steps + 1);
    w[0] = 0.0;
    for (std::size_t k = 0; k < steps; ++k) w[k + 1] = w[k] + scale * normal(rng);
}

double bridge(const std::vector<double>& w, double horizon, std::size_t steps, double t, double xi) {
    const double h = horizon / static_cast<double>(steps);
    auto i = static_cast<std::size_t>(t / h);
    i = std::min(i, steps - 1);
    const double ta = horizon * static_cast<double>(i) / static_cast<double>(steps);
    const double tb = horizon * static_cast<double>(i + 1) / static_cast<double>(steps);
    const double span = tb - ta;
    const double left = std::clamp(t - ta, 0.0, span);
    const double right = span - left;
    return w[i] + left / span * (w[i + 1] - w[i]) + std::sqrt(left * right / span) * xi;
}

// Rate at which the jump control's compensator drains Y: int q(z) v(dz).
double jump_compensator(const ModelConfig& cfg, const JumpMap& q) {
    const auto& c = cfg.claims;
    if (!c.active()) return 0.0;
    if (q.affine()) return c.intensity() * q.intercept + q.slope * c.mu0();
    return c.intensity() * c.expect(q.custom);
}

// Brownian control on the claim noise with the same covariation against
// the claim process as q: p0 = -int q(z) z v(dz) / sigma0.
double claim_diffusion_control(const ModelConfig& cfg, const JumpMap& q) {
    const auto& c = cfg.claims;
    if (!c.active()) return 0.0;
    const double sigma0 = std::sqrt(c.sigma0_sq());
    double covariation;
    if (q.affine()) {
        covariation = q.intercept * c.mu0() + q.slope * c.sigma0_sq();
    } else {
        covariation = c.intensity() * c.expect([&](double z) { return q.custom(z) * z; });
    }
    return -covariation / sigma0;
}

struct NullRecorder {
    static constexpr bool tracks_stock = false;
    void node(double, double, double, double, const AppliedControls&) {}
    void jump(const JumpRecord&) {}
};

struct FullRecorder {
    static constexpr bool tracks_stock = true;
    PathRecord& rec;
    void node(double t, double x, double y, double s, const AppliedControls& c) {
        rec.t.push_back(t);
        rec.x.push_back(x);
        rec.y.push_back(y);
        rec.stock.push_back(s);
        rec.controls.push_back(c);
    }
    void jump(const JumpRecord& j) { rec.jumps.push_back(j); }
};

InsurerAction checked_insurer(const FeedbackStrategy& s, double t, double x, double y, std::size_t& clamps) {
    InsurerAction a = s.insurer(t, x, y);
    if (!std::isfinite(a.pi) || !std::isfinite(a.u)) {
        throw std::runtime_error("strategy '" + s.name + "' returned non-finite insurer controls");
    }
    if (a.u < 0.0) {
        a.u = 0.0;
        ++clamps;
    }
    return a;
}

MarketAction checked_market(const FeedbackStrategy& s, double t, double x, double y) {
    MarketAction m = s.market(t, x, y);
    if (!std::isfinite(m.p) || !std::isfinite(m.q.intercept) || !std::isfinite(m.q.slope)) {
        throw std::runtime_error("strategy '" + s.name + "' returned non-finite market controls");
    }
    return m;
}

template <class Recorder>
Terminal run_path(const ModelConfig& cfg, const FeedbackStrategy& strategy, const PathNoise& noise,
                  std::size_t stride, ClaimDynamics dynamics, Recorder& recorder) {
    if (stride == 0 || noise.fine_steps() % stride != 0) {
        throw std::invalid_argument("stride must divide the noise grid");
    }
    const bool diffusion = dynamics == ClaimDynamics::diffusion_approximation;
    if (diffusion && noise.w0().empty()) throw std::invalid_argument("noise lacks the claim-diffusion path");

    const auto& market = cfg.market;
    const auto& claims = cfg.claims;
    const double T = cfg.horizon;
    const std::size_t n = noise.fine_steps() / stride;
    const double mu0 = claims.mu0();
    const double sigma0 = std::sqrt(claims.sigma0_sq());
    const double loading_drift = mu0 * (cfg.insurance.kappa - cfg.insurance.kappa_r);
    const double reinsurance_premium = mu0 * cfg.insurance.kappa_r;
    const auto& w = noise.w();
    const auto& w0 = noise.w0();
    static const std::vector<NoiseJump> no_jumps;
    const auto& jumps = diffusion ? no_jumps : noise.jumps();

    double t = 0.0;
    double x = cfg.x0;
    double y = 1.0;
    double stock = cfg.s0;
    double w_prev = 0.0;
    double w0_prev = 0.0;
    std::size_t node = 0;  // uniform node index
    std::size_t next_jump = 0;
    std::size_t clamps = 0;
    std::size_t steps = 0;

    double cached_h = -1.0, cached_growth = 1.0, cached_phi = 0.0;
    const bool constant_r = market.r.is_constant();

    InsurerAction a;
    MarketAction m;
    bool fresh_state = true;
    while (true) {
        if (fresh_state) {
            a = checked_insurer(strategy, t, x, y, clamps);
            m = checked_market(strategy, t, x, y);
            recorder.node(t, x, y, stock, {a.pi, a.u, m.p});
        }
        fresh_state = true;
        if (node == n) break;

        const double t_uniform = T * static_cast<double>(node + 1) / static_cast<double>(n);
        const bool is_jump = next_jump < jumps.size() && jumps[next_jump].time < t_uniform;
        const double t_next = is_jump ? jumps[next_jump].time : t_uniform;
        const double w_next = is_jump ? jumps[next_jump].w : w[(node + 1) * stride];
        const double h = t_next - t;
        const double dw = w_next - w_prev;
        const double x_prev = x, y_prev = y, stock_prev = stock;

        double growth, phi;
        if (constant_r && h == cached_h) {
            growth = cached_growth;
            phi = cached_phi;
        } else {
            const double rh = market.r.integral(t, t_next);
            growth = std::exp(rh);
            phi = rh == 0.0 ? h : h * std::expm1(rh) / rh;
            cached_h = h;
            cached_growth = growth;
            cached_phi = phi;
        }

        const double r_t = market.r(t);
        const double mu_t = market.mu(t);
        const double sigma_t = market.sigma(t);
        double drift = a.pi * (mu_t - r_t) + reinsurance_premium * a.u + loading_drift;
        double log_y = m.p * dw - 0.5 * m.p * m.p * h;
        double x_noise = a.pi * sigma_t * dw;
        if (strategy.holding_sensitivity && a.pi != 0.0) {
            // pi moves with X (through its own stock noise) and with Y
            // (through p dW) inside the step.
            const HoldingSensitivity d = strategy.holding_sensitivity(t, x, y);
            const double dpi_dw = d.dpi_dx * a.pi * sigma_t + d.dpi_dy * y * m.p;
            x_noise += 0.5 * sigma_t * dpi_dw * (dw * dw - h);
        }
        double w0_next = w0_prev;
        if (diffusion) {
            w0_next = w0[(node + 1) * stride];
            const double dw0 = w0_next - w0_prev;
            const double p0 = claim_diffusion_control(cfg, m.q);
            x_noise += a.u * sigma0 * dw0;
            log_y += p0 * dw0 - 0.5 * p0 * p0 * h;
        } else {
            // Claims are paid in full below, so the compensator u mu0 dt of
            // the centred claim integral is added back here.
            drift += a.u * mu0;
            log_y -= jump_compensator(cfg, m.q) * h;
        }

        x = growth * x + drift * phi + x_noise;
        if (y > 0.0) {
            y *= std::exp(log_y);
            if (!(y >= std::numeric_limits<double>::min())) y = 0.0;
        }
        if constexpr (Recorder::tracks_stock) {
            stock *= std::exp((mu_t - 0.5 * sigma_t * sigma_t) * h + sigma_t * dw);
        }

        if (is_jump) {
            const NoiseJump& jump = jumps[next_jump];
            ++next_jump;
            const InsurerAction aj = checked_insurer(strategy, t_next, x, y, clamps);
            const MarketAction mj = checked_market(strategy, t_next, x, y);
            const double q = mj.q(jump.size);
            if (!std::isfinite(q) || 1.0 + q < 0.0) {
                throw std::domain_error("strategy '" + strategy.name + "' produced 1 + q(z) < 0 at a claim");
            }
            if (aj.u == 0.0 && q == 0.0) {
                // The claim moves neither X nor Y; keep the uniform step whole
                // so such paths share their rounding with claim-free ones.
                x = x_prev;
                y = y_prev;
                stock = stock_prev;
                fresh_state = false;
                continue;
            }
            recorder.jump({t_next, jump.size, x, y, aj.u});
            x -= aj.u * jump.size;
            y *= 1.0 + q;
        } else {
            ++node;
        }
        t = t_next;
        w_prev = w_next;
        w0_prev = w0_next;
        ++steps;
    }
    return {x, y, clamps, steps};
}

}  // namespace

// --------------------------------------------------------------- strategies

FeedbackStrategy equilibrium_strategy(const ModelConfig& cfg) {
    if (!(cfg.theta > 0.0)) throw std::domain_error("equilibrium strategy needs theta > 0");
    const Schedule rho_s = rho_schedule(cfg);
    const Schedule r_s = cfg.market.r;
    const double T = cfg.horizon;
    const double theta = cfg.theta;
    const double reins = reinsurance_scale(cfg);
    const bool constant = rho_s.is_constant() && r_s.is_constant();
    const double premium_rate = rho_s(0.0) - r_s(0.0);
    const MarketParams market = cfg.market;

    FeedbackStrategy s;
    s.kind = StrategyKind::equilibrium;
    s.name = "equilibrium";
    s.insurer = [=](double t, double, double y) {
        const double growth = constant ? std::exp(premium_rate * (T - t))
                                       : std::exp(rho_s.integral(t, T) - r_s.integral(t, T));
        const double level = growth * y / theta;
        double pi = 0.0;
        if (market.investment) {
            const double sigma = market.sigma(t);
            pi = (market.mu(t) - market.r(t)) / (sigma * sigma) * level;
        }
        return InsurerAction{pi, reins * level};
    };
    s.holding_sensitivity = [=](double t, double, double) {
        if (!market.investment) return HoldingSensitivity{};
        const double growth = constant ? std::exp(premium_rate * (T - t))
                                       : std::exp(rho_s.integral(t, T) - r_s.integral(t, T));
        const double sigma = market.sigma(t);
        return HoldingSensitivity{0.0, (market.mu(t) - market.r(t)) / (sigma * sigma) * growth / theta};
    };
    s.market = [=](double t, double, double) {
        const double p = market.investment ? -(market.mu(t) - market.r(t)) / market.sigma(t) : 0.0;
        return MarketAction{p, JumpMap{0.0, reins, {}}};
    };
    return s;
}

FeedbackStrategy zero_strategy() {
    FeedbackStrategy s;
    s.kind = StrategyKind::zero;
    s.name = "zero";
    s.insurer = [](double, double, double) { return InsurerAction{}; };
    s.market = [](double, double, double) { return MarketAction{}; };
    s.holding_sensitivity = [](double, double, double) { return HoldingSensitivity{}; };
    return s;
}

// -------------------------------------------------------------------- noise

void PathNoise::fill(const ModelConfig& cfg, std::uint64_t seed, std::uint64_t path_index, std::size_t fine_steps,
                     ClaimDynamics dynamics) {
    const bool with_claim_noise = dynamics == ClaimDynamics::diffusion_approximation;
    if (fine_steps == 0) throw std::invalid_argument("noise grid needs at least one step");
    horizon_ = cfg.horizon;
    fine_steps_ = fine_steps;
    const double h = horizon_ / static_cast<double>(fine_steps);
    fill_brownian(w_, fine_steps, h, substream(seed, path_index, Stream::brownian));
    if (with_claim_noise) {
        fill_brownian(w0_, fine_steps, h, substream(seed, path_index, Stream::claim_diffusion));
    } else {
        w0_.clear();
    }

    jumps_.clear();
    const auto& claims = cfg.claims;
    if (!with_claim_noise && claims.active()) {
        auto rng = substream(seed, path_index, Stream::claims);
        std::exponential_distribution<double> gap(claims.intensity());
        boost::random::normal_distribution<double> normal;
        double t = 0.0;
        while (true) {
            t += gap(rng);
            if (t >= horizon_) break;
            NoiseJump j;
            j.time = t;
            j.size = claims.sample_size(rng);
            j.w = bridge(w_, horizon_, fine_steps_, t, normal(rng));
            jumps_.push_back(j);
        }
    }
}

PathNoise PathNoise::generate(const ModelConfig& cfg, std::uint64_t seed, std::uint64_t path_index,
                              std::size_t fine_steps, ClaimDynamics dynamics) {
    PathNoise noise;
    noise.fill(cfg, seed, path_index, fine_steps, dynamics);
    return noise;
}

// --------------------------------------------------------------- simulation

std::size_t uniform_steps(double horizon, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive and finite");
    const double ratio = horizon / dt;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
}

PathRecord simulate_path(const ModelConfig& cfg, const FeedbackStrategy& strategy, const PathNoise& noise,
                         std::size_t stride, ClaimDynamics dynamics) {
    PathRecord rec;
    rec.kind = strategy.kind;
    rec.dynamics = dynamics;
    rec.x0 = cfg.x0;
    FullRecorder recorder{rec};
    const Terminal end = run_path(cfg, strategy, noise, stride, dynamics, recorder);
    rec.clamp_count = end.clamps;
    rec.steps = end.steps;
    return rec;
}

PathRecord simulate_path(const ModelConfig& cfg, const FeedbackStrategy& strategy, std::uint64_t seed, double dt,
                         ClaimDynamics dynamics, std::uint64_t path_index) {
    const std::size_t n = uniform_steps(cfg.horizon, dt);
    const PathNoise noise = PathNoise::generate(cfg, seed, path_index, n, dynamics);
    return simulate_path(cfg, strategy, noise, 1, dynamics);
}

PathRecord simulate_diffusion_approx(const ModelConfig& cfg, const FeedbackStrategy& strategy,
                                     std::uint64_t seed, double dt, std::uint64_t path_index) {
    return simulate_path(cfg, strategy, seed, dt, ClaimDynamics::diffusion_approximation, path_index);
}

Terminal simulate_terminal(const ModelConfig& cfg, const FeedbackStrategy& strategy, const PathNoise& noise,
                           std::size_t stride, ClaimDynamics dynamics) {
    NullRecorder recorder;
    return run_path(cfg, strategy, noise, stride, dynamics, recorder);
}

std::vector<Terminal> simulate_terminals(const ModelConfig& cfg, const FeedbackStrategy& strategy,
                                         std::size_t n_paths, std::uint64_t seed, double dt,
                                         const McOptions& opts) {
    const std::size_t n = uniform_steps(cfg.horizon, dt);
    std::vector<Terminal> out(n_paths);

    unsigned workers = opts.threads == 0 ? std::thread::hardware_concurrency() : opts.threads;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_paths, 1))));

    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned id) {
        try {
            PathNoise noise;
            for (std::size_t i = id; i < n_paths; i += workers) {
                noise.fill(cfg, seed, i, n, opts.dynamics);
                out[i] = simulate_terminal(cfg, strategy, noise, 1, opts.dynamics);
            }
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

// --------------------------------------------------------------- estimators

namespace {

class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

McEstimate estimate_mean(const std::vector<double>& samples, std::uint64_t seed) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("an estimate needs at least two samples");
    // Shift by the first sample so identical samples give exactly zero spread.
    const double shift = samples.front();
    Accumulator sum;
    for (double v : samples) sum.add(v - shift);
    const double centred_mean = sum.value() / static_cast<double>(n);
    Accumulator ss;
    for (double v : samples) {
        const double d = (v - shift) - centred_mean;
        ss.add(d * d);
    }
    const double var = ss.value() / static_cast<double>(n - 1);
    return {shift + centred_mean, std::sqrt(var / static_cast<double>(n)), n, seed};
}

std::vector<double> game_payoffs(const std::vector<Terminal>& terminals, double theta) {
    std::vector<double> out;
    out.reserve(terminals.size());
    for (const auto& tm : terminals) out.push_back(tm.x * tm.y + tm.y * tm.y / (2.0 * theta));
    return out;
}

GameEstimate game_estimate(const std::vector<Terminal>& terminals, double theta, std::uint64_t seed) {
    if (!(theta > 0.0)) throw std::domain_error("game objective needs theta > 0");
    GameEstimate g;
    g.j = estimate_mean(game_payoffs(terminals, theta), seed);
    g.i = g.j;
    g.i.mean = g.j.mean - 1.0 / (2.0 * theta);
    return g;
}

TerminalStats terminal_stats(const std::vector<Terminal>& terminals, std::uint64_t seed) {
    const std::size_t n = terminals.size();
    if (n < 2) throw std::invalid_argument("terminal statistics need at least two paths");
    std::vector<double> xs, ys, y2s;
    xs.reserve(n);
    ys.reserve(n);
    y2s.reserve(n);
    for (const auto& tm : terminals) {
        xs.push_back(tm.x);
        ys.push_back(tm.y);
        y2s.push_back(tm.y * tm.y);
    }
    TerminalStats s;
    s.mean_x = estimate_mean(xs, seed);
    s.mean_y = estimate_mean(ys, seed);
    s.second_moment_y = estimate_mean(y2s, seed);

    // Unbiased variance; standard error by the delta method.
    const double shift = xs.front();
    const double m = s.mean_x.mean - shift;
    Accumulator m2, m4;
    for (double v : xs) {
        const double d = (v - shift) - m;
        m2.add(d * d);
        m4.add(d * d * d * d);
    }
    const double dn = static_cast<double>(n);
    const double central2 = m2.value() / dn;
    const double central4 = m4.value() / dn;
    s.var_x.mean = m2.value() / (dn - 1.0);
    s.var_x.std_error = std::sqrt(std::max(central4 - central2 * central2, 0.0) / dn);
    s.var_x.n_paths = n;
    s.var_x.seed = seed;
    return s;
}

GameEstimate mc_game_objective(const ModelConfig& cfg, const FeedbackStrategy& strategy, std::size_t n_paths,
                               std::uint64_t seed, double dt, const McOptions& opts) {
    if (!(cfg.theta > 0.0)) throw std::domain_error("game objective needs theta > 0");
    if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
    return game_estimate(simulate_terminals(cfg, strategy, n_paths, seed, dt, opts), cfg.theta, seed);
}

TerminalStats mc_terminal_stats(const ModelConfig& cfg, const FeedbackStrategy& strategy, std::size_t n_paths,
                                std::uint64_t seed, double dt, const McOptions& opts) {
    if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
    return terminal_stats(simulate_terminals(cfg, strategy, n_paths, seed, dt, opts), seed);
}

std::vector<RetentionJump> retention_jumps(const PathRecord& path) {
    std::vector<RetentionJump> out;
    out.reserve(path.jumps.size());
    std::size_t k = 0;
    for (const auto& j : path.jumps) {
        // The node recorded at the claim time carries the post-claim controls.
        while (k < path.t.size() && path.t[k] < j.time) ++k;
        if (k == path.t.size() || path.t[k] != j.time) {
            throw std::invalid_argument("path record has no node at a claim time");
        }
        out.push_back({j.time, j.size, j.u_applied, path.controls[k].u});
        ++k;
    }
    return out;
}

double pathwise_identity_residual(const PathRecord& path, const ModelConfig& cfg) {
    if (path.kind != StrategyKind::equilibrium) {
        throw std::invalid_argument("the wealth/density identity only holds along equilibrium paths");
    }
    if (!(cfg.theta > 0.0)) throw std::domain_error("identity needs theta > 0");
    const double T = cfg.horizon;
    const double theta = cfg.theta;
    const double loading_drift = cfg.claims.mu0() * (cfg.insurance.kappa - cfg.insurance.kappa_r);
    const double total_rho = integral_rho(cfg, 0.0, T);
    const PathStart start{0.0, path.x0, 1.0};
    double worst = 0.0;
    for (std::size_t k = 0; k < path.t.size(); ++k) {
        const double t = path.t[k];
        const double r_rest = integral_r(cfg, t, T);
        const double lhs = path.y[k] * std::exp(integral_rho(cfg, t, T) - r_rest) / theta;
        const double rhs = start.x * std::exp(integral_r(cfg, 0.0, t)) +
                           loading_drift * compounded_annuity(cfg, 0.0, t) - path.x[k] +
                           start.y * std::exp(total_rho - r_rest) / theta;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

}  // namespace mmv
