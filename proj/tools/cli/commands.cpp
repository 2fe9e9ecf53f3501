#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cli/app.hpp"
#include "cli/run_context.hpp"
#include "mmvlab/closed_form.hpp"
#include "mmvlab/config_file.hpp"
#include "mmvlab/csv.hpp"
#include "mmvlab/mmv_discrete.hpp"
#include "mmvlab/sde_engine.hpp"
#include "mmvlab/verifier.hpp"

namespace mmv::cli {

namespace {

constexpr double identity_tolerance = 1e-9;
constexpr double algorithm_tolerance = 1e-8;

ModelConfig load_checked(const CommonOptions& common) {
    ModelConfig cfg;
    try {
        cfg = common.config_path.empty() ? baseline_config() : load_config(common.config_path);
    } catch (const ConfigError& e) {
        throw CliError(exit_invalid_input, std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(exit_invalid_input, std::string("config: ") + e.what());
    }
    const auto violations = validate_config(cfg);
    if (!violations.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  " + v.field + ": " + v.message;
        throw CliError(exit_invalid_input, msg);
    }
    return cfg;
}

void require_positive_theta(const ModelConfig& cfg, const char* command) {
    if (!(cfg.theta > 0.0)) {
        throw CliError(exit_invalid_input, fmt::format("{} needs theta > 0 (got {})", command, cfg.theta));
    }
}

bool relatively_close(double a, double b, double tol) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= tol * scale;
}

// ------------------------------------------------------------------ value

struct ValueTable {
    double phi_total = 0.0;  // Phi_theta
    double phi_start = 0.0;  // phi(0, x0, 1)
    double riskless = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

struct IdentityCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
};

ValueTable value_table(const ModelConfig& cfg, bool theta_infinite, std::vector<IdentityCheck>& checks) {
    ValueTable v;
    v.riskless = riskless_wealth(cfg, cfg.horizon);
    if (theta_infinite) {
        // Infinite risk aversion: Theta vanishes and only the riskless part remains.
        const OdeCoefficients c = ode_coefficients(cfg, 0.0);
        v.phi_start = c.lambda_t * cfg.x0 + c.psi_t;
        v.phi_total = v.phi_start;
        v.mean = v.riskless;
        v.variance = 0.0;
        checks.push_back({"limit value equals riskless wealth", v.phi_total, v.riskless});
        return v;
    }
    const double theta = cfg.theta;
    v.phi_total = mmv_value(cfg);
    v.phi_start = value_function(cfg, 0.0, cfg.x0, 1.0);
    const FrontierPoint f = frontier_from_theta(cfg);
    v.mean = f.mean;
    v.variance = f.variance;
    const double total_rho = integral_rho(cfg, 0.0, cfg.horizon);
    checks.push_back({"duality", v.phi_total, v.riskless + std::expm1(total_rho) / (2.0 * theta)});
    checks.push_back({"mean-variance on the frontier", v.phi_total, v.mean - 0.5 * theta * v.variance});
    checks.push_back({"linear frontier law", v.variance * theta, v.mean - v.riskless});
    checks.push_back({"density offset", v.phi_total, v.phi_start - 1.0 / (2.0 * theta)});
    return v;
}

void enforce(const std::vector<IdentityCheck>& checks, double tol) {
    for (const auto& c : checks) {
        if (!relatively_close(c.lhs, c.rhs, tol)) {
            throw CliError(exit_cross_check_failed,
                           fmt::format("cross-check '{}' failed: {:.17g} vs {:.17g}", c.name, c.lhs, c.rhs));
        }
    }
}

void write_value_csv(std::ostream& os, const ValueTable& v) {
    CsvWriter w(os, {"quantity", "value"});
    w.row({"mmv_value", format_number(v.phi_total)});
    w.row({"value_function_start", format_number(v.phi_start)});
    w.row({"riskless_terminal_wealth", format_number(v.riskless)});
    w.row({"terminal_mean", format_number(v.mean)});
    w.row({"terminal_variance", format_number(v.variance)});
}

void print_value(std::ostream& out, const ValueTable& v) {
    fmt::print(out, "MMV value Phi               {:.10f}\n", v.phi_total);
    fmt::print(out, "phi(0, x0, 1)               {:.10f}\n", v.phi_start);
    fmt::print(out, "riskless terminal wealth    {:.10f}\n", v.riskless);
    fmt::print(out, "E[X(T)] (optimal)           {:.10f}\n", v.mean);
    fmt::print(out, "Var[X(T)] (optimal)         {:.10f}\n", v.variance);
}

// --------------------------------------------------------------- frontier

std::vector<FrontierPoint> frontier_rows(const ModelConfig& cfg, const FrontierOptions& opts) {
    if (opts.theta_grid.empty() && opts.xi_grid.empty()) {
        throw CliError(exit_invalid_input, "frontier needs a non-empty --theta-grid or --xi-grid");
    }
    std::vector<FrontierPoint> rows;
    for (double theta : opts.theta_grid) {
        if (!(theta > 0.0) || !std::isfinite(theta)) {
            throw CliError(exit_invalid_input, fmt::format("theta grid entry {} must be positive and finite", theta));
        }
        ModelConfig c = cfg;
        c.theta = theta;
        rows.push_back(frontier_from_theta(c));
    }
    for (double xi : opts.xi_grid) {
        if (!std::isfinite(xi)) throw CliError(exit_invalid_input, "xi grid entries must be finite");
        try {
            const double theta = theta_for_target_mean(cfg, xi);
            rows.push_back({theta, xi, frontier_variance_for_mean(cfg, xi)});
        } catch (const ZeroStrategyRegime& z) {
            // Targets at or below the riskless wealth are met by doing nothing.
            rows.push_back({std::numeric_limits<double>::infinity(), z.riskless(), 0.0});
        }
    }
    const double riskless = riskless_wealth(cfg, cfg.horizon);
    for (const auto& p : rows) {
        if (std::isinf(p.theta)) continue;
        if (!relatively_close(p.variance * p.theta, p.mean - riskless, identity_tolerance)) {
            throw CliError(exit_cross_check_failed,
                           fmt::format("linear frontier law fails at theta = {}", format_number(p.theta)));
        }
    }
    return rows;
}

// --------------------------------------------------------------- simulate

struct StatRow {
    std::string name;
    McEstimate estimate;
    double target = 0.0;
};

FeedbackStrategy pick_strategy(const ModelConfig& cfg, const std::string& name) {
    if (name == "equilibrium") {
        require_positive_theta(cfg, "the equilibrium strategy");
        return equilibrium_strategy(cfg);
    }
    if (name == "zero") return zero_strategy();
    throw CliError(exit_invalid_input, "unknown strategy '" + name + "' (expected equilibrium or zero)");
}

std::vector<StatRow> simulation_stats(const ModelConfig& cfg, const FeedbackStrategy& strategy,
                                      const std::vector<Terminal>& terminals, std::uint64_t seed) {
    const TerminalStats ts = terminal_stats(terminals, seed);
    const double riskless = riskless_wealth(cfg, cfg.horizon);
    const bool eq = strategy.kind == StrategyKind::equilibrium;
    std::vector<StatRow> rows;
    if (cfg.theta > 0.0) {
        const GameEstimate g = game_estimate(terminals, cfg.theta, seed);
        const double target = eq ? value_function(cfg, 0.0, cfg.x0, 1.0) : riskless + 1.0 / (2.0 * cfg.theta);
        rows.push_back({"J", g.j, target});
    }
    rows.push_back({"mean_X", ts.mean_x, eq ? expected_wealth_optimal(cfg, cfg.horizon) : riskless});
    rows.push_back({"var_X", ts.var_x, eq ? frontier_from_theta(cfg).variance : 0.0});
    rows.push_back({"mean_Y", ts.mean_y, 1.0});
    rows.push_back({"second_moment_Y", ts.second_moment_y, eq ? y_second_moment(cfg, cfg.horizon) : 1.0});
    return rows;
}

void write_stats_csv(std::ostream& os, const std::vector<StatRow>& rows) {
    CsvWriter w(os, {"statistic", "estimate", "std_error", "closed_form"});
    for (const auto& r : rows) {
        w.row({r.name, format_number(r.estimate.mean), format_number(r.estimate.std_error), format_number(r.target)});
    }
}

bool within_three_se(const StatRow& r) {
    // The rounding slack matters only for deterministic strategies (s.e. 0).
    const double slack = 1e-12 * std::max(1.0, std::abs(r.target));
    return std::abs(r.estimate.mean - r.target) <= 3.0 * r.estimate.std_error + slack;
}

void print_stats(std::ostream& out, const std::vector<StatRow>& rows) {
    fmt::print(out, "{:<16} {:>14} {:>12} {:>14}  {}\n", "statistic", "estimate", "std_error", "closed_form",
               "within 3 s.e.");
    for (const auto& r : rows) {
        fmt::print(out, "{:<16} {:>14.8f} {:>12.3e} {:>14.8f}  {}\n", r.name, r.estimate.mean, r.estimate.std_error,
                   r.target, within_three_se(r) ? "yes" : "no");
    }
}

void check_simulation_inputs(std::size_t paths, double dt, const ModelConfig& cfg) {
    if (paths < 2) throw CliError(exit_invalid_input, "--paths must be at least 2");
    if (!(dt > 0.0) || !(dt <= cfg.horizon)) {
        throw CliError(exit_invalid_input, fmt::format("--dt must lie in (0, horizon], got {}", dt));
    }
}

// Dumps trajectory and claim logs; returns false when the retention fails
// to rise at some claim on an equilibrium path.
bool dump_paths(RunContext& ctx, const ModelConfig& cfg, const FeedbackStrategy& strategy, std::uint64_t seed,
                double dt, ClaimDynamics dynamics, std::size_t count, std::ostream& out) {
    bool spikes_ok = true;
    std::size_t claims = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const PathRecord path = simulate_path(cfg, strategy, seed, dt, dynamics, i);
        {
            auto f = ctx.open(fmt::format("trajectory_{}.csv", i));
            write_trajectory_csv(f, path);
        }
        {
            auto f = ctx.open(fmt::format("jumps_{}.csv", i));
            write_jump_log_csv(f, path);
        }
        if (strategy.kind == StrategyKind::equilibrium) {
            for (const auto& j : retention_jumps(path)) {
                ++claims;
                if (!(j.u_after > j.u_before)) spikes_ok = false;
            }
        }
    }
    if (count > 0 && strategy.kind == StrategyKind::equilibrium && dynamics == ClaimDynamics::compound_poisson) {
        fmt::print(out, "retention rises at every claim on dumped paths: {} ({} claims)\n", spikes_ok ? "yes" : "no",
                   claims);
    }
    return spikes_ok;
}

// ----------------------------------------------------------------- verify

ScanGrids scan_grids(const VerifyOptions& opts) {
    ScanGrids g = default_scan_grids();
    if (!opts.t_grid.empty()) g.t = opts.t_grid;
    if (!opts.x_grid.empty()) g.x = opts.x_grid;
    if (!opts.y_grid.empty()) g.y = opts.y_grid;
    if (!opts.deltas.empty()) g.deltas = opts.deltas;
    return g;
}

void print_report(std::ostream& out, const SaddleReport& r) {
    fmt::print(out, "grid points                      {}\n", r.grid_points);
    fmt::print(out, "deviation sets                   {}\n", r.deviation_sets);
    fmt::print(out, "max |L phi| at the saddle        {:.3e}\n", r.max_abs_residual_at_saddle);
    fmt::print(out, "min over market deviations       {:.3e}\n", r.min_over_b_deviations);
    fmt::print(out, "max over insurer deviations      {:.3e}\n", r.max_over_a_deviations);
    fmt::print(out, "tolerance                        {:.1e}\n", r.tolerance);
    fmt::print(out, "HJBI conditions                  {}\n", r.passed() ? "hold" : "VIOLATED");
    if (!r.passed()) {
        const ScanRow& w = r.worst;
        fmt::print(out, "worst point: t={} x={} y={} control={} delta={} generator={:.6e}\n", w.t, w.x, w.y,
                   w.control, w.delta, w.generator_value);
    }
}

}  // namespace

int cmd_value(const CommonOptions& common, const ValueOptions& opts, std::ostream& out) {
    ModelConfig cfg = load_checked(common);
    if (opts.theta) {
        cfg.theta = *opts.theta;
        if (!validate_config(cfg).empty()) throw CliError(exit_invalid_input, "--theta must be nonnegative");
    }
    if (!opts.theta_infinite) require_positive_theta(cfg, "value");
    RunContext ctx("value", common.config_path, common.seed, common.out_dir);
    std::vector<IdentityCheck> checks;
    const ValueTable v = value_table(cfg, opts.theta_infinite, checks);
    enforce(checks, identity_tolerance);
    print_value(out, v);
    {
        auto f = ctx.open("value.csv");
        write_value_csv(f, v);
    }
    ctx.write_manifest();
    return exit_ok;
}

int cmd_frontier(const CommonOptions& common, const FrontierOptions& opts, std::ostream& out) {
    const ModelConfig cfg = load_checked(common);
    const auto rows = frontier_rows(cfg, opts);
    RunContext ctx("frontier", common.config_path, common.seed, common.out_dir);
    fmt::print(out, "riskless terminal wealth {:.10f}\n", riskless_wealth(cfg, cfg.horizon));
    fmt::print(out, "{:>12} {:>16} {:>16}\n", "theta", "mean", "variance");
    for (const auto& p : rows) fmt::print(out, "{:>12.6g} {:>16.10f} {:>16.10f}\n", p.theta, p.mean, p.variance);
    {
        auto f = ctx.open("frontier.csv");
        write_frontier_csv(f, rows);
    }
    ctx.write_manifest();
    return exit_ok;
}

int cmd_simulate(const CommonOptions& common, const SimulateOptions& opts, std::ostream& out) {
    const ModelConfig cfg = load_checked(common);
    check_simulation_inputs(opts.paths, opts.dt, cfg);
    const FeedbackStrategy strategy = pick_strategy(cfg, opts.strategy);
    const ClaimDynamics dynamics =
        opts.diffusion ? ClaimDynamics::diffusion_approximation : ClaimDynamics::compound_poisson;
    RunContext ctx("simulate", common.config_path, common.seed, common.out_dir);

    const auto terminals =
        simulate_terminals(cfg, strategy, opts.paths, common.seed, opts.dt, {dynamics, common.threads});
    std::size_t clamps = 0;
    for (const auto& t : terminals) clamps += t.clamps;
    const auto rows = simulation_stats(cfg, strategy, terminals, common.seed);

    fmt::print(out, "strategy {} | {} | paths {} | dt {} | steps {}\n", strategy.name,
               opts.diffusion ? "diffusion approximation" : "compound Poisson", opts.paths, opts.dt,
               uniform_steps(cfg.horizon, opts.dt));
    print_stats(out, rows);
    if (clamps > 0) fmt::print(out, "negative retentions clamped to zero: {}\n", clamps);
    {
        auto f = ctx.open("stats.csv");
        write_stats_csv(f, rows);
    }
    dump_paths(ctx, cfg, strategy, common.seed, opts.dt, dynamics, opts.dump, out);
    ctx.write_manifest();
    return exit_ok;
}

int cmd_verify(const CommonOptions& common, const VerifyOptions& opts, std::ostream& out) {
    const ModelConfig cfg = load_checked(common);
    require_positive_theta(cfg, "verify");
    if (!(opts.tolerance > 0.0)) throw CliError(exit_invalid_input, "--tolerance must be positive");
    if (!(opts.inject_u_error >= 0.0)) throw CliError(exit_invalid_input, "--inject-u-error must be nonnegative");
    const ScanGrids grids = scan_grids(opts);
    for (double y : grids.y) {
        if (!(y > 0.0)) throw CliError(exit_invalid_input, "y grid entries must be positive");
    }
    for (double t : grids.t) {
        if (!(t >= 0.0 && t <= cfg.horizon)) throw CliError(exit_invalid_input, "t grid entries must lie in [0, T]");
    }
    if (grids.deltas.empty() || grids.t.empty() || grids.x.empty() || grids.y.empty()) {
        throw CliError(exit_invalid_input, "verification grids must be non-empty");
    }
    RunContext ctx("verify", common.config_path, common.seed, common.out_dir);

    const SaddleReport report = hjbi_scan(cfg, grids, {opts.tolerance, opts.inject_u_error});
    {
        auto f = ctx.open("saddle_report.csv");
        write_saddle_report_csv(f, report);
    }
    print_report(out, report);
    bool ok = report.passed();

    if (opts.mc_paths > 0) {
        check_simulation_inputs(opts.mc_paths, opts.dt, cfg);
        const auto rows = mc_saddle_check(cfg, canonical_deviations(), opts.mc_paths, common.seed, opts.dt,
                                          {ClaimDynamics::compound_poisson, common.threads});
        auto f = ctx.open("saddle_mc.csv");
        CsvWriter w(f, {"deviation", "player", "delta_j", "std_error", "consistent"});
        fmt::print(out, "{:<14} {:>8} {:>13} {:>11}  {}\n", "deviation", "player", "delta_J", "std_error",
                   "consistent");
        for (const auto& r : rows) {
            const char* side = r.deviation.side == Player::insurer ? "insurer" : "market";
            w.row({r.deviation.name, side, format_number(r.delta_j), format_number(r.std_error),
                   r.consistent ? "1" : "0"});
            fmt::print(out, "{:<14} {:>8} {:>13.6e} {:>11.3e}  {}\n", r.deviation.name, side, r.delta_j, r.std_error,
                       r.consistent ? "yes" : "no");
            ok = ok && r.consistent;
        }
    }
    ctx.write_manifest();
    return ok ? exit_ok : exit_verification_failed;
}

int cmd_mmv_eval(const CommonOptions& common, const MmvEvalOptions& opts, std::ostream& out) {
    if (opts.atoms_path.empty() == opts.uniform.empty()) {
        throw CliError(exit_invalid_input, "mmv-eval needs exactly one of --atoms or --uniform");
    }
    if (!(opts.theta > 0.0) || !std::isfinite(opts.theta)) {
        throw CliError(exit_invalid_input, "--theta must be positive and finite");
    }
    std::optional<DiscreteRv> law;
    try {
        if (!opts.atoms_path.empty()) {
            std::ifstream in(opts.atoms_path);
            if (!in) throw CliError(exit_invalid_input, "cannot open " + opts.atoms_path);
            law = read_atoms_csv(in);
        } else {
            if (opts.uniform.size() != 3) throw CliError(exit_invalid_input, "--uniform takes a,b,n");
            const double n = opts.uniform[2];
            if (!(n >= 1.0) || n != std::floor(n)) throw CliError(exit_invalid_input, "--uniform n must be a positive integer");
            law = DiscreteRv::uniform(opts.uniform[0], opts.uniform[1], static_cast<std::size_t>(n));
        }
    } catch (const std::invalid_argument& e) {
        throw CliError(exit_invalid_input, std::string("atoms: ") + e.what());
    }

    const double u = mv_utility(*law, opts.theta);
    const MmvResult w = mmv_waterfill(*law, opts.theta);
    const MmvResult t = mmv_truncation(*law, opts.theta);
    const double scale = std::max(1.0, std::abs(t.value));
    if (std::abs(w.value - t.value) > algorithm_tolerance * scale) {
        throw CliError(exit_cross_check_failed, fmt::format("water-filling {:.17g} and truncation {:.17g} disagree",
                                                            w.value, t.value));
    }
    const double inf = std::numeric_limits<double>::infinity();
    RunContext ctx("mmv-eval", opts.atoms_path, common.seed, common.out_dir);
    fmt::print(out, "atoms                 {}\n", law->size());
    fmt::print(out, "mean                  {:.10f}\n", law->mean());
    fmt::print(out, "variance              {:.10f}\n", law->variance());
    fmt::print(out, "U_theta (MV)          {:.10f}\n", u);
    fmt::print(out, "V_theta water-filling {:.10f}\n", w.value);
    fmt::print(out, "V_theta truncation    {:.10f}\n", t.value);
    fmt::print(out, "kappa                 {}\n", t.kappa ? fmt::format("{:.10f}", *t.kappa) : "none (no truncation)");
    {
        auto f = ctx.open("mmv.csv");
        CsvWriter c(f, {"quantity", "value"});
        c.row({"theta", format_number(opts.theta)});
        c.row({"mean", format_number(law->mean())});
        c.row({"variance", format_number(law->variance())});
        c.row({"mv_utility", format_number(u)});
        c.row({"mmv_waterfill", format_number(w.value)});
        c.row({"mmv_truncation", format_number(t.value)});
        c.row({"kappa", format_number(t.kappa.value_or(inf))});
    }
    {
        auto f = ctx.open("density.csv");
        CsvWriter c(f, {"value", "prob", "density"});
        const auto atoms = law->atoms();
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            c.row({format_number(atoms[i].value), format_number(atoms[i].prob), format_number(w.density[i])});
        }
    }
    ctx.write_manifest();
    return exit_ok;
}

int cmd_example_6_1(const CommonOptions& common, const Example61Options& opts, std::ostream& out) {
    if (opts.atoms < 1) throw CliError(exit_invalid_input, "--atoms must be positive");
    constexpr double theta = 2.0;
    const DiscreteRv x0 = DiscreteRv::constant(10.0);
    const DiscreteRv x1 = DiscreteRv::uniform(10.0, 22.0, opts.atoms);
    const double root3 = std::sqrt(3.0);

    struct Row {
        std::string name;
        double waterfill;
        double truncation;
        double exact;
        double tolerance;
    };
    const MmvResult w0 = mmv_waterfill(x0, theta), t0 = mmv_truncation(x0, theta);
    const MmvResult w1 = mmv_waterfill(x1, theta), t1 = mmv_truncation(x1, theta);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<Row> rows{
        {"U_2(X0)", mv_utility(x0, theta), mv_utility(x0, theta), 10.0, 1e-12},
        {"U_2(X1)", mv_utility(x1, theta), mv_utility(x1, theta), 4.0, 1e-3},
        {"kappa(X1)", w1.kappa.value_or(nan), t1.kappa.value_or(nan), 10.0 + 2.0 * root3, 2e-3},
        {"V_2(X0)", w0.value, t0.value, 10.0, 1e-12},
        {"V_2(X1)", w1.value, t1.value, 39.0 / 4.0 + 4.0 * root3 / 3.0, 2e-3},
    };

    RunContext ctx("example-6-1", "", common.seed, common.out_dir);
    fmt::print(out, "X0 = 10, X1 = 10 + U(0, 12) on {} midpoint atoms, theta = {}\n", opts.atoms, theta);
    fmt::print(out, "{:<10} {:>16} {:>16} {:>16}  {}\n", "quantity", "water-filling", "truncation", "exact", "ok");
    bool ok = true;
    for (const auto& r : rows) {
        const bool good = std::abs(r.waterfill - r.exact) <= r.tolerance && std::abs(r.truncation - r.exact) <= r.tolerance;
        ok = ok && good;
        fmt::print(out, "{:<10} {:>16.10f} {:>16.10f} {:>16.10f}  {}\n", r.name, r.waterfill, r.truncation, r.exact,
                   good ? "yes" : "no");
    }
    const bool reversal = t1.value > t0.value && mv_utility(x1, theta) < mv_utility(x0, theta);
    fmt::print(out, "V_2(X1) > V_2(X0) while U_2(X1) < U_2(X0): {}\n", reversal ? "yes" : "no");
    {
        auto f = ctx.open("example_6_1.csv");
        CsvWriter c(f, {"quantity", "waterfill", "truncation", "exact"});
        for (const auto& r : rows) {
            c.row({r.name, format_number(r.waterfill), format_number(r.truncation), format_number(r.exact)});
        }
    }
    ctx.write_manifest();
    return ok && reversal ? exit_ok : exit_verification_failed;
}

int cmd_experiment_6_2(const CommonOptions& common, const Experiment62Options& opts, std::ostream& out) {
    const ModelConfig cfg = load_checked(common);
    require_positive_theta(cfg, "experiment-6-2");
    check_simulation_inputs(opts.paths, opts.dt, cfg);
    FrontierOptions frontier;
    frontier.theta_grid = opts.theta_grid;
    frontier.xi_grid = {riskless_wealth(cfg, cfg.horizon)};
    std::vector<IdentityCheck> checks;
    const ValueTable v = value_table(cfg, false, checks);
    enforce(checks, identity_tolerance);
    const auto points = frontier_rows(cfg, frontier);

    RunContext ctx("experiment-6-2", common.config_path, common.seed, common.out_dir);
    fmt::print(out, "== closed form\n");
    print_value(out, v);
    {
        auto f = ctx.open("value.csv");
        write_value_csv(f, v);
    }
    {
        auto f = ctx.open("frontier.csv");
        write_frontier_csv(f, points);
    }

    fmt::print(out, "== HJBI scan\n");
    const SaddleReport report = hjbi_scan(cfg, default_scan_grids());
    print_report(out, report);
    {
        auto f = ctx.open("saddle_report.csv");
        write_saddle_report_csv(f, report);
    }

    fmt::print(out, "== Monte Carlo ({} paths, dt {})\n", opts.paths, opts.dt);
    const FeedbackStrategy eq = equilibrium_strategy(cfg);
    const auto terminals = simulate_terminals(cfg, eq, opts.paths, common.seed, opts.dt,
                                              {ClaimDynamics::compound_poisson, common.threads});
    const auto rows = simulation_stats(cfg, eq, terminals, common.seed);
    print_stats(out, rows);
    {
        auto f = ctx.open("stats.csv");
        write_stats_csv(f, rows);
    }
    const bool spikes = dump_paths(ctx, cfg, eq, common.seed, opts.dt, ClaimDynamics::compound_poisson, opts.dump, out);
    ctx.write_manifest();
    return report.passed() && spikes ? exit_ok : exit_verification_failed;
}

}  // namespace mmv::cli
