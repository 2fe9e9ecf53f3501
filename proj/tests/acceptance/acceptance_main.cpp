// End-to-end acceptance run: one PASS/FAIL line per criterion, then the
// retention note. Exit status is nonzero when anything fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/app.hpp"
#include "mmvlab/closed_form.hpp"
#include "mmvlab/mmv_discrete.hpp"
#include "mmvlab/model_params.hpp"
#include "mmvlab/sde_engine.hpp"
#include "mmvlab/verifier.hpp"
#include "random_configs.hpp"

namespace fs = std::filesystem;
using namespace mmv;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string fmt_double(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

int invoke(const std::vector<std::string>& args, std::string* captured = nullptr) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (captured) *captured = out.str() + err.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct StatRow {
    double estimate = 0.0;
    double std_error = 0.0;
    double closed_form = 0.0;
};

std::map<std::string, StatRow> read_stats(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    std::map<std::string, StatRow> rows;
    while (std::getline(f, line)) {
        std::stringstream ss(line);
        std::string name, a, b, c;
        std::getline(ss, name, ',');
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        rows[name] = {std::stod(a), std::stod(b), std::stod(c)};
    }
    return rows;
}

Outcome example_6_1() {
    const auto start = Clock::now();
    const double theta = 2.0;
    const auto constant = DiscreteRv::constant(10.0);
    const auto uniform = DiscreteRv::uniform(10.0, 22.0, 1000000);
    const double exact_kappa = 10.0 + 2.0 * std::sqrt(3.0);
    const double exact_value = 39.0 / 4.0 + 4.0 * std::sqrt(3.0) / 3.0;
    const auto w = mmv_waterfill(uniform, theta);
    const auto t = mmv_truncation(uniform, theta);
    const double elapsed = seconds_since(start);
    const bool ok = mmv_waterfill(constant, theta).value == 10.0 && mv_utility(constant, theta) == 10.0 &&
                    std::abs(mv_utility(uniform, theta) - 4.0) < 1e-6 && std::abs(w.value - exact_value) < 1e-6 &&
                    std::abs(t.value - exact_value) < 1e-6 && w.kappa && std::abs(*w.kappa - exact_kappa) < 1e-5 &&
                    elapsed < 5.0;
    return {ok, "V(U) = " + fmt_double(w.value) + " vs " + fmt_double(exact_value) + ", MV = " +
                    fmt_double(mv_utility(uniform, theta)) + ", " + fmt_double(elapsed) + " s"};
}

Outcome algorithm_agreement() {
    const auto start = Clock::now();
    std::mt19937_64 rng(kSeed);
    std::uniform_int_distribution<int> count(1, 50);
    std::uniform_real_distribution<double> value(-10.0, 10.0), weight(0.01, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int n = count(rng);
        std::vector<Atom> atoms(n);
        double total = 0.0;
        for (auto& a : atoms) {
            a = {value(rng), weight(rng)};
            total += a.prob;
        }
        double partial = 0.0;
        for (int k = 0; k + 1 < n; ++k) partial += (atoms[k].prob /= total);
        atoms.back().prob = 1.0 - partial;
        const DiscreteRv x(atoms);
        for (double theta : {0.1, 0.5, 1.0, 2.0, 10.0}) {
            worst = std::max(worst, std::abs(mmv_waterfill(x, theta).value - mmv_truncation(x, theta).value));
        }
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-8 && elapsed < 30.0,
            "max gap " + fmt_double(worst) + " over 5000 evaluations, " + fmt_double(elapsed) + " s"};
}

Outcome closed_form_identities() {
    std::mt19937_64 rng(kSeed + 3);
    int failures = 0;
    for (int i = 0; i < 200; ++i) {
        const ModelConfig cfg = testing::random_config(rng);
        const double T = cfg.horizon;
        const double value = mmv_value(cfg);
        const double riskless = riskless_wealth(cfg, T);
        const auto f = frontier_from_theta(cfg);
        bool ok = rel_close(value, riskless + std::expm1(integral_rho(cfg, 0.0, T)) / (2.0 * cfg.theta), 1e-9);
        ok = ok && rel_close(value, f.mean - 0.5 * cfg.theta * f.variance, 1e-9);
        ok = ok && rel_close(cfg.theta * f.variance, f.mean - riskless, 1e-9);
        // Benchmark form against the feedback form at the density implied
        // by the wealth along an equilibrium path from (0, x0, 1).
        const PathStart origin{0.0, cfg.x0, 1.0};
        for (double frac : {0.0, 0.4, 0.9}) {
            const double t = frac * T;
            const double x = cfg.x0 * (0.8 + frac);
            const double y = benchmark_gap(cfg, t, x, origin) * cfg.theta *
                             std::exp(integral_r(cfg, t, T) - integral_rho(cfg, t, T));
            const auto b = optimal_strategy_benchmark(cfg, t, x, origin);
            const auto s = saddle_feedback(cfg, t, x, y);
            ok = ok && rel_close(b.pi, s.pi_hat, 1e-9) && rel_close(b.u, s.u_hat, 1e-9);
        }
        if (!ok) ++failures;
    }
    return {failures == 0, std::to_string(200 - failures) + "/200 configurations"};
}

Outcome hjbi_grid() {
    const auto start = Clock::now();
    const auto report = hjbi_scan(baseline_config(), default_scan_grids(), ScanOptions{1e-8, 1.0});
    const double elapsed = seconds_since(start);
    return {report.passed() && report.grid_points == 36 && elapsed < 5.0,
            std::to_string(report.grid_points) + " points, " + std::to_string(report.rows.size()) +
                " rows, saddle residual " + fmt_double(report.max_abs_residual_at_saddle) + ", " +
                fmt_double(elapsed) + " s"};
}

Outcome monte_carlo(const fs::path& out_dir) {
    const auto start = Clock::now();
    const int code = invoke({"simulate", "-n", "100000", "--dt", "0.001", "--dump", "0", "--threads", "1",
                             "--seed", std::to_string(kSeed), "-o", (out_dir / "mc_threads1").string()});
    const double elapsed = seconds_since(start);
    if (code != 0) return {false, "simulate exited with " + std::to_string(code)};
    const auto rows = read_stats(out_dir / "mc_threads1" / "stats.csv");
    std::ostringstream detail;
    bool ok = elapsed < 120.0;
    for (const char* name : {"J", "mean_X", "var_X", "second_moment_Y", "mean_Y"}) {
        const auto it = rows.find(name);
        if (it == rows.end()) return {false, std::string("missing ") + name};
        const auto& r = it->second;
        const double z = r.std_error > 0.0 ? (r.estimate - r.closed_form) / r.std_error : 0.0;
        ok = ok && std::abs(r.estimate - r.closed_form) <= 3.0 * r.std_error;
        detail << name << " z=" << fmt_double(z) << " ";
    }
    detail << fmt_double(elapsed) << " s";
    return {ok, detail.str()};
}

Outcome residual_convergence() {
    const auto cfg = baseline_config();
    const auto eq = equilibrium_strategy(cfg);
    constexpr std::size_t base_steps = 300;  // dt = 0.01
    constexpr std::size_t levels = 4;
    std::vector<double> worst(levels, 0.0);
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto noise = PathNoise::generate(cfg, kSeed, i, base_steps << (levels - 1), ClaimDynamics::compound_poisson);
        for (std::size_t k = 0; k < levels; ++k) {
            const auto path =
                simulate_path(cfg, eq, noise, std::size_t{1} << (levels - 1 - k), ClaimDynamics::compound_poisson);
            worst[k] = std::max(worst[k], pathwise_identity_residual(path, cfg));
        }
    }
    bool ok = true;
    std::ostringstream detail;
    detail << "ratios";
    for (std::size_t k = 1; k < levels; ++k) {
        const double ratio = worst[k - 1] / worst[k];
        ok = ok && ratio >= 1.3;
        detail << " " << fmt_double(ratio);
    }
    return {ok, detail.str()};
}

Outcome saddle_deviations() {
    const auto rows = mc_saddle_check(baseline_config(), canonical_deviations(), 100000, kSeed, 1e-3);
    bool ok = rows.size() == 6;
    std::ostringstream detail;
    for (const auto& r : rows) {
        ok = ok && r.consistent;
        detail << r.deviation.name << " " << fmt_double(r.delta_j) << "(" << fmt_double(r.std_error) << ") ";
    }
    return {ok, detail.str()};
}

Outcome diffusion_value() {
    const auto cfg = baseline_config();
    McOptions opts;
    opts.dynamics = ClaimDynamics::diffusion_approximation;
    const auto g = mc_game_objective(cfg, equilibrium_strategy(cfg), 100000, kSeed, 1e-3, opts);
    const double target = mmv_value(cfg) + 1.0 / (2.0 * cfg.theta);
    return {std::abs(g.j.mean - target) <= 3.0 * g.j.std_error,
            "J " + fmt_double(g.j.mean) + " vs " + fmt_double(target) + ", s.e. " + fmt_double(g.j.std_error)};
}

Outcome degenerate_frontier(const fs::path& out_dir) {
    const auto cfg = baseline_config();
    const double riskless = riskless_wealth(cfg, cfg.horizon);
    std::ostringstream grid;
    grid.precision(17);
    grid << riskless << "," << riskless - 0.5;
    if (invoke({"frontier", "--xi-grid", grid.str(), "-o", (out_dir / "frontier").string()}) != 0) {
        return {false, "frontier command failed"};
    }
    std::ifstream f(out_dir / "frontier" / "frontier.csv");
    std::string line;
    std::getline(f, line);
    bool ok = true;
    int rows = 0;
    while (std::getline(f, line)) {
        ++rows;
        const auto first = line.find(','), last = line.rfind(',');
        const double mean = std::stod(line.substr(first + 1, last - first - 1));
        const double variance = std::stod(line.substr(last + 1));
        ok = ok && variance == 0.0 && mean == riskless;
    }
    ok = ok && rows == 2;
    if (invoke({"simulate", "--strategy", "zero", "-n", "2000", "--dt", "0.001", "--dump", "0", "-o",
                (out_dir / "zero").string()}) != 0) {
        return {false, "zero-strategy simulation failed"};
    }
    const auto stats = read_stats(out_dir / "zero" / "stats.csv");
    const auto& var = stats.at("var_X");
    ok = ok && var.estimate == 0.0 && var.std_error == 0.0;
    return {ok, "frontier rows at and below riskless " + fmt_double(riskless) + ", zero-strategy var " +
                    fmt_double(var.estimate)};
}

Outcome thread_invariance(const fs::path& out_dir) {
    const int code = invoke({"simulate", "-n", "100000", "--dt", "0.001", "--dump", "0", "--threads", "4", "--seed",
                             std::to_string(kSeed), "-o", (out_dir / "mc_threads4").string()});
    if (code != 0) return {false, "simulate exited with " + std::to_string(code)};
    const auto a = slurp(out_dir / "mc_threads1" / "stats.csv");
    const auto b = slurp(out_dir / "mc_threads4" / "stats.csv");
    return {!a.empty() && a == b, a == b ? "stats.csv identical for 1 and 4 threads" : "stats.csv differs"};
}

Outcome retention_spikes() {
    const auto cfg = baseline_config();
    const auto eq = equilibrium_strategy(cfg);
    std::size_t jumps = 0, rises = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto path = simulate_path(cfg, eq, kSeed, 1e-3, ClaimDynamics::compound_poisson, i);
        for (const auto& j : retention_jumps(path)) {
            ++jumps;
            if (j.u_after > j.u_before) ++rises;
        }
    }
    return {jumps > 0 && rises == jumps,
            "retention rose at " + std::to_string(rises) + " of " + std::to_string(jumps) + " claims on 200 paths"};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "mmvlab-acceptance";
    fs::create_directories(out_dir);

    struct Criterion {
        int id;
        const char* title;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "MMV vs MV on constant and uniform prospects", example_6_1},
        {2, "water-filling equals truncation", algorithm_agreement},
        {3, "closed-form identities on random models", closed_form_identities},
        {4, "HJBI saddle scan", hjbi_grid},
        {5, "Monte Carlo against closed forms", [&] { return monte_carlo(out_dir); }},
        {6, "pathwise identity residual converges", residual_convergence},
        {7, "paired deviations respect the saddle", saddle_deviations},
        {8, "diffusion approximation keeps the value", diffusion_value},
        {9, "degenerate frontier and zero strategy", [&] { return degenerate_frontier(out_dir); }},
        {10, "thread-count invariance", [&] { return thread_invariance(out_dir); }},
    };

    bool all = true;
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.title << ": " << o.detail << " ["
                  << fmt_double(seconds_since(start)) << " s]" << std::endl;
    }
    const auto note = retention_spikes();
    all = all && note.pass;
    std::cout << (note.pass ? "[PASS] " : "[FAIL] ") << "note. " << note.detail << std::endl;
    return all ? 0 : 1;
}
