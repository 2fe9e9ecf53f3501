#include "cli/app.hpp"

#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/run_context.hpp"

namespace mmv::cli {

namespace {

void add_common(CLI::App* sub, CommonOptions& common, bool with_config) {
    if (with_config) {
        sub->add_option("-c,--config", common.config_path, "key = value model file (default: built-in example)")
            ->check(CLI::ExistingFile);
    }
    sub->add_option("-o,--out", common.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", common.threads, "worker threads, 0 = all (results do not depend on it)")
        ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monotone mean-variance investment and reinsurance lab", "mmvlab"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    CommonOptions common;
    ValueOptions value;
    FrontierOptions frontier;
    SimulateOptions simulate;
    VerifyOptions verify;
    MmvEvalOptions mmv_eval;
    Example61Options example61;
    Experiment62Options experiment62;

    auto* value_cmd = app.add_subcommand("value", "closed-form value, riskless wealth and terminal moments");
    add_common(value_cmd, common, true);
    value_cmd->add_flag("--theta-inf", value.theta_infinite, "infinite risk aversion limit");
    value_cmd->add_option("--theta", value.theta, "override the configured risk aversion");

    auto* frontier_cmd = app.add_subcommand("frontier", "efficient frontier over risk aversions or target means");
    add_common(frontier_cmd, common, true);
    frontier_cmd->add_option("--theta-grid", frontier.theta_grid, "comma-separated risk aversions")->delimiter(',');
    frontier_cmd->add_option("--xi-grid", frontier.xi_grid, "comma-separated target terminal means")->delimiter(',');

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo terminal statistics and trajectory dumps");
    add_common(simulate_cmd, common, true);
    simulate_cmd->add_option("--strategy", simulate.strategy, "equilibrium or zero")
        ->check(CLI::IsMember({"equilibrium", "zero"}))
        ->capture_default_str();
    simulate_cmd->add_option("-n,--paths", simulate.paths, "number of paths")->capture_default_str();
    simulate_cmd->add_option("--dt", simulate.dt, "time step")->capture_default_str();
    simulate_cmd->add_option("--dump", simulate.dump, "number of trajectories to write")->capture_default_str();
    simulate_cmd->add_flag("--diffusion", simulate.diffusion, "replace claims by their diffusion approximation");

    auto* verify_cmd = app.add_subcommand("verify", "HJBI saddle-point checks on a grid");
    add_common(verify_cmd, common, true);
    verify_cmd->add_option("--t-grid", verify.t_grid, "times")->delimiter(',');
    verify_cmd->add_option("--x-grid", verify.x_grid, "wealth levels")->delimiter(',');
    verify_cmd->add_option("--y-grid", verify.y_grid, "density levels")->delimiter(',');
    verify_cmd->add_option("--deltas", verify.deltas, "control perturbations")->delimiter(',');
    verify_cmd->add_option("--tolerance", verify.tolerance, "sign tolerance")->capture_default_str();
    verify_cmd->add_option("--inject-u-error", verify.inject_u_error,
                           "multiply the saddle retention (1 = exact; other values must fail)")
        ->capture_default_str();
    verify_cmd->add_option("--mc-paths", verify.mc_paths, "paths for the paired deviation check (0 = skip)")
        ->capture_default_str();
    verify_cmd->add_option("--dt", verify.dt, "time step of the deviation check")->capture_default_str();

    auto* mmv_cmd = app.add_subcommand("mmv-eval", "MMV and MV utilities of a finite-support law");
    add_common(mmv_cmd, common, false);
    auto* atoms_opt = mmv_cmd->add_option("--atoms", mmv_eval.atoms_path, "CSV file with columns value,prob")
                          ->check(CLI::ExistingFile);
    auto* uniform_opt =
        mmv_cmd->add_option("--uniform", mmv_eval.uniform, "a,b,n: midpoint discretisation of U(a, b)")
            ->delimiter(',')
            ->expected(3);
    atoms_opt->excludes(uniform_opt);
    mmv_cmd->add_option("--theta", mmv_eval.theta, "risk aversion")->required();

    auto* ex61_cmd = app.add_subcommand("example-6-1", "MMV versus MV on a constant and a uniform prospect");
    add_common(ex61_cmd, common, false);
    ex61_cmd->add_option("--atoms", example61.atoms, "atoms in the uniform discretisation")->capture_default_str();

    auto* ex62_cmd = app.add_subcommand("experiment-6-2", "closed form, frontier, HJBI scan and simulation");
    add_common(ex62_cmd, common, true);
    ex62_cmd->add_option("-n,--paths", experiment62.paths, "Monte Carlo paths")->capture_default_str();
    ex62_cmd->add_option("--dt", experiment62.dt, "time step")->capture_default_str();
    ex62_cmd->add_option("--dump", experiment62.dump, "trajectories to write")->capture_default_str();
    ex62_cmd->add_option("--theta-grid", experiment62.theta_grid, "frontier risk aversions")->delimiter(',');

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid_input;
    }

    try {
        if (*value_cmd) return cmd_value(common, value, out);
        if (*frontier_cmd) return cmd_frontier(common, frontier, out);
        if (*simulate_cmd) return cmd_simulate(common, simulate, out);
        if (*verify_cmd) return cmd_verify(common, verify, out);
        if (*mmv_cmd) return cmd_mmv_eval(common, mmv_eval, out);
        if (*ex61_cmd) return cmd_example_6_1(common, example61, out);
        if (*ex62_cmd) return cmd_experiment_6_2(common, experiment62, out);
    } catch (const CliError& e) {
        err << "error: " << e.what() << '\n';
        return e.code();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid_input;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid_input;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_cross_check_failed;
    }
    err << "error: no subcommand\n";
    return exit_invalid_input;
}

}  // namespace mmv::cli
