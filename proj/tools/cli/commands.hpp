#pragma once
// Subcommand implementations. Each returns an exit code and throws
// CliError for invalid input.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mmv::cli {

struct CommonOptions {
    std::string config_path;  // empty: built-in example configuration
    std::string out_dir = "mmvlab-out";
    std::uint64_t seed = 20240601;
    unsigned threads = 0;  // 0: all hardware threads
};

struct ValueOptions {
    bool theta_infinite = false;
    std::optional<double> theta;
};

struct FrontierOptions {
    std::vector<double> theta_grid;
    std::vector<double> xi_grid;
};

struct SimulateOptions {
    std::string strategy = "equilibrium";
    std::size_t paths = 100000;
    double dt = 1e-3;
    std::size_t dump = 0;
    bool diffusion = false;
};

struct VerifyOptions {
    std::vector<double> t_grid;
    std::vector<double> x_grid;
    std::vector<double> y_grid;
    std::vector<double> deltas;
    double tolerance = 1e-8;
    double inject_u_error = 1.0;
    std::size_t mc_paths = 0;  // > 0 adds the paired Monte Carlo deviation check
    double dt = 1e-3;
};

struct MmvEvalOptions {
    std::string atoms_path;
    std::vector<double> uniform;  // a, b, n
    double theta = 0.0;
};

struct Example61Options {
    std::size_t atoms = 1000000;
};

struct Experiment62Options {
    std::size_t paths = 20000;
    double dt = 1e-3;
    std::size_t dump = 3;
    std::vector<double> theta_grid{0.5, 1.0, 2.0, 4.0, 8.0};
};

int cmd_value(const CommonOptions& common, const ValueOptions& opts, std::ostream& out);
int cmd_frontier(const CommonOptions& common, const FrontierOptions& opts, std::ostream& out);
int cmd_simulate(const CommonOptions& common, const SimulateOptions& opts, std::ostream& out);
int cmd_verify(const CommonOptions& common, const VerifyOptions& opts, std::ostream& out);
int cmd_mmv_eval(const CommonOptions& common, const MmvEvalOptions& opts, std::ostream& out);
int cmd_example_6_1(const CommonOptions& common, const Example61Options& opts, std::ostream& out);
int cmd_experiment_6_2(const CommonOptions& common, const Experiment62Options& opts, std::ostream& out);

}  // namespace mmv::cli
