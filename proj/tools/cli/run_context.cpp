#include "cli/run_context.hpp"

#include <nlohmann/json.hpp>

#include "cli/app.hpp"

namespace mmv::cli {

std::string tool_version() { return MMVLAB_VERSION; }

RunContext::RunContext(std::string command, std::string config_path, std::uint64_t seed,
                       std::filesystem::path out_dir)
    : command_(std::move(command)),
      config_path_(std::move(config_path)),
      seed_(seed),
      out_dir_(std::move(out_dir)),
      start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir_, ec);
    if (ec) throw CliError(exit_invalid_input, "cannot create output directory " + out_dir_.string() + ": " + ec.message());
}

std::ofstream RunContext::open(const std::string& name) {
    const auto path = out_dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CliError(exit_invalid_input, "cannot write " + path.string());
    outputs_.push_back(path.generic_string());
    return f;
}

std::filesystem::path RunContext::write_manifest() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const nlohmann::json manifest = {
        {"command", command_},
        {"config_path", config_path_},
        {"seed", seed_},
        {"outputs", outputs_},
        {"wall_time", wall},
        {"tool_version", tool_version()},
    };
    const auto path = out_dir_ / "manifest.json";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CliError(exit_invalid_input, "cannot write " + path.string());
    f << manifest.dump(2) << '\n';
    return path;
}

}  // namespace mmv::cli
