#pragma once
// Output directory bookkeeping and the run manifest written at the end of
// every successful command.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmv::cli {

// Carries an exit code up to the dispatcher.
class CliError : public std::runtime_error {
public:
    CliError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

class RunContext {
public:
    RunContext(std::string command, std::string config_path, std::uint64_t seed, std::filesystem::path out_dir);

    // Opens <out_dir>/<name> for writing and records it as an output.
    std::ofstream open(const std::string& name);

    const std::vector<std::string>& outputs() const { return outputs_; }

    // Writes manifest.json; must be the last artifact of the run.
    std::filesystem::path write_manifest();

private:
    std::string command_;
    std::string config_path_;
    std::uint64_t seed_;
    std::filesystem::path out_dir_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

std::string tool_version();

}  // namespace mmv::cli
