#pragma once
// Flat key = value configuration files.
//
//   horizon = 3          # comments start with '#'
//   r = 0.08             # constant schedule
//   mu = 0.15@0, 0.2@1.5 # piecewise: value@start, starts increasing from 0
//   claim_law = exponential | discrete
//   claim_rate = 10                      (exponential)
//   claim_atoms = 1, 3 / claim_weights = 0.5, 0.5   (discrete)
//
// Required: horizon, x0, theta, r, mu, sigma, kappa, kappa_r, lambda,
// claim_law and the claim-law parameters. Optional: sigma_floor, s0,
// investment (true/false).

#include <filesystem>
#include <stdexcept>
#include <string>

#include "mmvlab/model_params.hpp"

namespace mmv {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::filesystem::path& path);
std::string format_config(const ModelConfig& cfg);

Schedule parse_schedule(const std::string& text);
std::string format_schedule(const Schedule& s);

}  // namespace mmv
