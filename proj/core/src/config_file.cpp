#include "mmvlab/config_file.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "mmvlab/csv.hpp"

namespace mmv {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    return parts;
}

double parse_number(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, value);
    if (ec != std::errc() || ptr != end || t.empty()) {
        throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
    }
    return value;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(part, key));
    return out;
}

bool parse_bool(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    if (t == "true" || t == "on" || t == "1") return true;
    if (t == "false" || t == "off" || t == "0") return false;
    throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_number(xs[i]);
    return out;
}

const std::set<std::string> known_keys = {
    "horizon", "x0",     "theta",     "r",          "mu",          "sigma",         "sigma_floor", "kappa",
    "kappa_r", "lambda", "claim_law", "claim_rate", "claim_atoms", "claim_weights", "s0",          "investment",
};

}  // namespace

Schedule parse_schedule(const std::string& text) {
    if (text.find('@') == std::string::npos) return Schedule::constant(parse_number(text, "schedule"));
    std::vector<double> starts, values;
    for (const auto& piece : split(text, ',')) {
        const auto at = piece.find('@');
        if (at == std::string::npos) throw ConfigError("schedule piece '" + piece + "' needs value@start");
        values.push_back(parse_number(piece.substr(0, at), "schedule"));
        starts.push_back(parse_number(piece.substr(at + 1), "schedule"));
    }
    try {
        return Schedule::piecewise(std::move(starts), std::move(values));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("schedule: ") + e.what());
    }
}

std::string format_schedule(const Schedule& s) {
    if (s.is_constant()) return format_number(s.values()[0]);
    std::string out;
    for (std::size_t i = 0; i < s.values().size(); ++i) {
        out += (i ? ", " : "") + format_number(s.values()[i]) + "@" + format_number(s.starts()[i]);
    }
    return out;
}

ModelConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys.contains(key)) {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }

    auto require = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing required key '" + key + "'");
        return it->second;
    };
    auto number = [&](const std::string& key) { return parse_number(require(key), key); };

    ModelConfig cfg;
    cfg.horizon = number("horizon");
    cfg.x0 = number("x0");
    cfg.theta = number("theta");
    cfg.market.r = parse_schedule(require("r"));
    cfg.market.mu = parse_schedule(require("mu"));
    cfg.market.sigma = parse_schedule(require("sigma"));
    if (kv.contains("sigma_floor")) cfg.market.sigma_floor = number("sigma_floor");
    if (kv.contains("investment")) cfg.market.investment = parse_bool(kv["investment"], "investment");
    if (kv.contains("s0")) cfg.s0 = number("s0");
    cfg.insurance.kappa = number("kappa");
    cfg.insurance.kappa_r = number("kappa_r");

    const double lambda = number("lambda");
    const std::string law = require("claim_law");
    if (law == "exponential") {
        cfg.claims = ClaimModel(lambda, ExponentialSize{number("claim_rate")});
    } else if (law == "discrete") {
        DiscreteSize d;
        d.atoms = parse_list(require("claim_atoms"), "claim_atoms");
        d.weights = parse_list(require("claim_weights"), "claim_weights");
        cfg.claims = ClaimModel(lambda, std::move(d));
    } else {
        throw ConfigError("claim_law must be 'exponential' or 'discrete', got '" + law + "'");
    }
    return cfg;
}

ModelConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_config(const ModelConfig& cfg) {
    std::ostringstream out;
    out << "horizon = " << format_number(cfg.horizon) << "\n"
        << "x0 = " << format_number(cfg.x0) << "\n"
        << "theta = " << format_number(cfg.theta) << "\n"
        << "r = " << format_schedule(cfg.market.r) << "\n"
        << "mu = " << format_schedule(cfg.market.mu) << "\n"
        << "sigma = " << format_schedule(cfg.market.sigma) << "\n"
        << "sigma_floor = " << format_number(cfg.market.sigma_floor) << "\n"
        << "investment = " << (cfg.market.investment ? "true" : "false") << "\n"
        << "s0 = " << format_number(cfg.s0) << "\n"
        << "kappa = " << format_number(cfg.insurance.kappa) << "\n"
        << "kappa_r = " << format_number(cfg.insurance.kappa_r) << "\n"
        << "lambda = " << format_number(cfg.claims.intensity()) << "\n";
    if (const auto* e = std::get_if<ExponentialSize>(&cfg.claims.size_law())) {
        out << "claim_law = exponential\n"
            << "claim_rate = " << format_number(e->rate) << "\n";
    } else {
        const auto& d = std::get<DiscreteSize>(cfg.claims.size_law());
        out << "claim_law = discrete\n"
            << "claim_atoms = " << join(d.atoms) << "\n"
            << "claim_weights = " << join(d.weights) << "\n";
    }
    return out.str();
}

}  // namespace mmv
