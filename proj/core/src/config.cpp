#include "airfl/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "airfl/errors.hpp"

namespace airfl {

double SystemConfig::snr_db() const {
    return 10.0 * std::log10(power_budget / noise_variance);
}

void SystemConfig::validate() const {
    if (n_tasks < 1) throw ConfigError("n_tasks must be a positive integer");
    if (devices_per_cluster < 1)
        throw ConfigError("devices_per_cluster must be a positive integer");
    if (n_shifters < 1) throw ConfigError("n_shifters must be a positive integer");
    if (n_shifters % n_tasks != 0)
        throw ConfigError("n_shifters (" + std::to_string(n_shifters) +
                          ") must be divisible by n_tasks (" +
                          std::to_string(n_tasks) + ")");
    if (quantization_bits < 0)
        throw ConfigError("quantization_bits must be >= 1 or continuous");
    if (quantization_bits > 62)
        throw ConfigError("quantization_bits too large");
    if (!(power_budget > 0.0)) throw ConfigError("power_budget must be > 0");
    if (!(noise_variance >= 0.0)) throw ConfigError("noise_variance must be >= 0");
    if (model_dim < 1) throw ConfigError("model_dim must be a positive integer");
    if (!(path_loss > 0.0)) throw ConfigError("path_loss must be > 0");
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

long parse_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': expected integer, got '" +
                          value + "'");
    return v;
}

double parse_real(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': expected number, got '" +
                          value + "'");
    return v;
}

}  // namespace

SystemConfig parse_config(const std::string& text) {
    SystemConfig cfg;
    cfg.noise_variance = 1.0;  // SNR convention: sigma^2 fixed to 1
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "n_tasks") {
            cfg.n_tasks = static_cast<int>(parse_int(key, value));
        } else if (key == "devices_per_cluster") {
            cfg.devices_per_cluster = static_cast<int>(parse_int(key, value));
        } else if (key == "n_shifters") {
            cfg.n_shifters = static_cast<int>(parse_int(key, value));
        } else if (key == "quantization_bits") {
            if (value == "continuous") {
                cfg.quantization_bits = 0;
            } else {
                const long b = parse_int(key, value);
                if (b < 1)
                    throw ConfigError(
                        "quantization_bits must be >= 1 or 'continuous'");
                cfg.quantization_bits = static_cast<int>(b);
            }
        } else if (key == "snr_db") {
            cfg.power_budget = std::pow(10.0, parse_real(key, value) / 10.0);
        } else if (key == "model_dim") {
            cfg.model_dim = static_cast<int>(parse_int(key, value));
        } else if (key == "seed") {
            cfg.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace airfl
