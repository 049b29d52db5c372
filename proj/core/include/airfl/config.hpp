#ifndef AIRFL_CONFIG_HPP
#define AIRFL_CONFIG_HPP

#include <cstdint>
#include <string>

namespace airfl {

/// System-level experiment configuration.
///
/// The receiver runs one RF chain per task (N_RF = N), each chain driving a
/// disjoint subarray of M = n_shifters / n_tasks phase shifters. Quantization
/// bits b = 0 selects continuous (infinite-precision) phases.
struct SystemConfig {
    int n_tasks = 1;              ///< N, simultaneous learning tasks
    int devices_per_cluster = 1;  ///< L, devices serving each task
    int n_shifters = 1;           ///< N_r, receive antennas / phase shifters
    int quantization_bits = 0;    ///< b; 0 means continuous phases
    double power_budget = 1.0;    ///< P, per-device transmit budget (linear W)
    double noise_variance = 1.0;  ///< sigma^2 per receive antenna (linear W)
    int model_dim = 1;            ///< d, parameters per model
    std::uint64_t rng_seed = 0;
    double path_loss = 1.0;  ///< large-scale gain, kept at 1 in all experiments

    int n_rf_chains() const { return n_tasks; }
    int subarray_size() const { return n_shifters / n_tasks; }  ///< M
    int total_devices() const { return n_tasks * devices_per_cluster; }  ///< K
    bool continuous_phases() const { return quantization_bits == 0; }
    double snr_db() const;

    /// Flat device index used for substream derivation and storage layout.
    int device_index(int task, int device) const {
        return task * devices_per_cluster + device;
    }

    /// Throws ConfigError when any invariant is violated.
    void validate() const;
};

/// Parses a key-value config file (one `key = value` per line, `#` comments).
///
/// Recognized keys: n_tasks, devices_per_cluster, n_shifters,
/// quantization_bits (integer >= 1 or the word "continuous"), snr_db,
/// model_dim, seed. SNR is converted as P = 10^(snr_db/10) with sigma^2 = 1.
SystemConfig load_config(const std::string& path);

/// Same parser applied to in-memory text (used by tests and defaults).
SystemConfig parse_config(const std::string& text);

}  // namespace airfl

#endif  // AIRFL_CONFIG_HPP
