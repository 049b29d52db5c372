#ifndef AIRFL_ANALYSIS_HPP
#define AIRFL_ANALYSIS_HPP

#include <span>
#include <string>
#include <vector>

#include "airfl/beamforming.hpp"
#include "airfl/config.hpp"

namespace airfl {

// ---------------------------------------------------------------------------
// Closed-form effective-channel statistics.
// ---------------------------------------------------------------------------

/// Mean of the own-task effective-channel entry, continuous phases:
/// sqrt(pi M) / (2 sqrt(L)).
double predicted_own_mean(int subarray_size, int devices_per_cluster);

/// Own-entry variance, continuous phases: 1 - pi / (4 L).
double predicted_own_variance(int devices_per_cluster);

/// Own-entry mean with b-bit phases: sin(2^-b pi) sqrt(M) / (2^{-b+1} sqrt(pi L)).
double predicted_own_mean_quantized(int subarray_size, int devices_per_cluster,
                                    int bits);

/// Own-entry variance with b-bit phases: 1 - sin^2(2^-b pi) / (4^{-b+1} pi L).
double predicted_own_variance_quantized(int devices_per_cluster, int bits);

/// Interference-power penalty of b-bit phases relative to continuous ones:
/// 1 / sinc^2(2^-b).
double predicted_discrete_power_ratio(int bits);

// ---------------------------------------------------------------------------
// Schemes under comparison.
// ---------------------------------------------------------------------------

struct SchemeSpec {
    enum class Family { Analog, Ro };
    Family family = Family::Analog;
    int bits = 0;  ///< analog only; 0 = continuous phases

    static SchemeSpec continuous() { return {Family::Analog, 0}; }
    static SchemeSpec quantized(int bits) { return {Family::Analog, bits}; }
    static SchemeSpec ro() { return {Family::Ro, 0}; }
    std::string label() const;
};

// ---------------------------------------------------------------------------
// Effective-channel moment estimation (Lemma checks).
// ---------------------------------------------------------------------------

struct EffectiveChannelStats {
    int bits = 0;
    long long n_trials = 0;
    long long own_count = 0;
    long long off_count = 0;
    cdouble own_mean{};
    double own_mean_stderr = 0.0;
    double own_variance = 0.0;
    cdouble off_mean{};
    double off_mean_stderr = 0.0;
    double off_variance = 0.0;
    double predicted_mean = 0.0;
    double predicted_variance = 0.0;
};

struct McOptions {
    int threads = 1;
    std::uint64_t trial_offset = 0;  ///< shifts the trial substream window
};

/// Monte Carlo moments of the effective channel for each requested phase
/// mode (0 = continuous), all modes sharing the same channel draws. Samples
/// every own-task and every cross-task entry of every device per trial.
std::vector<EffectiveChannelStats> estimate_effective_channel_stats(
    const SystemConfig& cfg, std::span<const int> bits_list, long long n_trials,
    const McOptions& opts = {});

/// Single-mode convenience wrapper.
EffectiveChannelStats estimate_effective_channel_stats(const SystemConfig& cfg,
                                                       int bits, long long n_trials,
                                                       const McOptions& opts = {});

// ---------------------------------------------------------------------------
// Interference power estimation.
// ---------------------------------------------------------------------------

struct InterferenceReport {
    SchemeSpec scheme;
    long long n_trials = 0;
    bool unit_signals = false;
    bool trivial_single_task = false;  ///< N == 1: interference identically 0
    double zeta = 0.0;
    std::vector<double> task_power;         ///< estimated P_I,n (summed over d)
    std::vector<double> task_power_stderr;
    std::vector<double> task_analytic;      ///< closed-form P_I,n
    double element_wise = 0.0;              ///< sum_n P_I,n / (d N)
    double element_wise_stderr = 0.0;
    double element_wise_analytic = 0.0;
};

struct InterferenceOptions {
    /// Draw explicit i.i.d. unit-variance signal vectors per device instead
    /// of marginalizing over them analytically (E[s s^T] = I makes both
    /// estimators target the same quantity; explicit draws exercise the full
    /// transmit path).
    bool unit_signals = false;
    int threads = 1;
    std::uint64_t trial_offset = 0;
    /// Per-device (alpha, v), task-major. Empty selects alpha = 1/L, v = 1.
    std::vector<UpdateStats> stats;
};

/// Estimates the inter-task interference power for several schemes on common
/// channel draws. Power control and the combiner scale come from
/// compute_scaling_factor (analog) or the matched-coefficient RO
/// normalization zeta_ro = max(alpha v) / (N_r sqrt(P)).
std::vector<InterferenceReport> estimate_interference_power(
    const SystemConfig& cfg, std::span<const SchemeSpec> schemes,
    long long n_trials, const InterferenceOptions& opts = {});

InterferenceReport estimate_interference_power(const SystemConfig& cfg,
                                               const SchemeSpec& scheme,
                                               long long n_trials,
                                               const InterferenceOptions& opts = {});

/// Fully-digital RO baseline on its own.
InterferenceReport ro_interference_power(const SystemConfig& cfg, long long n_trials,
                                         const InterferenceOptions& opts = {});

// ---------------------------------------------------------------------------
// Scaling-law fit.
// ---------------------------------------------------------------------------

struct ScalingFit {
    SchemeSpec scheme;
    std::vector<int> grid;                 ///< N_r values, strictly increasing
    std::vector<double> element_wise;      ///< per grid point
    std::vector<double> element_wise_stderr;
    double slope = 0.0;      ///< log-log OLS slope
    double intercept = 0.0;
};

/// Sweeps N_r over `grid` for every scheme and fits log(power) against
/// log(N_r). Requires >= 4 strictly increasing grid values, each divisible
/// by cfg.n_tasks.
std::vector<ScalingFit> fit_scaling_law(const SystemConfig& cfg_base,
                                        std::span<const int> grid,
                                        std::span<const SchemeSpec> schemes,
                                        long long n_trials_per_point,
                                        const InterferenceOptions& opts = {});

}  // namespace airfl

#endif  // AIRFL_ANALYSIS_HPP
