#ifndef AIRFL_AIRCOMP_HPP
#define AIRFL_AIRCOMP_HPP

#include <span>
#include <vector>

#include "airfl/beamforming.hpp"
#include "airfl/channel.hpp"

namespace airfl {

/// A device's accumulated local update with its normalization statistics.
/// Updates whose entry spread is below 1e-12 * max(1, ||g||_inf) are marked
/// degenerate: they are not transmitted and the server reconstructs them from
/// the mean alone.
struct LocalUpdate {
    std::vector<double> gradient;    ///< g, length d
    std::vector<double> normalized;  ///< s = (g - mu 1)/v, zeros when degenerate
    double mean = 0.0;               ///< mu
    double stddev = 0.0;             ///< v (population standard deviation)
    double alpha = 0.0;              ///< aggregation weight
    bool degenerate = false;

    UpdateStats stats() const { return {alpha, degenerate ? 0.0 : stddev}; }
};

/// Normalizes a raw update. Throws InputError on non-finite entries or an
/// aggregation weight outside (0, 1].
LocalUpdate normalize(std::vector<double> gradient, double alpha);

/// Power-control stats for a full task-major device list.
std::vector<UpdateStats> collect_stats(std::span<const LocalUpdate> updates);

struct RoundOptions {
    /// Verification mode: replaces each own-task transmit coefficient
    /// zeta sqrt(p) a_n^H h by alpha v exactly, per realization, so the
    /// weight-distortion error vanishes identically.
    bool exact_coefficient_matching = false;
};

/// Everything the receiver produced in one uplink round. The received signal
/// for task n decomposes as y_n = own + interference + noise component; the
/// components are kept so the error split can reuse the exact same values.
class RoundTransmission {
public:
    RoundTransmission(int n_tasks, int devices_per_cluster, int model_dim,
                      double zeta);

    int n_tasks() const { return n_tasks_; }
    int model_dim() const { return model_dim_; }
    double zeta() const { return zeta_; }

    std::span<const cdouble> received(int task) const { return row(received_, task); }
    std::span<const cdouble> interference(int task) const {
        return row(interference_, task);
    }
    std::span<const cdouble> noise_component(int task) const {
        return row(noise_, task);
    }
    /// a_n^H h_{i,l,n} for the chain serving `task` and transmitter (i, l).
    cdouble coefficient(int task, int tx_task, int tx_device) const;

    /// The multiplier actually applied to s_{i,l} on chain `task`:
    /// zeta sqrt(p) a_n^H h, zero for silent devices, or alpha v when the
    /// exact-matching verification mode is on.
    cdouble transmit_gain(int task, int tx_task, int tx_device) const;

private:
    friend RoundTransmission transmit_round(std::span<const LocalUpdate>,
                                            const ChannelRealization&,
                                            const AnalogBeamformer&,
                                            const DigitalCombiner&, const NoiseDraw&,
                                            std::span<const double>,
                                            const RoundOptions&);

    std::span<const cdouble> row(const std::vector<cdouble>& m, int task) const;
    std::span<cdouble> row(std::vector<cdouble>& m, int task);
    std::size_t pair_index(int task, int tx_task, int tx_device) const;

    int n_tasks_;
    int devices_per_cluster_;
    int model_dim_;
    double zeta_;
    std::vector<cdouble> received_;      // N x d
    std::vector<cdouble> own_;           // N x d
    std::vector<cdouble> interference_;  // N x d
    std::vector<cdouble> noise_;         // N x d
    std::vector<cdouble> coefficients_;  // N x K
    std::vector<cdouble> gains_;         // N x K
};

/// Runs the uplink: superposition of all K devices' normalized updates plus
/// receiver noise, combined per RF chain. The N_r x d received matrix is
/// never materialized; memory stays O(N d + K N_r).
RoundTransmission transmit_round(std::span<const LocalUpdate> updates,
                                 const ChannelRealization& h,
                                 const AnalogBeamformer& bf,
                                 const DigitalCombiner& comb, const NoiseDraw& noise,
                                 std::span<const double> powers,
                                 const RoundOptions& options = {});

/// Estimated global update with the exact three-way error split: weight
/// distortion on the served cluster, inter-task interference, and noise.
/// `error` equals the sum of the three term vectors up to rounding, and the
/// *_energy fields hold the squared norms of the complex-valued terms
/// (both quadratures counted).
struct AggregationOutcome {
    std::vector<double> estimate;      ///< ghat
    std::vector<double> ground_truth;  ///< sum_l alpha_l g_l
    std::vector<double> error;         ///< estimate - ground_truth
    std::vector<double> term_weight_distortion;
    std::vector<double> term_interference;
    std::vector<double> term_noise;
    double weight_distortion_energy = 0.0;
    double interference_energy = 0.0;
    double noise_energy = 0.0;
    double imag_energy_ratio = 0.0;  ///< ||Im y||^2 / ||y||^2 diagnostic
};

/// Recovers task n's global-update estimate from the received signal and the
/// cluster's (noiselessly known) normalization statistics.
AggregationOutcome estimate_global_update(const RoundTransmission& tx, int task,
                                          std::span<const LocalUpdate> cluster_updates);

struct RealPart {
    std::vector<double> values;
    double imag_energy_ratio = 0.0;
};

/// Takes the real part of a complex vector and records how much energy the
/// discarded imaginary part carried.
RealPart real_part_policy(std::span<const cdouble> y);

}  // namespace airfl

#endif  // AIRFL_AIRCOMP_HPP
