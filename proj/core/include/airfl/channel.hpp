#ifndef AIRFL_CHANNEL_HPP
#define AIRFL_CHANNEL_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "airfl/config.hpp"
#include "airfl/rng.hpp"

namespace airfl {

using cdouble = std::complex<double>;

/// One round's uplink channel vectors, h_{i,l} in C^{N_r} for each of the
/// K devices, entries i.i.d. CN(0, 1). Storage is device-major and each
/// device's vector is the concatenation of its N subarray blocks of size M.
class ChannelRealization {
public:
    ChannelRealization(const SystemConfig& cfg, std::uint64_t round);

    int n_tasks() const { return n_tasks_; }
    int devices_per_cluster() const { return devices_per_cluster_; }
    int n_shifters() const { return n_shifters_; }
    int subarray_size() const { return n_shifters_ / n_tasks_; }
    std::uint64_t round() const { return round_; }

    /// Full channel vector of device l in cluster i (length N_r).
    std::span<const cdouble> device(int task, int device) const;

    /// n-th contiguous block of the device's channel (length M), i.e. the
    /// coefficients seen by subarray n.
    std::span<const cdouble> subarray_block(int task, int device, int subarray) const;

private:
    int n_tasks_;
    int devices_per_cluster_;
    int n_shifters_;
    std::uint64_t round_;
    std::vector<cdouble> entries_;  // K * N_r, device-major
};

/// Samples the round's channels. Deterministic: device (i, l) draws from the
/// substream keyed by (seed, Channel, round, i*L + l), so adding devices or
/// antennas never perturbs other devices' draws.
ChannelRealization sample_channels(const SystemConfig& cfg, std::uint64_t round);

/// Additive receiver noise, logically an N_r x d complex matrix with
/// per-entry variance sigma^2 (sigma^2/2 per quadrature). Rows are generated
/// on demand from per-row substreams so the full matrix never has to be
/// materialized when only subarray projections are needed.
class NoiseDraw {
public:
    NoiseDraw(const SystemConfig& cfg, std::uint64_t round);

    int rows() const { return rows_; }           ///< N_r
    int cols() const { return cols_; }           ///< d
    double variance() const { return variance_; }
    std::uint64_t round() const { return round_; }

    /// Fills `out` (length d) with row r of the noise matrix.
    void fill_row(int r, std::span<cdouble> out) const;

    /// Full N_r x d matrix, row-major. Intended for tests and small cases.
    std::vector<cdouble> materialize() const;

private:
    int rows_;
    int cols_;
    double variance_;
    std::uint64_t seed_;
    std::uint64_t round_;
};

NoiseDraw sample_noise(const SystemConfig& cfg, std::uint64_t round);

}  // namespace airfl

#endif  // AIRFL_CHANNEL_HPP
