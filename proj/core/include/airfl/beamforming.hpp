#ifndef AIRFL_BEAMFORMING_HPP
#define AIRFL_BEAMFORMING_HPP

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "airfl/channel.hpp"
#include "airfl/config.hpp"

namespace airfl {

/// sinc(x) = sin(pi x) / (pi x), sinc(0) = 1.
double sinc(double x);

/// Phase-only sub-connected analog beamformer: one phase vector per subarray,
/// complex weights exp(j phi) / sqrt(M). quantization_bits == 0 means
/// continuous phases.
class AnalogBeamformer {
public:
    AnalogBeamformer(int n_tasks, int subarray_size, int quantization_bits);

    int n_tasks() const { return n_tasks_; }
    int subarray_size() const { return subarray_size_; }
    int quantization_bits() const { return quantization_bits_; }
    bool continuous() const { return quantization_bits_ == 0; }

    /// Phases of subarray n, radians in [0, 2pi).
    std::span<const double> subarray_phases(int subarray) const;
    std::span<double> subarray_phases(int subarray);

    /// Complex weight a_n[m] = exp(j phi) / sqrt(M).
    cdouble weight(int subarray, int element) const;

    /// Conjugated weights of subarray n (the row of A used in a_n^H h),
    /// cached for the hot inner-product loops.
    std::span<const cdouble> conj_weights(int subarray) const;

    /// Recomputes cached complex weights from the phases.
    void refresh_weights();

    /// Inner product a_n^H block for an M-length channel block.
    cdouble combine(int subarray, std::span<const cdouble> block) const;

private:
    int n_tasks_;
    int subarray_size_;
    int quantization_bits_;
    std::vector<double> phases_;      // N x M
    std::vector<cdouble> conj_rows_;  // N x M, conj(a_n[m])
};

/// Builds the continuous-phase beamformer: subarray n aligns to the phase of
/// the summed channel of its own cluster, phi_n[m] = arg(sum_l h_{n,l,n}[m]).
/// A summed entry of exactly 0 yields phase 0.
AnalogBeamformer build_analog_continuous(const ChannelRealization& h,
                                         const SystemConfig& cfg);

/// Maps every phase to the nearest of the 2^b uniformly spaced codewords
/// {0, 2pi/2^b, ...} under wrapped angular distance. Exact midpoints round to
/// the larger codeword. Requires a continuous-mode input and b >= 1.
AnalogBeamformer quantize_phases(const AnalogBeamformer& bf, int bits);

/// Wrapped quantization error phi_quantized - phi_continuous in (-pi, pi].
double wrap_to_pi(double angle);

/// Nearest codeword (round-half-up) for a phase in [0, 2pi) at b bits.
double quantize_phase(double phase, int bits);

/// Digital combiner W = zeta * I_N shared by all RF chains.
struct DigitalCombiner {
    double zeta = 1.0;
    int n_tasks = 1;
};

/// Fully-digital baseline: f_n = sum_l h_{n,l}, one length-N_r vector per task.
class RoBeamformer {
public:
    RoBeamformer(int n_tasks, int n_shifters);
    int n_tasks() const { return n_tasks_; }
    int n_shifters() const { return n_shifters_; }
    std::span<const cdouble> task_vector(int task) const;
    std::span<cdouble> task_vector(int task);

private:
    int n_tasks_;
    int n_shifters_;
    std::vector<cdouble> vectors_;  // N x N_r
};

RoBeamformer build_ro_digital(const ChannelRealization& h, const SystemConfig& cfg);

/// Effective channel of device (i, l): length-N vector with entry
/// n = a_n^H h_{i,l,n}, i.e. the block-diagonal A applied to h_{i,l}.
std::vector<cdouble> effective_channel(const AnalogBeamformer& bf,
                                       const ChannelRealization& h, int task,
                                       int device);

/// Per-device normalization statistics the power control needs.
struct UpdateStats {
    double alpha = 0.0;   ///< aggregation weight
    double stddev = 0.0;  ///< v, entry standard deviation of the raw update
};

struct PowerAllocation {
    double zeta = 0.0;                ///< shared digital combiner scale
    std::vector<double> powers;       ///< K transmit powers, task-major
    std::vector<char> silent_tasks;   ///< 1 if the whole cluster sends nothing
    bool all_silent = false;
};

/// Mean own-subarray combining gain: E[a_n^H h_{n,l,n}] for a device of the
/// served cluster, (sqrt(pi)/2) * sinc(2^-b) * sqrt(M/L). bits == 0 selects
/// the continuous value sqrt(pi M) / (2 sqrt(L)).
double array_gain(int subarray_size, int devices_per_cluster, int bits);

/// Power control matching aggregation coefficients in expectation:
/// zeta * g_b * sqrt(p_{n,l}) = alpha_{n,l} v_{n,l} with max_{n,l} p = P.
/// `stats` is task-major with L entries per task. Throws InputError on a
/// negative stddev.
PowerAllocation compute_scaling_factor(std::span<const UpdateStats> stats,
                                       const SystemConfig& cfg, int bits);

/// Debug dump: one `subarray,element,phase` row per entry.
void write_phases_csv(const AnalogBeamformer& bf, std::ostream& out);

}  // namespace airfl

#endif  // AIRFL_BEAMFORMING_HPP
