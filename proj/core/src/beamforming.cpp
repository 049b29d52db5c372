#include "airfl/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "airfl/errors.hpp"

namespace airfl {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

AnalogBeamformer::AnalogBeamformer(int n_tasks, int subarray_size,
                                   int quantization_bits)
    : n_tasks_(n_tasks),
      subarray_size_(subarray_size),
      quantization_bits_(quantization_bits),
      phases_(static_cast<std::size_t>(n_tasks) * subarray_size, 0.0),
      conj_rows_(static_cast<std::size_t>(n_tasks) * subarray_size) {
    refresh_weights();
}

std::span<const double> AnalogBeamformer::subarray_phases(int subarray) const {
    if (subarray < 0 || subarray >= n_tasks_)
        throw DimensionError("subarray index out of range");
    return {phases_.data() + static_cast<std::size_t>(subarray) * subarray_size_,
            static_cast<std::size_t>(subarray_size_)};
}

std::span<double> AnalogBeamformer::subarray_phases(int subarray) {
    if (subarray < 0 || subarray >= n_tasks_)
        throw DimensionError("subarray index out of range");
    return {phases_.data() + static_cast<std::size_t>(subarray) * subarray_size_,
            static_cast<std::size_t>(subarray_size_)};
}

cdouble AnalogBeamformer::weight(int subarray, int element) const {
    const double phi = subarray_phases(subarray)[element];
    const double scale = 1.0 / std::sqrt(static_cast<double>(subarray_size_));
    return {scale * std::cos(phi), scale * std::sin(phi)};
}

std::span<const cdouble> AnalogBeamformer::conj_weights(int subarray) const {
    if (subarray < 0 || subarray >= n_tasks_)
        throw DimensionError("subarray index out of range");
    return {conj_rows_.data() + static_cast<std::size_t>(subarray) * subarray_size_,
            static_cast<std::size_t>(subarray_size_)};
}

void AnalogBeamformer::refresh_weights() {
    const double scale = 1.0 / std::sqrt(static_cast<double>(subarray_size_));
    for (std::size_t k = 0; k < phases_.size(); ++k)
        conj_rows_[k] = {scale * std::cos(phases_[k]), -scale * std::sin(phases_[k])};
}

cdouble AnalogBeamformer::combine(int subarray, std::span<const cdouble> block) const {
    if (block.size() != static_cast<std::size_t>(subarray_size_))
        throw DimensionError("channel block length does not match subarray size");
    const auto w = conj_weights(subarray);
    cdouble acc = 0.0;
    for (std::size_t m = 0; m < block.size(); ++m) acc += w[m] * block[m];
    return acc;
}

AnalogBeamformer build_analog_continuous(const ChannelRealization& h,
                                         const SystemConfig& cfg) {
    if (h.n_tasks() != cfg.n_tasks || h.n_shifters() != cfg.n_shifters ||
        h.devices_per_cluster() != cfg.devices_per_cluster)
        throw DimensionError("channel realization does not match config");
    const int m_size = cfg.subarray_size();
    AnalogBeamformer bf(cfg.n_tasks, m_size, 0);
    std::vector<cdouble> summed(m_size);
    for (int n = 0; n < cfg.n_tasks; ++n) {
        std::fill(summed.begin(), summed.end(), cdouble{0.0, 0.0});
        for (int l = 0; l < cfg.devices_per_cluster; ++l) {
            const auto block = h.subarray_block(n, l, n);
            for (int m = 0; m < m_size; ++m) summed[m] += block[m];
        }
        auto phases = bf.subarray_phases(n);
        for (int m = 0; m < m_size; ++m) {
            if (summed[m] == cdouble{0.0, 0.0}) {
                phases[m] = 0.0;  // measure-zero degenerate sum
                continue;
            }
            double phi = std::arg(summed[m]);
            if (phi < 0.0) phi += kTwoPi;
            if (phi >= kTwoPi) phi = 0.0;
            phases[m] = phi;
        }
    }
    bf.refresh_weights();
    return bf;
}

double wrap_to_pi(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a > kPi) a -= kTwoPi;
    if (a <= -kPi) a += kTwoPi;
    return a;
}

double quantize_phase(double phase, int bits) {
    const std::uint64_t levels = std::uint64_t{1} << bits;
    const double step = kTwoPi / static_cast<double>(levels);
    // floor(x + 0.5) rounds exact midpoints up, the documented tie-break.
    auto k = static_cast<std::uint64_t>(std::floor(phase / step + 0.5));
    if (k >= levels) k -= levels;
    return static_cast<double>(k) * step;
}

AnalogBeamformer quantize_phases(const AnalogBeamformer& bf, int bits) {
    if (bits < 1) throw ConfigError("quantization requires bits >= 1");
    if (!bf.continuous())
        throw ConfigError("quantize_phases expects a continuous-mode beamformer");
    AnalogBeamformer out(bf.n_tasks(), bf.subarray_size(), bits);
    for (int n = 0; n < bf.n_tasks(); ++n) {
        const auto src = bf.subarray_phases(n);
        auto dst = out.subarray_phases(n);
        for (std::size_t m = 0; m < src.size(); ++m)
            dst[m] = quantize_phase(src[m], bits);
    }
    out.refresh_weights();
    return out;
}

RoBeamformer::RoBeamformer(int n_tasks, int n_shifters)
    : n_tasks_(n_tasks),
      n_shifters_(n_shifters),
      vectors_(static_cast<std::size_t>(n_tasks) * n_shifters) {}

std::span<const cdouble> RoBeamformer::task_vector(int task) const {
    if (task < 0 || task >= n_tasks_) throw DimensionError("task index out of range");
    return {vectors_.data() + static_cast<std::size_t>(task) * n_shifters_,
            static_cast<std::size_t>(n_shifters_)};
}

std::span<cdouble> RoBeamformer::task_vector(int task) {
    if (task < 0 || task >= n_tasks_) throw DimensionError("task index out of range");
    return {vectors_.data() + static_cast<std::size_t>(task) * n_shifters_,
            static_cast<std::size_t>(n_shifters_)};
}

RoBeamformer build_ro_digital(const ChannelRealization& h, const SystemConfig& cfg) {
    if (h.n_tasks() != cfg.n_tasks || h.n_shifters() != cfg.n_shifters)
        throw DimensionError("channel realization does not match config");
    RoBeamformer ro(cfg.n_tasks, cfg.n_shifters);
    for (int n = 0; n < cfg.n_tasks; ++n) {
        auto f = ro.task_vector(n);
        for (int l = 0; l < cfg.devices_per_cluster; ++l) {
            const auto dev = h.device(n, l);
            for (int r = 0; r < cfg.n_shifters; ++r) f[r] += dev[r];
        }
    }
    return ro;
}

std::vector<cdouble> effective_channel(const AnalogBeamformer& bf,
                                       const ChannelRealization& h, int task,
                                       int device) {
    if (bf.n_tasks() != h.n_tasks() || bf.subarray_size() != h.subarray_size())
        throw DimensionError("beamformer does not match channel realization");
    std::vector<cdouble> eff(h.n_tasks());
    for (int n = 0; n < h.n_tasks(); ++n)
        eff[n] = bf.combine(n, h.subarray_block(task, device, n));
    return eff;
}

double array_gain(int subarray_size, int devices_per_cluster, int bits) {
    const double base = 0.5 * std::sqrt(kPi) *
                        std::sqrt(static_cast<double>(subarray_size) /
                                  static_cast<double>(devices_per_cluster));
    if (bits == 0) return base;
    return base * sinc(std::ldexp(1.0, -bits));
}

PowerAllocation compute_scaling_factor(std::span<const UpdateStats> stats,
                                       const SystemConfig& cfg, int bits) {
    const int n = cfg.n_tasks;
    const int l = cfg.devices_per_cluster;
    if (stats.size() != static_cast<std::size_t>(n) * l)
        throw DimensionError("expected one UpdateStats per device");

    double max_av = 0.0;
    for (const auto& s : stats) {
        if (s.stddev < 0.0) throw InputError("update stddev must be >= 0");
        if (s.alpha < 0.0) throw InputError("aggregation weight must be >= 0");
        max_av = std::max(max_av, s.alpha * s.stddev);
    }

    PowerAllocation alloc;
    alloc.powers.assign(stats.size(), 0.0);
    alloc.silent_tasks.assign(static_cast<std::size_t>(n), 0);

    if (max_av == 0.0) {
        // Nothing to transmit anywhere this round.
        alloc.zeta = 0.0;
        alloc.all_silent = true;
        std::fill(alloc.silent_tasks.begin(), alloc.silent_tasks.end(), char{1});
        return alloc;
    }

    const double gain = array_gain(cfg.subarray_size(), l, bits);
    alloc.zeta = max_av / (gain * std::sqrt(cfg.power_budget));
    for (int t = 0; t < n; ++t) {
        bool any = false;
        for (int dev = 0; dev < l; ++dev) {
            const auto& s = stats[static_cast<std::size_t>(t) * l + dev];
            const double ratio = s.alpha * s.stddev / max_av;
            alloc.powers[static_cast<std::size_t>(t) * l + dev] =
                cfg.power_budget * ratio * ratio;
            any = any || ratio > 0.0;
        }
        alloc.silent_tasks[t] = any ? 0 : 1;
    }
    return alloc;
}

void write_phases_csv(const AnalogBeamformer& bf, std::ostream& out) {
    out << "subarray,element,phase\n";
    char buf[64];
    for (int n = 0; n < bf.n_tasks(); ++n) {
        const auto phases = bf.subarray_phases(n);
        for (std::size_t m = 0; m < phases.size(); ++m) {
            std::snprintf(buf, sizeof(buf), "%d,%zu,%.17g\n", n, m, phases[m]);
            out << buf;
        }
    }
}

}  // namespace airfl
