#include "airfl/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "airfl/channel.hpp"
#include "airfl/errors.hpp"
#include "airfl/rng.hpp"
#include "airfl/stats.hpp"

namespace airfl {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::int64_t kTrialChunk = 256;
}  // namespace

double predicted_own_mean(int subarray_size, int devices_per_cluster) {
    return 0.5 * std::sqrt(kPi * subarray_size / static_cast<double>(devices_per_cluster));
}

double predicted_own_variance(int devices_per_cluster) {
    return 1.0 - kPi / (4.0 * devices_per_cluster);
}

double predicted_own_mean_quantized(int subarray_size, int devices_per_cluster,
                                    int bits) {
    if (bits == 0) return predicted_own_mean(subarray_size, devices_per_cluster);
    return predicted_own_mean(subarray_size, devices_per_cluster) *
           sinc(std::ldexp(1.0, -bits));
}

double predicted_own_variance_quantized(int devices_per_cluster, int bits) {
    if (bits == 0) return predicted_own_variance(devices_per_cluster);
    const double s = sinc(std::ldexp(1.0, -bits));
    return 1.0 - s * s * kPi / (4.0 * devices_per_cluster);
}

double predicted_discrete_power_ratio(int bits) {
    const double s = sinc(std::ldexp(1.0, -bits));
    return 1.0 / (s * s);
}

std::string SchemeSpec::label() const {
    if (family == Family::Ro) return "ro";
    if (bits == 0) return "continuous";
    return "b=" + std::to_string(bits);
}

// ---------------------------------------------------------------------------
// Effective-channel moments.
// ---------------------------------------------------------------------------

namespace {

struct EffChannelPartial {
    std::vector<ComplexMeanAccumulator> own;  // one per mode
    std::vector<ComplexMeanAccumulator> off;
};

}  // namespace

std::vector<EffectiveChannelStats> estimate_effective_channel_stats(
    const SystemConfig& cfg, std::span<const int> bits_list, long long n_trials,
    const McOptions& opts) {
    cfg.validate();
    if (bits_list.empty()) throw InputError("at least one phase mode required");
    if (n_trials < 1) throw InputError("n_trials must be >= 1");
    for (const int b : bits_list)
        if (b < 0) throw ConfigError("bits must be >= 1 or 0 for continuous");

    const std::size_t n_modes = bits_list.size();
    const std::int64_t n_chunks = (n_trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<EffChannelPartial> partials(static_cast<std::size_t>(n_chunks));

    parallel_chunks(n_trials, kTrialChunk, opts.threads,
                    [&](std::size_t chunk, std::int64_t begin, std::int64_t end) {
        EffChannelPartial part;
        part.own.resize(n_modes);
        part.off.resize(n_modes);
        for (std::int64_t t = begin; t < end; ++t) {
            const ChannelRealization h =
                sample_channels(cfg, opts.trial_offset + static_cast<std::uint64_t>(t));
            const AnalogBeamformer continuous = build_analog_continuous(h, cfg);
            for (std::size_t mode = 0; mode < n_modes; ++mode) {
                AnalogBeamformer quantized(1, 1, 0);
                if (bits_list[mode] > 0)
                    quantized = quantize_phases(continuous, bits_list[mode]);
                const AnalogBeamformer& bf =
                    bits_list[mode] > 0 ? quantized : continuous;
                for (int n = 0; n < cfg.n_tasks; ++n) {
                    for (int i = 0; i < cfg.n_tasks; ++i) {
                        for (int l = 0; l < cfg.devices_per_cluster; ++l) {
                            const cdouble x =
                                bf.combine(n, h.subarray_block(i, l, n));
                            if (i == n)
                                part.own[mode].add(x);
                            else
                                part.off[mode].add(x);
                        }
                    }
                }
            }
        }
        partials[chunk] = std::move(part);
    });

    std::vector<EffectiveChannelStats> out(n_modes);
    for (std::size_t mode = 0; mode < n_modes; ++mode) {
        ComplexMeanAccumulator own, off;
        for (const auto& part : partials) {
            own.merge(part.own[mode]);
            off.merge(part.off[mode]);
        }
        auto& s = out[mode];
        s.bits = bits_list[mode];
        s.n_trials = n_trials;
        s.own_count = own.count;
        s.off_count = off.count;
        s.own_mean = own.mean();
        s.own_mean_stderr = own.stderr_mean();
        s.own_variance = own.variance();
        s.off_mean = off.mean();
        s.off_mean_stderr = off.stderr_mean();
        s.off_variance = off.variance();
        s.predicted_mean = predicted_own_mean_quantized(
            cfg.subarray_size(), cfg.devices_per_cluster, s.bits);
        s.predicted_variance =
            predicted_own_variance_quantized(cfg.devices_per_cluster, s.bits);
    }
    return out;
}

EffectiveChannelStats estimate_effective_channel_stats(const SystemConfig& cfg,
                                                       int bits, long long n_trials,
                                                       const McOptions& opts) {
    const int modes[1] = {bits};
    return estimate_effective_channel_stats(cfg, modes, n_trials, opts).front();
}

// ---------------------------------------------------------------------------
// Interference power.
// ---------------------------------------------------------------------------

namespace {

struct SchemeState {
    SchemeSpec spec;
    double zeta = 0.0;
};

struct InterferencePartial {
    // Per scheme: N per-task accumulators plus one element-wise accumulator.
    std::vector<MeanAccumulator> task;  // n_schemes * N
    std::vector<MeanAccumulator> element;
};

std::vector<UpdateStats> default_stats(const SystemConfig& cfg) {
    std::vector<UpdateStats> stats(
        static_cast<std::size_t>(cfg.total_devices()));
    const double alpha = 1.0 / cfg.devices_per_cluster;
    for (auto& s : stats) s = {alpha, 1.0};
    return stats;
}

double ro_scaling_factor(std::span<const UpdateStats> stats,
                         const SystemConfig& cfg) {
    double max_av = 0.0;
    for (const auto& s : stats) max_av = std::max(max_av, s.alpha * s.stddev);
    if (max_av == 0.0) return 0.0;
    // Match the expected desired-signal coefficient of the analog scheme:
    // E[f_n^H h_{n,l}] = N_r, so zeta_ro N_r sqrt(p_{n,l}) = alpha v.
    return max_av / (cfg.n_shifters * std::sqrt(cfg.power_budget));
}

}  // namespace

std::vector<InterferenceReport> estimate_interference_power(
    const SystemConfig& cfg, std::span<const SchemeSpec> schemes,
    long long n_trials, const InterferenceOptions& opts) {
    cfg.validate();
    if (schemes.empty()) throw InputError("at least one scheme required");
    if (n_trials < 1) throw InputError("n_trials must be >= 1");

    const int n = cfg.n_tasks;
    const int l = cfg.devices_per_cluster;
    const int k = n * l;
    const int d = cfg.model_dim;

    const std::vector<UpdateStats> stats =
        opts.stats.empty() ? default_stats(cfg) : opts.stats;
    if (stats.size() != static_cast<std::size_t>(k))
        throw DimensionError("expected one UpdateStats per device");

    // Powers are mode-independent; zeta carries the per-scheme gain matching.
    const PowerAllocation base_alloc = compute_scaling_factor(stats, cfg, 0);
    std::vector<SchemeState> states(schemes.size());
    bool need_continuous = false;
    bool need_ro = false;
    for (std::size_t m = 0; m < schemes.size(); ++m) {
        states[m].spec = schemes[m];
        if (schemes[m].family == SchemeSpec::Family::Ro) {
            states[m].zeta = ro_scaling_factor(stats, cfg);
            need_ro = true;
        } else {
            states[m].zeta =
                compute_scaling_factor(stats, cfg, schemes[m].bits).zeta;
            need_continuous = true;
        }
    }

    std::vector<InterferenceReport> reports(schemes.size());
    for (std::size_t m = 0; m < schemes.size(); ++m) {
        auto& r = reports[m];
        r.scheme = schemes[m];
        r.n_trials = n_trials;
        r.unit_signals = opts.unit_signals;
        r.zeta = states[m].zeta;
        r.task_power.assign(static_cast<std::size_t>(n), 0.0);
        r.task_power_stderr.assign(static_cast<std::size_t>(n), 0.0);
        r.task_analytic.assign(static_cast<std::size_t>(n), 0.0);
    }

    if (n == 1) {
        for (auto& r : reports) r.trivial_single_task = true;
        return reports;
    }

    // Closed forms: P_I,n = d zeta^2 sum_{i != n, l} p (analog); the RO
    // cross-channel second moment contributes an extra L N_r factor.
    for (std::size_t m = 0; m < schemes.size(); ++m) {
        const double cross_gain =
            schemes[m].family == SchemeSpec::Family::Ro
                ? static_cast<double>(l) * cfg.n_shifters
                : 1.0;
        double total = 0.0;
        for (int task = 0; task < n; ++task) {
            double p_sum = 0.0;
            for (int i = 0; i < n; ++i) {
                if (i == task) continue;
                for (int dev = 0; dev < l; ++dev)
                    p_sum += base_alloc.powers[static_cast<std::size_t>(i) * l + dev];
            }
            reports[m].task_analytic[task] =
                d * states[m].zeta * states[m].zeta * cross_gain * p_sum;
            total += reports[m].task_analytic[task];
        }
        reports[m].element_wise_analytic = total / (static_cast<double>(d) * n);
    }

    const std::int64_t n_chunks = (n_trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<InterferencePartial> partials(static_cast<std::size_t>(n_chunks));
    const std::size_t n_schemes = schemes.size();

    parallel_chunks(n_trials, kTrialChunk, opts.threads,
                    [&](std::size_t chunk, std::int64_t begin, std::int64_t end) {
        InterferencePartial part;
        part.task.resize(n_schemes * static_cast<std::size_t>(n));
        part.element.resize(n_schemes);
        std::vector<double> signals;  // K x d, drawn when unit_signals
        std::vector<cdouble> mix(static_cast<std::size_t>(d));
        for (std::int64_t t = begin; t < end; ++t) {
            const std::uint64_t trial = opts.trial_offset + static_cast<std::uint64_t>(t);
            const ChannelRealization h = sample_channels(cfg, trial);
            AnalogBeamformer continuous(1, 1, 0);
            if (need_continuous) continuous = build_analog_continuous(h, cfg);
            RoBeamformer ro(1, 1);
            if (need_ro) ro = build_ro_digital(h, cfg);

            if (opts.unit_signals) {
                signals.resize(static_cast<std::size_t>(k) * d);
                for (int dev = 0; dev < k; ++dev) {
                    RngStream s = substream(cfg.rng_seed, StreamTag::Signal, trial,
                                            static_cast<std::uint64_t>(dev));
                    for (int c = 0; c < d; ++c)
                        signals[static_cast<std::size_t>(dev) * d + c] = s.normal();
                }
            }

            for (std::size_t m = 0; m < n_schemes; ++m) {
                const auto& st = states[m];
                const bool is_ro = st.spec.family == SchemeSpec::Family::Ro;
                const AnalogBeamformer quantized =
                    (!is_ro && st.spec.bits > 0)
                        ? quantize_phases(continuous, st.spec.bits)
                        : AnalogBeamformer(1, 1, 0);
                const AnalogBeamformer& bf =
                    (!is_ro && st.spec.bits > 0) ? quantized : continuous;

                double element_sum = 0.0;
                for (int task = 0; task < n; ++task) {
                    double power = 0.0;
                    if (opts.unit_signals)
                        std::fill(mix.begin(), mix.end(), cdouble{0.0, 0.0});
                    for (int i = 0; i < n; ++i) {
                        if (i == task) continue;
                        for (int dev = 0; dev < l; ++dev) {
                            const double p =
                                base_alloc.powers[static_cast<std::size_t>(i) * l +
                                                  dev];
                            if (p == 0.0) continue;
                            cdouble c;
                            if (is_ro) {
                                const auto f = ro.task_vector(task);
                                const auto hv = h.device(i, dev);
                                cdouble acc = 0.0;
                                for (int r = 0; r < cfg.n_shifters; ++r)
                                    acc += std::conj(f[r]) * hv[r];
                                c = acc;
                            } else {
                                c = bf.combine(task, h.subarray_block(i, dev, task));
                            }
                            if (opts.unit_signals) {
                                const cdouble gain = st.zeta * std::sqrt(p) * c;
                                const double* s =
                                    signals.data() +
                                    (static_cast<std::size_t>(i) * l + dev) *
                                        static_cast<std::size_t>(d);
                                for (int col = 0; col < d; ++col)
                                    mix[col] += gain * s[col];
                            } else {
                                power += p * std::norm(c);
                            }
                        }
                    }
                    double sample;
                    if (opts.unit_signals) {
                        double e = 0.0;
                        for (int col = 0; col < d; ++col) e += std::norm(mix[col]);
                        sample = e;  // realized ||interference||^2
                    } else {
                        sample = d * st.zeta * st.zeta * power;
                    }
                    part.task[m * static_cast<std::size_t>(n) + task].add(sample);
                    element_sum += sample;
                }
                part.element[m].add(element_sum / (static_cast<double>(d) * n));
            }
        }
        partials[chunk] = std::move(part);
    });

    for (std::size_t m = 0; m < n_schemes; ++m) {
        MeanAccumulator element;
        for (int task = 0; task < n; ++task) {
            MeanAccumulator acc;
            for (const auto& part : partials)
                acc.merge(part.task[m * static_cast<std::size_t>(n) + task]);
            reports[m].task_power[task] = acc.mean();
            reports[m].task_power_stderr[task] = acc.stderr_mean();
        }
        for (const auto& part : partials) element.merge(part.element[m]);
        reports[m].element_wise = element.mean();
        reports[m].element_wise_stderr = element.stderr_mean();
    }
    return reports;
}

InterferenceReport estimate_interference_power(const SystemConfig& cfg,
                                               const SchemeSpec& scheme,
                                               long long n_trials,
                                               const InterferenceOptions& opts) {
    const SchemeSpec one[1] = {scheme};
    return estimate_interference_power(cfg, one, n_trials, opts).front();
}

InterferenceReport ro_interference_power(const SystemConfig& cfg, long long n_trials,
                                         const InterferenceOptions& opts) {
    return estimate_interference_power(cfg, SchemeSpec::ro(), n_trials, opts);
}

// ---------------------------------------------------------------------------
// Scaling-law fit.
// ---------------------------------------------------------------------------

std::vector<ScalingFit> fit_scaling_law(const SystemConfig& cfg_base,
                                        std::span<const int> grid,
                                        std::span<const SchemeSpec> schemes,
                                        long long n_trials_per_point,
                                        const InterferenceOptions& opts) {
    cfg_base.validate();
    if (grid.size() < 4) throw ConfigError("scaling fit needs at least 4 grid points");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid[i] >= grid[i + 1])
            throw ConfigError("scaling grid must be strictly increasing");
    for (const int nr : grid)
        if (nr < 1 || nr % cfg_base.n_tasks != 0)
            throw ConfigError("every grid N_r must be divisible by n_tasks");
    if (cfg_base.n_tasks < 2)
        throw ConfigError("interference scaling undefined for a single task");

    std::vector<ScalingFit> fits(schemes.size());
    for (std::size_t m = 0; m < schemes.size(); ++m) {
        fits[m].scheme = schemes[m];
        fits[m].grid.assign(grid.begin(), grid.end());
    }

    for (const int nr : grid) {
        SystemConfig cfg = cfg_base;
        cfg.n_shifters = nr;
        const auto reports =
            estimate_interference_power(cfg, schemes, n_trials_per_point, opts);
        for (std::size_t m = 0; m < schemes.size(); ++m) {
            fits[m].element_wise.push_back(reports[m].element_wise);
            fits[m].element_wise_stderr.push_back(reports[m].element_wise_stderr);
        }
    }

    for (auto& fit : fits) {
        std::vector<double> log_nr, log_power;
        for (std::size_t i = 0; i < fit.grid.size(); ++i) {
            if (!(fit.element_wise[i] > 0.0))
                throw InputError("nonpositive interference estimate in scaling fit");
            log_nr.push_back(std::log(static_cast<double>(fit.grid[i])));
            log_power.push_back(std::log(fit.element_wise[i]));
        }
        const LinearFit ols = ols_fit(log_nr, log_power);
        fit.slope = ols.slope;
        fit.intercept = ols.intercept;
    }
    return fits;
}

}  // namespace airfl
