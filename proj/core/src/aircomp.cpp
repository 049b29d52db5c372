#include "airfl/aircomp.hpp"

#include <cmath>

#include "airfl/errors.hpp"

namespace airfl {

LocalUpdate normalize(std::vector<double> gradient, double alpha) {
    if (gradient.empty()) throw InputError("update vector must have d >= 1");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw InputError("aggregation weight must lie in (0, 1]");

    double max_abs = 0.0;
    double sum = 0.0;
    for (const double x : gradient) {
        if (!std::isfinite(x)) throw InputError("update contains non-finite entries");
        max_abs = std::max(max_abs, std::abs(x));
        sum += x;
    }
    const double d = static_cast<double>(gradient.size());
    const double mu = sum / d;
    double sq = 0.0;
    for (const double x : gradient) sq += (x - mu) * (x - mu);
    const double v = std::sqrt(sq / d);

    LocalUpdate u;
    u.mean = mu;
    u.stddev = v;
    u.alpha = alpha;
    const double eps = 1e-12 * std::max(1.0, max_abs);
    u.degenerate = v < eps;
    u.normalized.assign(gradient.size(), 0.0);
    if (!u.degenerate) {
        for (std::size_t c = 0; c < gradient.size(); ++c)
            u.normalized[c] = (gradient[c] - mu) / v;
    }
    u.gradient = std::move(gradient);
    return u;
}

std::vector<UpdateStats> collect_stats(std::span<const LocalUpdate> updates) {
    std::vector<UpdateStats> stats(updates.size());
    for (std::size_t k = 0; k < updates.size(); ++k) stats[k] = updates[k].stats();
    return stats;
}

RoundTransmission::RoundTransmission(int n_tasks, int devices_per_cluster,
                                     int model_dim, double zeta)
    : n_tasks_(n_tasks),
      devices_per_cluster_(devices_per_cluster),
      model_dim_(model_dim),
      zeta_(zeta),
      received_(static_cast<std::size_t>(n_tasks) * model_dim),
      own_(received_.size()),
      interference_(received_.size()),
      noise_(received_.size()),
      coefficients_(static_cast<std::size_t>(n_tasks) * n_tasks *
                    devices_per_cluster),
      gains_(coefficients_.size()) {}

std::span<const cdouble> RoundTransmission::row(const std::vector<cdouble>& m,
                                                int task) const {
    if (task < 0 || task >= n_tasks_) throw DimensionError("task index out of range");
    return {m.data() + static_cast<std::size_t>(task) * model_dim_,
            static_cast<std::size_t>(model_dim_)};
}

std::span<cdouble> RoundTransmission::row(std::vector<cdouble>& m, int task) {
    if (task < 0 || task >= n_tasks_) throw DimensionError("task index out of range");
    return {m.data() + static_cast<std::size_t>(task) * model_dim_,
            static_cast<std::size_t>(model_dim_)};
}

std::size_t RoundTransmission::pair_index(int task, int tx_task, int tx_device) const {
    if (task < 0 || task >= n_tasks_ || tx_task < 0 || tx_task >= n_tasks_ ||
        tx_device < 0 || tx_device >= devices_per_cluster_)
        throw DimensionError("coefficient index out of range");
    const std::size_t devices =
        static_cast<std::size_t>(n_tasks_) * devices_per_cluster_;
    return static_cast<std::size_t>(task) * devices +
           static_cast<std::size_t>(tx_task) * devices_per_cluster_ + tx_device;
}

cdouble RoundTransmission::coefficient(int task, int tx_task, int tx_device) const {
    return coefficients_[pair_index(task, tx_task, tx_device)];
}

cdouble RoundTransmission::transmit_gain(int task, int tx_task, int tx_device) const {
    return gains_[pair_index(task, tx_task, tx_device)];
}

RoundTransmission transmit_round(std::span<const LocalUpdate> updates,
                                 const ChannelRealization& h,
                                 const AnalogBeamformer& bf,
                                 const DigitalCombiner& comb, const NoiseDraw& noise,
                                 std::span<const double> powers,
                                 const RoundOptions& options) {
    const int n = h.n_tasks();
    const int l = h.devices_per_cluster();
    const int k = n * l;
    if (updates.size() != static_cast<std::size_t>(k) ||
        powers.size() != static_cast<std::size_t>(k))
        throw DimensionError("expected one update and one power per device");
    if (bf.n_tasks() != n || bf.subarray_size() != h.subarray_size())
        throw DimensionError("beamformer does not match channel realization");
    if (comb.n_tasks != n) throw DimensionError("combiner size mismatch");
    const int d = static_cast<int>(updates[0].normalized.size());
    for (const auto& u : updates)
        if (u.normalized.size() != static_cast<std::size_t>(d))
            throw DimensionError("updates have inconsistent dimensions");
    if (noise.rows() != h.n_shifters() || noise.cols() != d)
        throw DimensionError("noise draw does not match round dimensions");

    const double zeta = comb.zeta;
    RoundTransmission tx(n, l, d, zeta);

    // a_n^H h_{i,l,n} for every chain n and transmitter (i, l): O(K N_r).
    for (int chain = 0; chain < n; ++chain) {
        cdouble* row = tx.coefficients_.data() + static_cast<std::size_t>(chain) * k;
        for (int i = 0; i < n; ++i)
            for (int dev = 0; dev < l; ++dev)
                row[i * l + dev] = bf.combine(chain, h.subarray_block(i, dev, chain));
    }

    // Signal superposition, split by origin cluster.
    for (int chain = 0; chain < n; ++chain) {
        auto own = tx.row(tx.own_, chain);
        auto interf = tx.row(tx.interference_, chain);
        const cdouble* coeffs =
            tx.coefficients_.data() + static_cast<std::size_t>(chain) * k;
        cdouble* gains = tx.gains_.data() + static_cast<std::size_t>(chain) * k;
        for (int i = 0; i < n; ++i) {
            for (int dev = 0; dev < l; ++dev) {
                const auto& u = updates[static_cast<std::size_t>(i) * l + dev];
                const double p = powers[static_cast<std::size_t>(i) * l + dev];
                if (u.degenerate || p == 0.0) continue;
                cdouble gain = zeta * std::sqrt(p) * coeffs[i * l + dev];
                if (options.exact_coefficient_matching && i == chain)
                    gain = u.alpha * u.stddev;
                gains[i * l + dev] = gain;
                auto dst = (i == chain) ? own : interf;
                for (int c = 0; c < d; ++c) dst[c] += gain * u.normalized[c];
            }
        }
    }

    // Receiver noise, one matrix row at a time: O(N_r d) and no N_r x d buffer.
    if (noise.variance() > 0.0 && zeta != 0.0) {
        const int m_size = h.subarray_size();
        std::vector<cdouble> noise_row(d);
        for (int chain = 0; chain < n; ++chain) {
            auto acc = tx.row(tx.noise_, chain);
            const auto w = bf.conj_weights(chain);
            for (int m = 0; m < m_size; ++m) {
                noise.fill_row(chain * m_size + m, noise_row);
                const cdouble wm = zeta * w[m];
                for (int c = 0; c < d; ++c) acc[c] += wm * noise_row[c];
            }
        }
    }

    for (std::size_t idx = 0; idx < tx.received_.size(); ++idx)
        tx.received_[idx] = tx.own_[idx] + tx.interference_[idx] + tx.noise_[idx];
    return tx;
}

RealPart real_part_policy(std::span<const cdouble> y) {
    RealPart out;
    out.values.resize(y.size());
    double re_energy = 0.0;
    double im_energy = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c) {
        out.values[c] = y[c].real();
        re_energy += y[c].real() * y[c].real();
        im_energy += y[c].imag() * y[c].imag();
    }
    const double total = re_energy + im_energy;
    out.imag_energy_ratio = total > 0.0 ? im_energy / total : 0.0;
    return out;
}

AggregationOutcome estimate_global_update(const RoundTransmission& tx, int task,
                                          std::span<const LocalUpdate> cluster_updates) {
    const int d = tx.model_dim();
    for (const auto& u : cluster_updates)
        if (u.gradient.size() != static_cast<std::size_t>(d))
            throw DimensionError("cluster update dimension mismatch");

    AggregationOutcome out;
    const auto y = tx.received(task);
    RealPart re = real_part_policy(y);
    out.imag_energy_ratio = re.imag_energy_ratio;

    double mean_offset = 0.0;
    for (const auto& u : cluster_updates) mean_offset += u.alpha * u.mean;

    out.estimate = std::move(re.values);
    for (auto& x : out.estimate) x += mean_offset;

    out.ground_truth.assign(d, 0.0);
    for (const auto& u : cluster_updates)
        for (int c = 0; c < d; ++c) out.ground_truth[c] += u.alpha * u.gradient[c];

    out.error.resize(d);
    for (int c = 0; c < d; ++c) out.error[c] = out.estimate[c] - out.ground_truth[c];

    // Term 1, weight distortion: (zeta sqrt(p) a^H h - alpha v) s per served
    // device. Degenerate devices are reconstructed as mu 1 at the server, so
    // their residual g - mu 1 (below the normalization floor) lands here too.
    std::vector<cdouble> t1(d, cdouble{0.0, 0.0});
    const int l = static_cast<int>(cluster_updates.size());
    for (int dev = 0; dev < l; ++dev) {
        const auto& u = cluster_updates[dev];
        if (u.degenerate) {
            for (int c = 0; c < d; ++c)
                t1[c] -= u.alpha * (u.gradient[c] - u.mean);
            continue;
        }
        const cdouble delta =
            tx.transmit_gain(task, task, dev) - cdouble{u.alpha * u.stddev, 0.0};
        for (int c = 0; c < d; ++c) t1[c] += delta * u.normalized[c];
    }

    const auto t2 = tx.interference(task);
    const auto t3 = tx.noise_component(task);
    out.term_weight_distortion.resize(d);
    out.term_interference.resize(d);
    out.term_noise.resize(d);
    for (int c = 0; c < d; ++c) {
        out.term_weight_distortion[c] = t1[c].real();
        out.term_interference[c] = t2[c].real();
        out.term_noise[c] = t3[c].real();
        out.weight_distortion_energy += std::norm(t1[c]);
        out.interference_energy += std::norm(t2[c]);
        out.noise_energy += std::norm(t3[c]);
    }
    return out;
}

}  // namespace airfl
