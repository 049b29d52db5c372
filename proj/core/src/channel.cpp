#include "airfl/channel.hpp"

#include <cmath>

#include "airfl/errors.hpp"

namespace airfl {

ChannelRealization::ChannelRealization(const SystemConfig& cfg, std::uint64_t round)
    : n_tasks_(cfg.n_tasks),
      devices_per_cluster_(cfg.devices_per_cluster),
      n_shifters_(cfg.n_shifters),
      round_(round),
      entries_(static_cast<std::size_t>(cfg.total_devices()) * cfg.n_shifters) {
    const double amplitude = std::sqrt(cfg.path_loss);
    for (int i = 0; i < n_tasks_; ++i) {
        for (int l = 0; l < devices_per_cluster_; ++l) {
            const int dev = cfg.device_index(i, l);
            RngStream stream = substream(cfg.rng_seed, StreamTag::Channel, round,
                                         static_cast<std::uint64_t>(dev));
            cdouble* v = entries_.data() + static_cast<std::size_t>(dev) * n_shifters_;
            for (int r = 0; r < n_shifters_; ++r) v[r] = amplitude * stream.cnormal();
        }
    }
}

std::span<const cdouble> ChannelRealization::device(int task, int device) const {
    if (task < 0 || task >= n_tasks_ || device < 0 || device >= devices_per_cluster_)
        throw DimensionError("channel device index out of range");
    const std::size_t offset =
        static_cast<std::size_t>(task * devices_per_cluster_ + device) * n_shifters_;
    return {entries_.data() + offset, static_cast<std::size_t>(n_shifters_)};
}

std::span<const cdouble> ChannelRealization::subarray_block(int task, int dev,
                                                            int subarray) const {
    if (subarray < 0 || subarray >= n_tasks_)
        throw DimensionError("subarray index out of range");
    const int m = subarray_size();
    return device(task, dev).subspan(static_cast<std::size_t>(subarray) * m, m);
}

ChannelRealization sample_channels(const SystemConfig& cfg, std::uint64_t round) {
    cfg.validate();
    return ChannelRealization(cfg, round);
}

NoiseDraw::NoiseDraw(const SystemConfig& cfg, std::uint64_t round)
    : rows_(cfg.n_shifters),
      cols_(cfg.model_dim),
      variance_(cfg.noise_variance),
      seed_(cfg.rng_seed),
      round_(round) {}

void NoiseDraw::fill_row(int r, std::span<cdouble> out) const {
    if (r < 0 || r >= rows_) throw DimensionError("noise row out of range");
    if (out.size() != static_cast<std::size_t>(cols_))
        throw DimensionError("noise row buffer has wrong length");
    if (variance_ == 0.0) {
        for (auto& x : out) x = 0.0;
        return;
    }
    RngStream stream =
        substream(seed_, StreamTag::Noise, round_, static_cast<std::uint64_t>(r));
    const double amplitude = std::sqrt(variance_);
    for (auto& x : out) x = amplitude * stream.cnormal();
}

std::vector<cdouble> NoiseDraw::materialize() const {
    std::vector<cdouble> matrix(static_cast<std::size_t>(rows_) * cols_);
    for (int r = 0; r < rows_; ++r)
        fill_row(r, {matrix.data() + static_cast<std::size_t>(r) * cols_,
                     static_cast<std::size_t>(cols_)});
    return matrix;
}

NoiseDraw sample_noise(const SystemConfig& cfg, std::uint64_t round) {
    cfg.validate();
    return NoiseDraw(cfg, round);
}

}  // namespace airfl
