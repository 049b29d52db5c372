#include "airfl/fedlearn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "airfl/errors.hpp"

namespace airfl {

namespace {

void softmax_inplace(std::span<double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (auto& v : z) v /= sum;
}

void check_batch(const Dataset& data, std::span<const std::size_t> indices) {
    if (indices.empty()) throw InputError("empty sample batch");
    for (const std::size_t i : indices)
        if (i >= data.size()) throw DimensionError("sample index out of range");
}

}  // namespace

// ---------------------------------------------------------------------------
// Multinomial logistic regression.
// ---------------------------------------------------------------------------

LogisticRegression::LogisticRegression(int n_features, int n_classes)
    : n_features_(n_features), n_classes_(n_classes) {
    if (n_features < 1 || n_classes < 2)
        throw ConfigError("logistic regression needs n_features >= 1, n_classes >= 2");
}

int LogisticRegression::dim() const { return n_classes_ * (n_features_ + 1); }

double LogisticRegression::loss(std::span<const double> params, const Dataset& data,
                                std::span<const std::size_t> indices) const {
    check_batch(data, indices);
    if (params.size() != static_cast<std::size_t>(dim()))
        throw DimensionError("parameter vector has wrong length");
    std::vector<double> z(n_classes_);
    double total = 0.0;
    for (const std::size_t idx : indices) {
        const auto x = data.row(idx);
        for (int c = 0; c < n_classes_; ++c) {
            const double* w = params.data() + c * (n_features_ + 1);
            double acc = w[n_features_];
            for (int f = 0; f < n_features_; ++f) acc += w[f] * x[f];
            z[c] = acc;
        }
        softmax_inplace(z);
        total += -std::log(std::max(z[data.labels[idx]], 1e-300));
    }
    return total / static_cast<double>(indices.size());
}

double LogisticRegression::loss_gradient(std::span<const double> params,
                                         const Dataset& data,
                                         std::span<const std::size_t> indices,
                                         std::span<double> grad) const {
    check_batch(data, indices);
    if (params.size() != static_cast<std::size_t>(dim()) || grad.size() != params.size())
        throw DimensionError("parameter/gradient vector has wrong length");
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> z(n_classes_);
    double total = 0.0;
    for (const std::size_t idx : indices) {
        const auto x = data.row(idx);
        for (int c = 0; c < n_classes_; ++c) {
            const double* w = params.data() + c * (n_features_ + 1);
            double acc = w[n_features_];
            for (int f = 0; f < n_features_; ++f) acc += w[f] * x[f];
            z[c] = acc;
        }
        softmax_inplace(z);
        const int label = data.labels[idx];
        total += -std::log(std::max(z[label], 1e-300));
        for (int c = 0; c < n_classes_; ++c) {
            const double dz = z[c] - (c == label ? 1.0 : 0.0);
            double* g = grad.data() + c * (n_features_ + 1);
            for (int f = 0; f < n_features_; ++f) g[f] += dz * x[f];
            g[n_features_] += dz;
        }
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (auto& g : grad) g *= inv;
    return total * inv;
}

int LogisticRegression::predict(std::span<const double> params,
                                std::span<const double> x) const {
    int best = 0;
    double best_score = -1e300;
    for (int c = 0; c < n_classes_; ++c) {
        const double* w = params.data() + c * (n_features_ + 1);
        double acc = w[n_features_];
        for (int f = 0; f < n_features_; ++f) acc += w[f] * x[f];
        if (acc > best_score) {
            best_score = acc;
            best = c;
        }
    }
    return best;
}

std::vector<double> LogisticRegression::initial_params(RngStream&) const {
    return std::vector<double>(static_cast<std::size_t>(dim()), 0.0);
}

// ---------------------------------------------------------------------------
// One-hidden-layer perceptron (tanh).
// ---------------------------------------------------------------------------

MlpClassifier::MlpClassifier(int n_features, int n_hidden, int n_classes)
    : n_features_(n_features), n_hidden_(n_hidden), n_classes_(n_classes) {
    if (n_features < 1 || n_hidden < 1 || n_classes < 2)
        throw ConfigError("mlp needs n_features, n_hidden >= 1 and n_classes >= 2");
}

int MlpClassifier::dim() const {
    return n_hidden_ * (n_features_ + 1) + n_classes_ * (n_hidden_ + 1);
}

namespace {

struct MlpViews {
    const double* w1;  // H x F
    const double* b1;  // H
    const double* w2;  // C x H
    const double* b2;  // C
};

MlpViews mlp_views(std::span<const double> params, int f, int h, int c) {
    MlpViews v;
    v.w1 = params.data();
    v.b1 = v.w1 + static_cast<std::size_t>(h) * f;
    v.w2 = v.b1 + h;
    v.b2 = v.w2 + static_cast<std::size_t>(c) * h;
    return v;
}

}  // namespace

double MlpClassifier::loss(std::span<const double> params, const Dataset& data,
                           std::span<const std::size_t> indices) const {
    check_batch(data, indices);
    if (params.size() != static_cast<std::size_t>(dim()))
        throw DimensionError("parameter vector has wrong length");
    const auto v = mlp_views(params, n_features_, n_hidden_, n_classes_);
    std::vector<double> hidden(n_hidden_), z(n_classes_);
    double total = 0.0;
    for (const std::size_t idx : indices) {
        const auto x = data.row(idx);
        for (int j = 0; j < n_hidden_; ++j) {
            double acc = v.b1[j];
            const double* w = v.w1 + static_cast<std::size_t>(j) * n_features_;
            for (int f = 0; f < n_features_; ++f) acc += w[f] * x[f];
            hidden[j] = std::tanh(acc);
        }
        for (int c = 0; c < n_classes_; ++c) {
            double acc = v.b2[c];
            const double* w = v.w2 + static_cast<std::size_t>(c) * n_hidden_;
            for (int j = 0; j < n_hidden_; ++j) acc += w[j] * hidden[j];
            z[c] = acc;
        }
        softmax_inplace(z);
        total += -std::log(std::max(z[data.labels[idx]], 1e-300));
    }
    return total / static_cast<double>(indices.size());
}

double MlpClassifier::loss_gradient(std::span<const double> params,
                                    const Dataset& data,
                                    std::span<const std::size_t> indices,
                                    std::span<double> grad) const {
    check_batch(data, indices);
    if (params.size() != static_cast<std::size_t>(dim()) || grad.size() != params.size())
        throw DimensionError("parameter/gradient vector has wrong length");
    std::fill(grad.begin(), grad.end(), 0.0);
    const auto v = mlp_views(params, n_features_, n_hidden_, n_classes_);
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + static_cast<std::size_t>(n_hidden_) * n_features_;
    double* g_w2 = g_b1 + n_hidden_;
    double* g_b2 = g_w2 + static_cast<std::size_t>(n_classes_) * n_hidden_;

    std::vector<double> hidden(n_hidden_), z(n_classes_), dh(n_hidden_);
    double total = 0.0;
    for (const std::size_t idx : indices) {
        const auto x = data.row(idx);
        for (int j = 0; j < n_hidden_; ++j) {
            double acc = v.b1[j];
            const double* w = v.w1 + static_cast<std::size_t>(j) * n_features_;
            for (int f = 0; f < n_features_; ++f) acc += w[f] * x[f];
            hidden[j] = std::tanh(acc);
        }
        for (int c = 0; c < n_classes_; ++c) {
            double acc = v.b2[c];
            const double* w = v.w2 + static_cast<std::size_t>(c) * n_hidden_;
            for (int j = 0; j < n_hidden_; ++j) acc += w[j] * hidden[j];
            z[c] = acc;
        }
        softmax_inplace(z);
        const int label = data.labels[idx];
        total += -std::log(std::max(z[label], 1e-300));

        std::fill(dh.begin(), dh.end(), 0.0);
        for (int c = 0; c < n_classes_; ++c) {
            const double dz = z[c] - (c == label ? 1.0 : 0.0);
            double* g = g_w2 + static_cast<std::size_t>(c) * n_hidden_;
            const double* w = v.w2 + static_cast<std::size_t>(c) * n_hidden_;
            for (int j = 0; j < n_hidden_; ++j) {
                g[j] += dz * hidden[j];
                dh[j] += dz * w[j];
            }
            g_b2[c] += dz;
        }
        for (int j = 0; j < n_hidden_; ++j) {
            const double da = dh[j] * (1.0 - hidden[j] * hidden[j]);
            double* g = g_w1 + static_cast<std::size_t>(j) * n_features_;
            for (int f = 0; f < n_features_; ++f) g[f] += da * x[f];
            g_b1[j] += da;
        }
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (auto& g : grad) g *= inv;
    return total * inv;
}

int MlpClassifier::predict(std::span<const double> params,
                           std::span<const double> x) const {
    const auto v = mlp_views(params, n_features_, n_hidden_, n_classes_);
    std::vector<double> hidden(n_hidden_);
    for (int j = 0; j < n_hidden_; ++j) {
        double acc = v.b1[j];
        const double* w = v.w1 + static_cast<std::size_t>(j) * n_features_;
        for (int f = 0; f < n_features_; ++f) acc += w[f] * x[f];
        hidden[j] = std::tanh(acc);
    }
    int best = 0;
    double best_score = -1e300;
    for (int c = 0; c < n_classes_; ++c) {
        double acc = v.b2[c];
        const double* w = v.w2 + static_cast<std::size_t>(c) * n_hidden_;
        for (int j = 0; j < n_hidden_; ++j) acc += w[j] * hidden[j];
        if (acc > best_score) {
            best_score = acc;
            best = c;
        }
    }
    return best;
}

std::vector<double> MlpClassifier::initial_params(RngStream& rng) const {
    std::vector<double> params(static_cast<std::size_t>(dim()));
    const double a1 = std::sqrt(6.0 / (n_features_ + n_hidden_));
    const double a2 = std::sqrt(6.0 / (n_hidden_ + n_classes_));
    const std::size_t split = static_cast<std::size_t>(n_hidden_) * (n_features_ + 1);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double a = i < split ? a1 : a2;
        params[i] = a * (2.0 * rng.uniform() - 1.0);
    }
    return params;
}

double accuracy(const Model& model, std::span<const double> params,
                const Dataset& data) {
    if (data.size() == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (model.predict(params, data.row(i)) == data.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Tasks and synthetic data.
// ---------------------------------------------------------------------------

std::vector<double> alphas_from_sizes(std::span<const std::size_t> sizes) {
    std::size_t total = 0;
    for (const std::size_t s : sizes) {
        if (s == 0) throw ConfigError("device dataset sizes must be positive");
        total += s;
    }
    std::vector<double> alphas(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i)
        alphas[i] = static_cast<double>(sizes[i]) / static_cast<double>(total);
    return alphas;
}

void TaskSpec::validate() const {
    if (!model) throw ConfigError("task has no model");
    if (device_indices.empty()) throw ConfigError("task has no devices");
    if (alphas.size() != device_indices.size())
        throw ConfigError("one aggregation weight per device required");
    double alpha_sum = 0.0;
    for (std::size_t l = 0; l < device_indices.size(); ++l) {
        if (device_indices[l].empty())
            throw ConfigError("device " + std::to_string(l) + " has an empty dataset");
        for (const std::size_t idx : device_indices[l])
            if (idx >= train.size())
                throw ConfigError("device sample index out of range");
        alpha_sum += alphas[l];
    }
    if (std::abs(alpha_sum - 1.0) > 1e-9)
        throw ConfigError("aggregation weights must sum to 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (local_iterations < 1) throw ConfigError("local iterations must be >= 1");
    if (batch_size < 0) throw ConfigError("batch size must be >= 0");
}

namespace {

// Orthonormal class directions via Gram-Schmidt on Gaussian draws.
std::vector<double> class_directions(int n_classes, int n_features, RngStream& rng) {
    if (n_features < n_classes)
        throw ConfigError("synthetic tasks need n_features >= n_classes");
    std::vector<double> dirs(static_cast<std::size_t>(n_classes) * n_features);
    for (int c = 0; c < n_classes; ++c) {
        double* v = dirs.data() + static_cast<std::size_t>(c) * n_features;
        while (true) {
            for (int f = 0; f < n_features; ++f) v[f] = rng.normal();
            for (int prev = 0; prev < c; ++prev) {
                const double* u = dirs.data() + static_cast<std::size_t>(prev) * n_features;
                double dot = 0.0;
                for (int f = 0; f < n_features; ++f) dot += v[f] * u[f];
                for (int f = 0; f < n_features; ++f) v[f] -= dot * u[f];
            }
            double norm = 0.0;
            for (int f = 0; f < n_features; ++f) norm += v[f] * v[f];
            norm = std::sqrt(norm);
            if (norm > 1e-6) {
                for (int f = 0; f < n_features; ++f) v[f] /= norm;
                break;
            }
        }
    }
    return dirs;
}

Dataset sample_mixture(const SyntheticTaskSpec& spec, std::span<const double> dirs,
                       std::size_t count, RngStream& rng) {
    Dataset data;
    data.n_features = spec.n_features;
    data.n_classes = spec.n_classes;
    data.features.resize(count * static_cast<std::size_t>(spec.n_features));
    data.labels.resize(count);
    const double radius = spec.separation / std::sqrt(2.0);
    for (std::size_t i = 0; i < count; ++i) {
        const int label = static_cast<int>(rng.next_u64() % spec.n_classes);
        data.labels[i] = label;
        const double* mu = dirs.data() + static_cast<std::size_t>(label) * spec.n_features;
        double* x = data.features.data() + i * static_cast<std::size_t>(spec.n_features);
        for (int f = 0; f < spec.n_features; ++f)
            x[f] = radius * mu[f] + rng.normal();
    }
    return data;
}

}  // namespace

std::vector<TaskSpec> make_synthetic_tasks(std::span<const SyntheticTaskSpec> specs,
                                           std::uint64_t seed) {
    std::vector<TaskSpec> tasks;
    tasks.reserve(specs.size());
    for (std::size_t t = 0; t < specs.size(); ++t) {
        const auto& spec = specs[t];
        if (spec.devices < 1) throw ConfigError("task needs at least one device");
        if (spec.n_classes < 2) throw ConfigError("task needs at least two classes");
        if (!(spec.separation >= 0.0)) throw ConfigError("separation must be >= 0");
        if (!(spec.test_fraction > 0.0) || spec.test_fraction >= 1.0)
            throw ConfigError("test_fraction must lie in (0, 1)");

        std::vector<std::size_t> sizes = spec.device_sizes;
        if (sizes.empty()) {
            if (spec.samples_per_device < 1)
                throw ConfigError("samples_per_device must be positive");
            sizes.assign(static_cast<std::size_t>(spec.devices),
                         static_cast<std::size_t>(spec.samples_per_device));
        }
        if (sizes.size() != static_cast<std::size_t>(spec.devices))
            throw ConfigError("device_sizes must list one size per device");

        std::size_t train_total = 0;
        for (const std::size_t s : sizes) {
            if (s == 0) throw ConfigError("device dataset sizes must be positive");
            train_total += s;
        }
        const auto test_total = static_cast<std::size_t>(std::llround(
            static_cast<double>(train_total) * spec.test_fraction /
            (1.0 - spec.test_fraction)));

        RngStream rng = substream(seed, StreamTag::Data, t);
        const std::vector<double> dirs =
            class_directions(spec.n_classes, spec.n_features, rng);

        TaskSpec task;
        task.train = sample_mixture(spec, dirs, train_total, rng);
        task.test = sample_mixture(spec, dirs, std::max<std::size_t>(test_total, 1), rng);
        task.device_indices.resize(sizes.size());
        std::size_t cursor = 0;
        for (std::size_t l = 0; l < sizes.size(); ++l) {
            task.device_indices[l].resize(sizes[l]);
            std::iota(task.device_indices[l].begin(), task.device_indices[l].end(),
                      cursor);
            cursor += sizes[l];
        }
        task.alphas = alphas_from_sizes(sizes);
        if (spec.model == "logistic") {
            task.model =
                std::make_shared<LogisticRegression>(spec.n_features, spec.n_classes);
        } else if (spec.model == "mlp") {
            task.model = std::make_shared<MlpClassifier>(
                spec.n_features, spec.hidden_units, spec.n_classes);
        } else {
            throw ConfigError("unknown model kind '" + spec.model + "'");
        }
        task.learning_rate = spec.learning_rate;
        task.local_iterations = spec.local_iterations;
        task.batch_size = spec.batch_size;
        task.validate();
        tasks.push_back(std::move(task));
    }
    return tasks;
}

// ---------------------------------------------------------------------------
// FedAvg.
// ---------------------------------------------------------------------------

std::vector<double> local_update(const TaskSpec& task, int device,
                                 std::span<const double> global_params,
                                 std::uint64_t seed, std::uint64_t round,
                                 int global_device_index) {
    const auto& pool = task.device_indices.at(static_cast<std::size_t>(device));
    const std::size_t n_local = pool.size();
    const int batch =
        task.batch_size == 0
            ? static_cast<int>(n_local)
            : std::min<int>(task.batch_size, static_cast<int>(n_local));

    std::vector<std::size_t> order(pool.begin(), pool.end());
    RngStream rng = substream(seed, StreamTag::Batch, round,
                              static_cast<std::uint64_t>(global_device_index));
    auto reshuffle = [&] {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_u64() % i]);
    };
    const bool full_batch = batch == static_cast<int>(n_local);
    if (!full_batch) reshuffle();

    std::vector<double> params(global_params.begin(), global_params.end());
    std::vector<double> grad(params.size());
    std::size_t cursor = 0;
    for (int iter = 0; iter < task.local_iterations; ++iter) {
        std::span<const std::size_t> indices;
        if (full_batch) {
            indices = order;
        } else {
            if (cursor + static_cast<std::size_t>(batch) > n_local) {
                reshuffle();
                cursor = 0;
            }
            indices = std::span<const std::size_t>(order).subspan(cursor,
                                                                  static_cast<std::size_t>(batch));
            cursor += static_cast<std::size_t>(batch);
        }
        task.model->loss_gradient(params, task.train, indices, grad);
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] -= task.learning_rate * grad[i];
    }

    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
        g[i] = (global_params[i] - params[i]) / task.learning_rate;
    return g;
}

int padded_dim(std::span<const TaskSpec> tasks) {
    int d = 1;
    for (const auto& task : tasks) d = std::max(d, task.model->dim());
    return d;
}

namespace {

double global_loss(const TaskSpec& task, std::span<const double> params) {
    double loss = 0.0;
    for (std::size_t l = 0; l < task.device_indices.size(); ++l)
        loss += task.alphas[l] *
                task.model->loss(params, task.train, task.device_indices[l]);
    return loss;
}

}  // namespace

TrainingResult run_training(const std::vector<TaskSpec>& tasks,
                            const SystemConfig& cfg,
                            const TrainingOptions& options) {
    if (tasks.empty()) throw ConfigError("no tasks to train");
    for (const auto& task : tasks) task.validate();
    const int n = static_cast<int>(tasks.size());
    const int l = tasks.front().devices();
    for (const auto& task : tasks)
        if (task.devices() != l)
            throw ConfigError("all tasks must have the same device count");
    const int d = padded_dim(tasks);

    SystemConfig sys = cfg;
    if (options.mode == ChannelMode::AirComp) {
        if (sys.n_tasks != n || sys.devices_per_cluster != l)
            throw ConfigError("system config does not match the task topology");
        if (sys.model_dim != d)
            throw ConfigError("cfg.model_dim must equal the padded dimension " +
                              std::to_string(d));
        sys.validate();
    }

    TrainingResult result;
    result.params.resize(static_cast<std::size_t>(n));
    for (int task = 0; task < n; ++task) {
        RngStream rng = substream(cfg.rng_seed, StreamTag::Init,
                                  static_cast<std::uint64_t>(task));
        result.params[task] = tasks[task].model->initial_params(rng);
    }

    std::vector<LocalUpdate> updates(static_cast<std::size_t>(n) * l);
    for (std::uint64_t round = 0; round < static_cast<std::uint64_t>(options.rounds);
         ++round) {
        // Local computing on every device, padded to the common dimension.
        for (int task = 0; task < n; ++task) {
            for (int dev = 0; dev < l; ++dev) {
                std::vector<double> g = local_update(
                    tasks[task], dev, result.params[task], cfg.rng_seed, round,
                    task * l + dev);
                g.resize(static_cast<std::size_t>(d), 0.0);
                updates[static_cast<std::size_t>(task) * l + dev] =
                    normalize(std::move(g), tasks[task].alphas[dev]);
            }
        }

        std::vector<TraceRecord> records(static_cast<std::size_t>(n));
        for (int task = 0; task < n; ++task) {
            records[task].round = static_cast<int>(round);
            records[task].task = task;
        }

        if (options.mode == ChannelMode::AirComp) {
            const auto stats = collect_stats(updates);
            const PowerAllocation alloc =
                compute_scaling_factor(stats, sys, sys.quantization_bits);
            const ChannelRealization h = sample_channels(sys, round);
            AnalogBeamformer bf = build_analog_continuous(h, sys);
            if (!sys.continuous_phases())
                bf = quantize_phases(bf, sys.quantization_bits);
            const NoiseDraw noise = sample_noise(sys, round);
            const DigitalCombiner comb{alloc.zeta, n};
            RoundOptions round_opts;
            round_opts.exact_coefficient_matching = options.exact_coefficient_matching;
            const RoundTransmission tx =
                transmit_round(updates, h, bf, comb, noise, alloc.powers, round_opts);
            for (int task = 0; task < n; ++task) {
                const AggregationOutcome outcome = estimate_global_update(
                    tx, task,
                    std::span<const LocalUpdate>(updates).subspan(
                        static_cast<std::size_t>(task) * l,
                        static_cast<std::size_t>(l)));
                auto& rec = records[task];
                double g_norm = 0.0, e_norm = 0.0;
                for (const double x : outcome.ground_truth) g_norm += x * x;
                for (const double x : outcome.error) e_norm += x * x;
                rec.g_true_norm = std::sqrt(g_norm);
                rec.error_norm = std::sqrt(e_norm);
                rec.weight_distortion_energy = outcome.weight_distortion_energy;
                rec.interference_energy = outcome.interference_energy;
                rec.noise_energy = outcome.noise_energy;
                rec.imag_energy_ratio = outcome.imag_energy_ratio;
                auto& params = result.params[task];
                for (std::size_t i = 0; i < params.size(); ++i)
                    params[i] -= tasks[task].learning_rate * outcome.estimate[i];
            }
        } else {
            for (int task = 0; task < n; ++task) {
                std::vector<double> ghat(static_cast<std::size_t>(d), 0.0);
                for (int dev = 0; dev < l; ++dev) {
                    const auto& u = updates[static_cast<std::size_t>(task) * l + dev];
                    for (int c = 0; c < d; ++c) ghat[c] += u.alpha * u.gradient[c];
                }
                double g_norm = 0.0;
                for (const double x : ghat) g_norm += x * x;
                records[task].g_true_norm = std::sqrt(g_norm);
                auto& params = result.params[task];
                for (std::size_t i = 0; i < params.size(); ++i)
                    params[i] -= tasks[task].learning_rate * ghat[i];
            }
        }

        for (int task = 0; task < n; ++task) {
            records[task].loss = global_loss(tasks[task], result.params[task]);
            records[task].accuracy =
                accuracy(*tasks[task].model, result.params[task], tasks[task].test);
            result.trace.push_back(records[task]);
        }
    }

    result.final_loss.resize(static_cast<std::size_t>(n));
    result.final_accuracy.resize(static_cast<std::size_t>(n));
    for (int task = 0; task < n; ++task) {
        result.final_loss[task] = global_loss(tasks[task], result.params[task]);
        result.final_accuracy[task] =
            accuracy(*tasks[task].model, result.params[task], tasks[task].test);
    }
    return result;
}

double max_rel_gradient_error(const Model& model, const Dataset& data,
                              int n_points, std::uint64_t seed) {
    if (data.size() == 0) throw InputError("gradient check needs data");
    const int dim = model.dim();
    double worst = 0.0;
    for (int point = 0; point < n_points; ++point) {
        RngStream rng = substream(seed, StreamTag::Misc,
                                  static_cast<std::uint64_t>(point));
        std::vector<double> params(static_cast<std::size_t>(dim));
        for (auto& p : params) p = 0.5 * rng.normal();
        const std::size_t batch =
            1 + rng.next_u64() % std::min<std::size_t>(data.size(), 8);
        std::vector<std::size_t> indices(batch);
        for (auto& idx : indices) idx = rng.next_u64() % data.size();

        std::vector<double> analytic(params.size());
        model.loss_gradient(params, data, indices, analytic);

        double max_diff = 0.0;
        double scale = 1e-8;
        for (const double g : analytic) scale = std::max(scale, std::abs(g));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double h = 1e-5 * (1.0 + std::abs(params[i]));
            const double saved = params[i];
            params[i] = saved + h;
            const double up = model.loss(params, data, indices);
            params[i] = saved - h;
            const double down = model.loss(params, data, indices);
            params[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            max_diff = std::max(max_diff, std::abs(fd - analytic[i]));
        }
        worst = std::max(worst, max_diff / scale);
    }
    return worst;
}

void save_checkpoint(const std::string& path, std::span<const double> params,
                     int round, int task) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open checkpoint file for writing: " + path);
    out << "dim " << params.size() << "\n";
    out << "round " << round << "\n";
    out << "task " << task << "\n";
    char buf[64];
    for (const double p : params) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", p);
        out << buf;
    }
}

std::vector<double> load_checkpoint(const std::string& path, int* round, int* task) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint file: " + path);
    std::string key;
    std::size_t dim = 0;
    int round_v = 0, task_v = 0;
    in >> key >> dim;
    if (key != "dim") throw InputError("malformed checkpoint header");
    in >> key >> round_v;
    if (key != "round") throw InputError("malformed checkpoint header");
    in >> key >> task_v;
    if (key != "task") throw InputError("malformed checkpoint header");
    std::vector<double> params(dim);
    for (auto& p : params)
        if (!(in >> p)) throw InputError("truncated checkpoint file");
    if (round) *round = round_v;
    if (task) *task = task_v;
    return params;
}

}  // namespace airfl
