#ifndef AIRFL_FEDLEARN_HPP
#define AIRFL_FEDLEARN_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "airfl/aircomp.hpp"
#include "airfl/config.hpp"
#include "airfl/rng.hpp"

namespace airfl {

struct Dataset {
    int n_features = 0;
    int n_classes = 0;
    std::vector<double> features;  ///< row-major, size() x n_features
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * static_cast<std::size_t>(n_features),
                static_cast<std::size_t>(n_features)};
    }
};

/// Differentiable classifier interface. Losses and gradients are means over
/// the given sample indices.
class Model {
public:
    virtual ~Model() = default;
    virtual int dim() const = 0;
    virtual double loss(std::span<const double> params, const Dataset& data,
                        std::span<const std::size_t> indices) const = 0;
    /// Returns the loss and writes the mean gradient into `grad` (length dim()).
    virtual double loss_gradient(std::span<const double> params, const Dataset& data,
                                 std::span<const std::size_t> indices,
                                 std::span<double> grad) const = 0;
    virtual int predict(std::span<const double> params,
                        std::span<const double> x) const = 0;
    virtual std::vector<double> initial_params(RngStream& rng) const = 0;
};

/// Multinomial logistic regression, softmax cross-entropy. Parameters are
/// [w_c (F), b_c] per class, dim = C (F + 1).
class LogisticRegression : public Model {
public:
    LogisticRegression(int n_features, int n_classes);
    int dim() const override;
    double loss(std::span<const double> params, const Dataset& data,
                std::span<const std::size_t> indices) const override;
    double loss_gradient(std::span<const double> params, const Dataset& data,
                         std::span<const std::size_t> indices,
                         std::span<double> grad) const override;
    int predict(std::span<const double> params,
                std::span<const double> x) const override;
    std::vector<double> initial_params(RngStream& rng) const override;

private:
    int n_features_;
    int n_classes_;
};

/// One-hidden-layer perceptron with tanh activation and softmax output.
/// Parameters are [W1 (H x F), b1 (H), W2 (C x H), b2 (C)].
class MlpClassifier : public Model {
public:
    MlpClassifier(int n_features, int n_hidden, int n_classes);
    int dim() const override;
    double loss(std::span<const double> params, const Dataset& data,
                std::span<const std::size_t> indices) const override;
    double loss_gradient(std::span<const double> params, const Dataset& data,
                         std::span<const std::size_t> indices,
                         std::span<double> grad) const override;
    int predict(std::span<const double> params,
                std::span<const double> x) const override;
    std::vector<double> initial_params(RngStream& rng) const override;

private:
    int n_features_;
    int n_hidden_;
    int n_classes_;
};

double accuracy(const Model& model, std::span<const double> params,
                const Dataset& data);

/// One learning task: a model, its federated training partition, and the
/// local-SGD hyperparameters.
struct TaskSpec {
    std::shared_ptr<const Model> model;
    Dataset train;
    Dataset test;
    std::vector<std::vector<std::size_t>> device_indices;  ///< L index lists
    std::vector<double> alphas;  ///< D_l / sum D, one per device
    double learning_rate = 0.01;
    int local_iterations = 1;  ///< E
    int batch_size = 0;        ///< B; 0 = full batch

    int devices() const { return static_cast<int>(device_indices.size()); }
    void validate() const;
};

/// alpha_l = sizes[l] / sum(sizes).
std::vector<double> alphas_from_sizes(std::span<const std::size_t> sizes);

struct SyntheticTaskSpec {
    int n_classes = 2;
    int n_features = 8;
    double separation = 4.0;  ///< distance between class means (noise std = 1)
    int devices = 1;
    int samples_per_device = 64;           ///< used when device_sizes is empty
    std::vector<std::size_t> device_sizes; ///< optional unequal partition
    double test_fraction = 0.2;            ///< share of all data held out
    std::string model = "logistic";        ///< "logistic" or "mlp"
    int hidden_units = 16;                 ///< mlp only
    double learning_rate = 0.05;
    int local_iterations = 1;
    int batch_size = 0;
};

/// Gaussian-mixture classification tasks with class means placed on mutually
/// orthogonal directions at the requested separation (unit noise std), split
/// uniformly (or per device_sizes) across devices plus a held-out test set.
/// Deterministic given (specs, seed).
std::vector<TaskSpec> make_synthetic_tasks(std::span<const SyntheticTaskSpec> specs,
                                           std::uint64_t seed);

/// E local mini-batch SGD steps from `global_params`; returns the accumulated
/// update g = (v_start - v_end) / eta. Batches are drawn without replacement
/// per epoch, reshuffled per round, from the substream keyed by
/// (seed, Batch, round, global device index).
std::vector<double> local_update(const TaskSpec& task, int device,
                                 std::span<const double> global_params,
                                 std::uint64_t seed, std::uint64_t round,
                                 int global_device_index);

enum class ChannelMode { Ideal, AirComp };

struct TrainingOptions {
    ChannelMode mode = ChannelMode::Ideal;
    int rounds = 100;
    bool exact_coefficient_matching = false;  ///< verification mode passthrough
};

struct TraceRecord {
    int round = 0;
    int task = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    double g_true_norm = 0.0;
    double error_norm = 0.0;
    double weight_distortion_energy = 0.0;
    double interference_energy = 0.0;
    double noise_energy = 0.0;
    double imag_energy_ratio = 0.0;
};

struct TrainingResult {
    std::vector<std::vector<double>> params;  ///< final per-task parameters
    std::vector<TraceRecord> trace;           ///< one record per (round, task)
    std::vector<double> final_loss;
    std::vector<double> final_accuracy;
};

/// FedAvg over all tasks simultaneously. In AirComp mode the aggregation runs
/// through the uplink pipeline with updates zero-padded to a common dimension;
/// cfg.model_dim must equal that padded dimension (padded_dim() below).
/// In Ideal mode the server aggregates exactly.
TrainingResult run_training(const std::vector<TaskSpec>& tasks,
                            const SystemConfig& cfg,
                            const TrainingOptions& options);

/// Common transmit dimension: the largest model dimension across tasks.
int padded_dim(std::span<const TaskSpec> tasks);

/// Largest relative deviation between analytic gradients and central finite
/// differences over `n_points` random (parameter, batch) draws.
double max_rel_gradient_error(const Model& model, const Dataset& data,
                              int n_points, std::uint64_t seed);

/// Writes parameters with a small textual header (dim / round / task).
void save_checkpoint(const std::string& path, std::span<const double> params,
                     int round, int task);
std::vector<double> load_checkpoint(const std::string& path, int* round = nullptr,
                                    int* task = nullptr);

}  // namespace airfl

#endif  // AIRFL_FEDLEARN_HPP
